//! One handler per subcommand.

use std::collections::BTreeMap;

use lfam_core::characters::{enumerate_characters, enumerate_family, CharacterKey, CharacterRecord, DirichletCharacter};
use lfam_core::lfunc::{l_value_afe, l_value_oracle, EvalResult, SPoint};
use lfam_core::moments::{
    discrete_family_moment, exponent_fit, family_moment_fixed_t, generate_wellspaced, hardy_littlewood_second_moment,
    integrated_family_moment_nested, square_part_comparison, MomentOptions, MomentReport, ScalingSample, SpacingStrategy,
    WellSpacedSet,
};
use lfam_core::sieve::{
    gallagher_check, meanvalue_check, random_point_sets, random_unit_polynomial, sieve_lhs_discrete,
    sieve_lhs_integrated, CoefficientVector, GallagherFunction, SieveReport,
};
use lfam_core::zeros::{
    count_zeros_rectangle, critical_line_zeros, detector_check, family_zero_count, spaced_zeros, zero_density_bounds,
    CriticalZero, ZeroCountReport,
};
use lfam_core::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::cache::Cache;
use crate::output::Table;
use crate::{CliError, Outcome, RunConfig};

/// Scan-grid revision; part of every cached zero-list key.
const ZERO_GRID_VERSION: u32 = 1;

type Res = Result<Outcome, CliError>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn exps(e: &[u64]) -> String {
    e.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn character(a: &CharacterArgs) -> Result<DirichletCharacter, CliError> {
    Ok(DirichletCharacter::new(a.q, &a.chi)?)
}

fn strategy(s: Strategy) -> SpacingStrategy {
    match s {
        Strategy::Grid => SpacingStrategy::Grid,
        Strategy::Greedy => SpacingStrategy::GreedyLocalMaxima,
    }
}

pub(crate) fn run(cfg: &RunConfig) -> Res {
    match &cfg.command {
        Command::Characters(a) => characters(a),
        Command::Eval(a) => eval(a),
        Command::Moment(a) => moment(a),
        Command::Hl(a) => hl(a),
        Command::Sieve(a) => sieve(a, cfg.seed),
        Command::Gallagher(a) => gallagher(a, cfg.seed),
        Command::Meanvalue(a) => meanvalue(a, cfg.seed),
        Command::Zeros(a) => zeros(a, cfg),
        Command::Detector(a) => detector(a, cfg),
        Command::Zdbounds(a) => zdbounds(a),
        Command::Scaling(a) => scaling(a),
        Command::SquarePart(a) => square_part(a),
    }
}

fn character_table(records: &[CharacterRecord]) -> Table {
    let mut t = Table::new("characters", &["q", "exponents", "order", "parity", "conductor"]);
    for r in records {
        t.push(vec![r.q.to_string(), exps(&r.exponents), r.order.to_string(), r.parity.to_string(), r.conductor.to_string()]);
    }
    t
}

fn characters(a: &CharactersArgs) -> Res {
    let records = match (a.q, a.order, a.q_param) {
        (Some(q), None, None) => enumerate_characters(q)?.iter().map(DirichletCharacter::record).collect::<Vec<_>>(),
        (None, Some(j), Some(big_q)) => enumerate_family(j, big_q)?.records(),
        _ => return Err(CliError::Usage("give either --q, or both --order and --Q".into())),
    };
    Ok(Outcome { result: json!({ "count": records.len(), "characters": records }), tables: vec![character_table(&records)] })
}

fn eval(a: &EvalArgs) -> Res {
    let chi = character(&a.character)?;
    let s = SPoint::new(a.sigma, a.t);
    let mut results: Vec<EvalResult> = Vec::new();
    if matches!(a.method, EvalMethod::Oracle | EvalMethod::Both) {
        results.push(l_value_oracle(s, &chi)?);
    }
    if matches!(a.method, EvalMethod::Afe | EvalMethod::Both) {
        results.push(l_value_afe(s, &chi, a.tol)?);
    }
    let difference = (results.len() == 2).then(|| (results[0].value - results[1].value).norm());
    let mut t = Table::new("eval", &["method", "re", "im", "abs_error_bound", "terms_used"]);
    for r in &results {
        let method = to_value(&r.method).as_str().unwrap_or_default().to_string();
        t.push(vec![method, f(r.value.re), f(r.value.im), f(r.abs_error_bound), r.terms_used.to_string()]);
    }
    Ok(Outcome {
        result: json!({ "character": chi.record(), "s": s, "values": results, "difference": difference }),
        tables: vec![t],
    })
}

fn moment_table(reports: &[MomentReport]) -> Table {
    let mut t = Table::new(
        "moments",
        &["j", "Q", "T", "t", "k", "delta", "value", "quadrature_error", "family_size", "integrated_comparison"],
    );
    for r in reports {
        t.push(vec![
            r.j.to_string(),
            f(r.q_param),
            opt(r.t_max),
            opt(r.t),
            r.power.to_string(),
            opt(r.delta),
            f(r.value),
            f(r.quadrature_error),
            r.family_size.to_string(),
            opt(r.integrated_comparison),
        ]);
    }
    t
}

fn moment(a: &MomentArgs) -> Res {
    let reports = match a.mode {
        MomentMode::FixedT => vec![family_moment_fixed_t(a.order, a.q_param, a.t, a.k)?],
        MomentMode::Integrated => {
            let opts = MomentOptions { tol: a.tol, ..MomentOptions::default() };
            integrated_family_moment_nested(a.order, a.q_param, &a.t_max, a.k, &opts)?
        }
        MomentMode::Discrete => {
            let family = enumerate_family(a.order, a.q_param)?;
            let mut out = Vec::new();
            for &t_max in &a.t_max {
                let sets: BTreeMap<CharacterKey, WellSpacedSet> = family
                    .members
                    .par_iter()
                    .map(|chi| Ok((chi.key(), generate_wellspaced(chi, t_max, a.delta, strategy(a.strategy))?)))
                    .collect::<Result<_, Error>>()?;
                out.push(discrete_family_moment(a.order, a.q_param, &sets, a.k, Some(a.tol))?);
            }
            out
        }
    };
    Ok(Outcome { result: json!({ "moments": reports }), tables: vec![moment_table(&reports)] })
}

fn hl(a: &HlArgs) -> Res {
    let reports = a.t_max.iter().map(|&t| hardy_littlewood_second_moment(t, a.tol)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "hardy_littlewood",
        &["T", "value", "quadrature_error", "main_term_ratio", "refined_main_term", "refined_ratio"],
    );
    for r in &reports {
        t.push(vec![
            f(r.t_max),
            f(r.value),
            f(r.quadrature_error),
            f(r.main_term_ratio),
            f(r.refined_main_term),
            f(r.refined_ratio),
        ]);
    }
    Ok(Outcome { result: json!({ "second_moments": reports }), tables: vec![t] })
}

fn sieve(a: &SieveArgs, seed: u64) -> Res {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let reports: Vec<SieveReport> = (0..a.trials)
        .into_par_iter()
        .map(|i| {
            let coeffs = CoefficientVector::random_unit(a.n_param, seed.wrapping_add(i))?;
            match a.mode {
                SieveModeArg::Discrete => sieve_lhs_discrete(a.order, a.q_param, &coeffs),
                SieveModeArg::Integrated => sieve_lhs_integrated(a.order, a.q_param, a.t_max, &coeffs),
            }
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new("sieve", &["seed", "j", "Q", "T", "N", "lhs", "norm", "delta_bound", "ratio", "family_size"]);
    for r in &reports {
        t.push(vec![
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.j.to_string(),
            f(r.q_param),
            f(r.t_max),
            f(r.n_param),
            f(r.lhs),
            f(r.norm),
            f(r.delta_bound),
            f(r.ratio),
            r.family_size.to_string(),
        ]);
    }
    let max_ratio = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome { result: json!({ "trials": reports, "max_ratio": max_ratio }), tables: vec![t] })
}

fn gallagher(a: &GallagherArgs, seed: u64) -> Res {
    let chi = character(&a.character)?;
    let func = match a.function {
        GallagherTarget::L => GallagherFunction::LOnCriticalLine(chi.clone()),
        GallagherTarget::Poly => GallagherFunction::DirichletPoly {
            character: Some(chi.clone()),
            terms: random_unit_polynomial(a.n_param, seed)?.into_iter().collect(),
        },
    };
    let set = generate_wellspaced(&chi, a.t_max, a.delta, strategy(a.strategy))?;
    let r = gallagher_check(&func, a.t_max, a.delta, &set)?;
    let mut t = Table::new("gallagher", &["T", "delta", "points", "lhs", "rhs", "holds", "f_squared", "derivative_squared"]);
    t.push(vec![
        f(a.t_max),
        f(a.delta),
        r.points.to_string(),
        f(r.lhs),
        f(r.rhs),
        r.holds.to_string(),
        f(r.energy.f_squared),
        f(r.energy.derivative_squared),
    ]);
    Ok(Outcome { result: json!({ "character": chi.record(), "points": set.points(), "check": r }), tables: vec![t] })
}

fn meanvalue(a: &MeanValueArgs, seed: u64) -> Res {
    let family = enumerate_family(a.order, a.q_param)?;
    let coeffs = random_unit_polynomial(a.n_param, seed)?;
    let sets = random_point_sets(family.len(), a.t_max, a.delta, a.points, a.sigma0, seed.wrapping_add(1))?;
    let r = meanvalue_check(a.order, a.q_param, a.t_max, a.delta, &sets, &coeffs, a.n_param, a.sigma0)?;
    let mut t = Table::new(
        "meanvalue",
        &["j", "Q", "T", "N", "delta", "sigma0", "lhs", "weighted_norm", "pairs", "rhs_delta", "rhs_pairs", "ratio_delta", "ratio_pairs"],
    );
    t.push(vec![
        r.j.to_string(),
        f(r.q_param),
        f(r.t_max),
        f(r.n_param),
        f(r.delta),
        f(r.sigma0),
        f(r.lhs),
        f(r.weighted_norm),
        r.pairs.to_string(),
        f(r.rhs_delta),
        f(r.rhs_pairs),
        opt(r.ratio_delta),
        opt(r.ratio_pairs),
    ]);
    Ok(Outcome { result: to_value(&r), tables: vec![t] })
}

/// Critical-line zeros of `χ` up to `T`, read from or written to the cache.
fn cached_zeros(chi: &DirichletCharacter, t_max: f64, cfg: &RunConfig) -> Result<Vec<CriticalZero>, CliError> {
    let cache = cfg.cache_dir.as_ref().map(Cache::new);
    let key = format!("{}|T={t_max}|grid={ZERO_GRID_VERSION}", chi.key());
    if let Some(hit) = cache.as_ref().and_then(|c| c.load("zeros", &key)) {
        if let Ok(zeros) = serde_json::from_slice(&hit) {
            return Ok(zeros);
        }
    }
    let zeros = critical_line_zeros(chi, t_max)?;
    if let Some(c) = &cache {
        c.store("zeros", &key, &serde_json::to_vec(&zeros).expect("zeros serialize"))?;
    }
    Ok(zeros)
}

fn zero_table(zeros: &[CriticalZero]) -> Table {
    let mut t = Table::new("zeros", &["character", "gamma", "width", "abs_l"]);
    for z in zeros {
        t.push(vec![z.character.to_string(), f(z.gamma), f(z.width), f(z.abs_l)]);
    }
    t
}

fn count_table(reports: &[ZeroCountReport]) -> Table {
    let mut t = Table::new("zero_counts", &["character", "sigma", "T", "count", "winding_residual", "evaluations", "rerun_count"]);
    for r in reports {
        t.push(vec![
            r.character.to_string(),
            f(r.sigma),
            f(r.t_max),
            r.count.to_string(),
            f(r.winding_residual),
            r.evaluations.to_string(),
            r.rerun_count.to_string(),
        ]);
    }
    t
}

fn zeros(a: &ZerosArgs, cfg: &RunConfig) -> Res {
    let members: Vec<DirichletCharacter> = match (a.q, a.order, a.q_param) {
        (Some(q), None, None) => vec![DirichletCharacter::new(q, &a.chi)?],
        (None, Some(j), Some(big_q)) => enumerate_family(j, big_q)?.members,
        _ => return Err(CliError::Usage("give --q with --chi, or both --order and --Q".into())),
    };
    match a.mode {
        ZerosMode::Count => {
            if let (Some(j), Some(big_q)) = (a.order, a.q_param) {
                let r = family_zero_count(j, big_q, a.sigma, a.t_max)?;
                let tables = vec![count_table(&r.per_character)];
                return Ok(Outcome { result: to_value(&r), tables });
            }
            let r = count_zeros_rectangle(&members[0], a.sigma, a.t_max, 1e-12)?;
            Ok(Outcome { tables: vec![count_table(std::slice::from_ref(&r))], result: to_value(&r) })
        }
        ZerosMode::List => {
            let lists: Vec<Vec<CriticalZero>> =
                members.par_iter().map(|chi| cached_zeros(chi, a.t_max, cfg)).collect::<Result<_, _>>()?;
            let all: Vec<CriticalZero> = lists.into_iter().flatten().collect();
            Ok(Outcome { result: json!({ "T": a.t_max, "zeros": all }), tables: vec![zero_table(&all)] })
        }
    }
}

fn detector(a: &DetectorArgs, cfg: &RunConfig) -> Res {
    let chi = character(&a.character)?;
    let mut zeros: Vec<CriticalZero> = cached_zeros(&chi, a.t_max, cfg)?.into_iter().filter(|z| z.gamma > 0.0).collect();
    if a.spacing_c > 0.0 {
        zeros = spaced_zeros(&zeros, chi.modulus(), a.t_max, a.spacing_c);
    }
    zeros.truncate(a.zeros);
    let reports = zeros.par_iter().map(|z| detector_check(&chi, z, a.x, a.y, a.c)).collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(
        "detector",
        &["gamma", "r1_value", "r2_value", "identity_residual", "quadrature_error", "class"],
    );
    for r in &reports {
        let class = to_value(&r.class).as_str().unwrap_or_default().to_string();
        t.push(vec![f(r.zero.gamma), f(r.r1_value), f(r.r2_value), f(r.identity_residual), f(r.quadrature_error), class]);
    }
    Ok(Outcome { result: json!({ "character": chi.record(), "detections": reports }), tables: vec![t] })
}

fn zdbounds(a: &ZdBoundsArgs) -> Res {
    let b = zero_density_bounds(a.sigma, a.q_param, a.t_max)?;
    let mut t = Table::new("zero_density_bounds", &["bound", "value"]);
    for (name, v) in b.named() {
        t.push(vec![name.to_string(), f(v)]);
    }
    Ok(Outcome { result: to_value(&b), tables: vec![t] })
}

fn scaling(a: &ScalingArgs) -> Res {
    let mut ts = a.t_values.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let cells: Vec<(u64, f64)> = a.order.iter().flat_map(|&j| a.q_values.iter().map(move |&q| (j, q))).collect();
    let opts = MomentOptions { tol: a.tol, ..MomentOptions::default() };
    let results: Vec<Vec<MomentReport>> = cells
        .par_iter()
        .map(|&(j, q)| integrated_family_moment_nested(j, q, &ts, a.k, &opts))
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(
        "cells",
        &["j", "Q", "T", "value", "quadrature_error", "family_size", "t_ge_q_one_fifth"],
    );
    let mut cell_values = Vec::new();
    for r in results.iter().flatten() {
        let t_max = r.t_max.expect("integrated reports carry T");
        let flag = t_max >= r.q_param.powf(0.2);
        t.push(vec![
            r.j.to_string(),
            f(r.q_param),
            f(t_max),
            f(r.value),
            f(r.quadrature_error),
            r.family_size.to_string(),
            flag.to_string(),
        ]);
        cell_values.push(json!({
            "j": r.j, "Q": r.q_param, "T": t_max, "value": r.value,
            "quadrature_error": r.quadrature_error, "family_size": r.family_size, "t_ge_q_one_fifth": flag,
        }));
    }
    let mut fits = Vec::new();
    let mut ft = Table::new("fits", &["j", "constant", "alpha", "beta", "max_residual"]);
    for &j in &a.order {
        let samples: Vec<ScalingSample> = results
            .iter()
            .flatten()
            .filter(|r| r.j == j)
            .map(|r| ScalingSample { q_param: r.q_param, t_max: r.t_max.expect("integrated reports carry T"), value: r.value })
            .collect();
        let fit = exponent_fit(&samples)?;
        ft.push(vec![j.to_string(), f(fit.constant), f(fit.alpha), f(fit.beta), f(fit.max_residual)]);
        fits.push(json!({ "j": j, "constant": fit.constant, "alpha": fit.alpha, "beta": fit.beta, "max_residual": fit.max_residual }));
    }
    Ok(Outcome { result: json!({ "k": a.k, "cells": cell_values, "fits": fits }), tables: vec![t, ft] })
}

fn square_part(a: &SquarePartArgs) -> Res {
    let r = square_part_comparison(a.order, a.q_param, a.t_max, a.t, a.epsilon)?;
    let mut t = Table::new("square_part", &["j", "Q", "T", "t", "epsilon", "N", "lhs", "rhs", "ratio", "degenerate", "family_size"]);
    t.push(vec![
        r.j.to_string(),
        f(r.q_param),
        f(r.t_max),
        f(r.t),
        f(r.epsilon),
        f(r.n_param),
        f(r.lhs),
        f(r.rhs),
        opt(r.ratio),
        r.degenerate.to_string(),
        r.family_size.to_string(),
    ]);
    Ok(Outcome { result: to_value(&r), tables: vec![t] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(argv: &[&str]) -> Outcome {
        let mut full = vec!["lfam", "--no-timing"];
        full.extend_from_slice(argv);
        run(&RunConfig::parse(full).unwrap()).unwrap()
    }

    #[test]
    fn characters_family_example() {
        let o = outcome(&["characters", "--order", "3", "--Q", "6"]);
        let qs: Vec<&str> = o.tables[0].rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(qs, ["7", "7", "9", "9"]);
    }

    #[test]
    fn eval_example() {
        let o = outcome(&["eval", "--q", "4", "--chi", "1", "--sigma", "0.5", "--t", "0"]);
        for v in o.result["values"].as_array().unwrap() {
            let re = v["value"][0].as_f64().unwrap();
            assert!((re - 0.6676914571).abs() < 1e-9, "{v}");
        }
        assert_eq!(o.tables[0].rows.len(), 2);
    }

    #[test]
    fn zdbounds_example() {
        let o = outcome(&["zdbounds", "--sigma", "0.75", "--Q", "10", "--T", "10"]);
        let v = o.result["quadratic_second_moment"].as_f64().unwrap();
        assert!((v - 21.54).abs() < 0.01, "{v}");
    }

    #[test]
    fn zero_list_cache_hit_matches() {
        let dir = tempfile::tempdir().unwrap();
        let argv = ["lfam", "--no-timing", "--cache-dir", dir.path().to_str().unwrap(), "zeros", "--mode", "list", "--q", "5", "--chi", "1", "--T", "10"];
        let cfg = RunConfig::parse(argv).unwrap();
        let first = run(&cfg).unwrap();
        assert!(std::fs::read_dir(dir.path().join("zeros")).unwrap().count() == 1);
        let second = run(&cfg).unwrap();
        assert_eq!(first.result, second.result);
    }
}
