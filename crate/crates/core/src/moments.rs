//! Family moments of `L(½ + it, χ)`: fixed height, integrated, and over
//! well-spaced sets; the second moment of `ζ`; least-squares exponent fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::squarefree_decompose;
use crate::characters::{enumerate_family, CharacterKey, CharacterRecord, DirichletCharacter};
use crate::error::{Error, Result};
use crate::lfunc::{dirichlet_polynomial_sparse, l_value_afe, l_value_oracle_with, EvalResult, HurwitzOptions, SPoint};
use crate::quad::{check_total, combine, integrate_segments, QuadOptions, QuadResult};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative slack allowed when checking gaps of well-spaced sets built on floating grids.
pub const SPACING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOptions {
    /// Relative quadrature tolerance.
    pub tol: f64,
    /// Absolute tolerance for each `L`-value.
    pub l_tol: f64,
    /// Overrides the initial panel width.
    pub panel_width: Option<f64>,
    pub max_depth: u32,
}

impl Default for MomentOptions {
    fn default() -> Self {
        MomentOptions { tol: 1e-8, l_tol: 1e-12, panel_width: None, max_depth: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterMoment {
    pub character: CharacterRecord,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub j: u64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    /// Integration half-length `T`, or the common `T` of the point sets.
    #[serde(rename = "T")]
    pub t_max: Option<f64>,
    /// Height for fixed-`t` moments.
    pub t: Option<f64>,
    /// The exponent `2k`.
    pub power: u32,
    pub delta: Option<f64>,
    pub value: f64,
    pub quadrature_error: f64,
    pub family_size: usize,
    pub per_character: Vec<CharacterMoment>,
    /// `(δ^{-1} + 1) ×` the integrated moment, for discrete moments.
    pub integrated_comparison: Option<f64>,
}

/// `|L(½ + it, χ)|^{2k}` with a first-order error bound.
fn character_power(chi: &DirichletCharacter, t: f64, k: u32, l_tol: f64) -> Result<(f64, f64)> {
    let EvalResult { value, abs_error_bound, .. } = l_value_afe(SPoint::critical(t), chi, l_tol)?;
    let m = value.norm();
    let v = m.powi(2 * k as i32);
    let err = 2.0 * k as f64 * m.max(abs_error_bound).powi(2 * k as i32 - 1) * abs_error_bound;
    Ok((v, err))
}

fn check_power(k: u32) -> Result<()> {
    if k == 0 {
        Err(Error::Domain("moment power k must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// `Σ_{χ ∈ O_j(Q)} |L(½ + it, χ)|^{2k}`.
pub fn family_moment_fixed_t(j: u64, q_param: f64, t: f64, k: u32) -> Result<MomentReport> {
    check_power(k)?;
    let family = enumerate_family(j, q_param)?;
    let l_tol = MomentOptions::default().l_tol;
    let rows: Vec<(f64, f64)> = family
        .members
        .par_iter()
        .map(|chi| character_power(chi, t, k, l_tol))
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut per_character = Vec::with_capacity(rows.len());
    for (chi, (v, e)) in family.members.iter().zip(rows) {
        value += v;
        error += e;
        per_character.push(CharacterMoment { character: chi.record(), value: v, error: e });
    }
    Ok(MomentReport {
        j,
        q_param,
        t_max: None,
        t: Some(t),
        power: 2 * k,
        delta: None,
        value,
        quadrature_error: error,
        family_size: family.len(),
        per_character,
        integrated_comparison: None,
    })
}

/// Default initial panel width `min(0.25, π / log(q (T + 3)))`.
pub fn default_panel_width(q: u64, t_max: f64) -> f64 {
    0.25f64.min(PI / (q as f64 * (t_max + 3.0)).ln())
}

/// `Σ_χ ∫_{-T}^{T} |L(½ + it, χ)|^{2k} dt`.
pub fn integrated_family_moment(j: u64, q_param: f64, t_max: f64, k: u32, tol: f64) -> Result<MomentReport> {
    let opts = MomentOptions { tol, ..MomentOptions::default() };
    Ok(integrated_family_moment_nested(j, q_param, &[t_max], k, &opts)?.remove(0))
}

/// Integrated moments for several `T` from one pass over `[-T_max, T_max]`.
///
/// Each `±T_i` is a panel edge, so every returned value integrates exactly
/// over its own interval. Conjugate characters share one integral, since
/// `|L(½ + it, χ̄)| = |L(½ - it, χ)|`.
pub fn integrated_family_moment_nested(
    j: u64,
    q_param: f64,
    ts: &[f64],
    k: u32,
    opts: &MomentOptions,
) -> Result<Vec<MomentReport>> {
    check_power(k)?;
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0 && t.is_finite())) || ts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("T values must be positive and strictly increasing".into()));
    }
    let family = enumerate_family(j, q_param)?;
    let members = &family.members;
    let mut reps: Vec<usize> = Vec::new();
    let mut rep_of = vec![0usize; members.len()];
    for (i, chi) in members.iter().enumerate() {
        let conj = chi.conjugate();
        match reps.iter().position(|&r| members[r] == conj) {
            Some(slot) => rep_of[i] = slot,
            None => {
                rep_of[i] = reps.len();
                reps.push(i);
            }
        }
    }
    let t_top = *ts.last().expect("nonempty");
    let qmax = members.iter().map(|c| c.modulus()).max().unwrap_or(3);
    let width = opts.panel_width.unwrap_or_else(|| default_panel_width(qmax, t_top));
    let mut edges: Vec<f64> = ts.iter().rev().map(|t| -t).collect();
    edges.extend_from_slice(ts);
    let quad_opts = QuadOptions { rel_tol: opts.tol, abs_tol: 0.0, max_depth: opts.max_depth };
    let segments = if reps.is_empty() {
        Vec::new()
    } else {
        let integrand = |t: f64| -> Result<Vec<f64>> {
            reps.iter()
                .map(|&r| character_power(&members[r], t, k, opts.l_tol).map(|(v, _)| v))
                .collect()
        };
        integrate_segments(&integrand, &edges, width, reps.len(), &quad_opts)?
    };
    let n = ts.len();
    let mut reports = Vec::with_capacity(n);
    for (i, &t_max) in ts.iter().enumerate() {
        let total = if segments.is_empty() {
            QuadResult { value: Vec::new(), error: 0.0, component_errors: Vec::new(), evaluations: 0 }
        } else {
            // segments n-1-i ..= n-1+i cover [-T_i, T_i]
            combine(&segments[n - 1 - i..n + i])
        };
        if !segments.is_empty() {
            check_total(&total, &quad_opts).map_err(|e| e.context(format!("integrated moment at T={t_max}")))?;
        }
        let mut value = 0.0;
        let mut error = 0.0;
        let mut per_character = Vec::with_capacity(members.len());
        for (m, chi) in members.iter().enumerate() {
            let v = total.value[rep_of[m]];
            let e = total.component_errors[rep_of[m]];
            value += v;
            error += e;
            per_character.push(CharacterMoment { character: chi.record(), value: v, error: e });
        }
        reports.push(MomentReport {
            j,
            q_param,
            t_max: Some(t_max),
            t: None,
            power: 2 * k,
            delta: None,
            value,
            quadrature_error: error,
            family_size: members.len(),
            per_character,
            integrated_comparison: None,
        });
    }
    Ok(reports)
}

/// A finite set of heights with pairwise gaps at least `δ`, inside `[δ/2 - T, T - δ/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellSpacedSet {
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    points: Vec<f64>,
}

impl WellSpacedSet {
    pub fn new(delta: f64, t_max: f64, mut points: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) || !(t_max >= delta) {
            return Err(Error::Domain(format!("well-spaced set needs T >= δ > 0, got T={t_max}, δ={delta}")));
        }
        points.sort_by(|a, b| a.total_cmp(b));
        let (lo, hi) = (0.5 * delta - t_max, t_max - 0.5 * delta);
        let slack = SPACING_SLACK * t_max.max(1.0);
        if let Some(p) = points.iter().find(|&&p| !(p >= lo - slack && p <= hi + slack)) {
            return Err(Error::Domain(format!("point {p} outside [{lo}, {hi}]")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] - w[0] < delta * (1.0 - SPACING_SLACK)) {
            return Err(Error::Domain(format!("points {} and {} are closer than δ = {delta}", w[0], w[1])));
        }
        Ok(WellSpacedSet { delta, t_max, points })
    }

    pub fn empty(delta: f64, t_max: f64) -> Result<Self> {
        Self::new(delta, t_max, Vec::new())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N_δ(t) = #{t' : |t - t'| < δ}`.
    pub fn neighbour_count(&self, t: f64) -> usize {
        self.points.iter().filter(|&&u| (t - u).abs() < self.delta).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingStrategy {
    Grid,
    GreedyLocalMaxima,
}

/// Points `δ/2 - T + iδ` up to `T - δ/2`.
fn grid_points(t_max: f64, delta: f64) -> Vec<f64> {
    let lo = 0.5 * delta - t_max;
    let hi = t_max - 0.5 * delta;
    let count = ((hi - lo) / delta * (1.0 + 1e-12)).floor() as usize;
    (0..=count).map(|i| lo + i as f64 * delta).filter(|&p| p <= hi + 1e-12).collect()
}

/// Builds a well-spaced set for `χ`; the greedy strategy keeps the largest local
/// maxima of `|L(½ + it, χ)|` on a grid of step `δ/10`.
pub fn generate_wellspaced(
    chi: &DirichletCharacter,
    t_max: f64,
    delta: f64,
    strategy: SpacingStrategy,
) -> Result<WellSpacedSet> {
    if !(delta > 0.0) || !(t_max >= delta) {
        return Err(Error::Domain(format!("need T >= δ > 0, got T={t_max}, δ={delta}")));
    }
    match strategy {
        SpacingStrategy::Grid => WellSpacedSet::new(delta, t_max, grid_points(t_max, delta)),
        SpacingStrategy::GreedyLocalMaxima => {
            let l_tol = MomentOptions::default().l_tol;
            let grid = grid_points(t_max, delta / 10.0)
                .into_iter()
                .filter(|&t| t >= 0.5 * delta - t_max && t <= t_max - 0.5 * delta)
                .collect::<Vec<_>>();
            let values: Vec<f64> = grid
                .par_iter()
                .map(|&t| l_value_afe(SPoint::critical(t), chi, l_tol).map(|r| r.value.norm()))
                .collect::<Result<_>>()?;
            let mut peaks: Vec<(f64, f64)> = (0..grid.len())
                .filter(|&i| {
                    let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
                    let right = if i + 1 < grid.len() { values[i + 1] } else { f64::NEG_INFINITY };
                    values[i] >= left && values[i] >= right
                })
                .map(|i| (values[i], grid[i]))
                .collect();
            peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
            let mut chosen: Vec<f64> = Vec::new();
            for (_, t) in peaks {
                if chosen.iter().all(|&u| (u - t).abs() >= delta) {
                    chosen.push(t);
                }
            }
            WellSpacedSet::new(delta, t_max, chosen)
        }
    }
}

/// `Σ_χ Σ_{t ∈ 𝒯_χ} |L(½ + it, χ)|^{2k}`; characters without a set contribute nothing.
///
/// With `comparison_tol`, the report also carries `(δ^{-1} + 1)` times the
/// integrated moment over `[-T, T]`.
pub fn discrete_family_moment(
    j: u64,
    q_param: f64,
    sets: &BTreeMap<CharacterKey, WellSpacedSet>,
    k: u32,
    comparison_tol: Option<f64>,
) -> Result<MomentReport> {
    check_power(k)?;
    let mut params: Option<(f64, f64)> = None;
    for (key, set) in sets {
        WellSpacedSet::new(set.delta, set.t_max, set.points.clone()).map_err(|e| e.context(key))?;
        match params {
            None => params = Some((set.delta, set.t_max)),
            Some((d, t)) if d != set.delta || t != set.t_max => {
                return Err(Error::Domain(format!("set for {key} has (δ, T) = ({}, {}), expected ({d}, {t})", set.delta, set.t_max)));
            }
            _ => {}
        }
    }
    let family = enumerate_family(j, q_param)?;
    let l_tol = MomentOptions::default().l_tol;
    let rows: Vec<(f64, f64)> = family
        .members
        .par_iter()
        .map(|chi| -> Result<(f64, f64)> {
            let mut value = 0.0;
            let mut error = 0.0;
            if let Some(set) = sets.get(&chi.key()) {
                for &t in set.points() {
                    let (v, e) = character_power(chi, t, k, l_tol)?;
                    value += v;
                    error += e;
                }
            }
            Ok((value, error))
        })
        .collect::<Result<_>>()?;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut per_character = Vec::with_capacity(rows.len());
    for (chi, (v, e)) in family.members.iter().zip(rows) {
        value += v;
        error += e;
        per_character.push(CharacterMoment { character: chi.record(), value: v, error: e });
    }
    let integrated_comparison = match (comparison_tol, params) {
        (Some(tol), Some((delta, t_max))) => {
            let integrated = integrated_family_moment(j, q_param, t_max, k, tol)?;
            Some((1.0 / delta + 1.0) * integrated.value)
        }
        _ => None,
    };
    Ok(MomentReport {
        j,
        q_param,
        t_max: params.map(|p| p.1),
        t: None,
        power: 2 * k,
        delta: params.map(|p| p.0),
        value,
        quadrature_error: error,
        family_size: family.len(),
        per_character,
        integrated_comparison,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyLittlewoodReport {
    #[serde(rename = "T")]
    pub t_max: f64,
    pub value: f64,
    pub quadrature_error: f64,
    /// `value / (T log T)`.
    pub main_term_ratio: f64,
    /// `T (log(T/2π) + 2γ - 1)`.
    pub refined_main_term: f64,
    pub refined_ratio: f64,
}

/// Largest `T` accepted by [`hardy_littlewood_second_moment`].
pub const HL_T_CAP: f64 = 500.0;

/// `∫_a^b |ζ(½ + it)|² dt`.
pub fn zeta_second_moment_interval(a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(0.0 <= a && a <= b && b <= HL_T_CAP) {
        return Err(Error::Domain(format!("need 0 <= a <= b <= {HL_T_CAP}, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: vec![0.0], error: 0.0, component_errors: vec![0.0], evaluations: 0 });
    }
    let zeta = DirichletCharacter::principal(1)?;
    let hopts = HurwitzOptions { t_cap: HL_T_CAP, ..HurwitzOptions::default() };
    let integrand = |t: f64| -> Result<Vec<f64>> {
        Ok(vec![l_value_oracle_with(SPoint::critical(t), &zeta, &hopts)?.value.norm_sqr()])
    };
    let width = 0.25f64.min(PI / (b + 3.0).ln());
    let quad_opts = QuadOptions { rel_tol: tol, abs_tol: 0.0, max_depth: 12 };
    let result = combine(&integrate_segments(&integrand, &[a, b], width, 1, &quad_opts)?);
    check_total(&result, &quad_opts)?;
    Ok(result)
}

/// `∫_0^T |ζ(½ + it)|² dt` against `T log T` and the refined main term.
pub fn hardy_littlewood_second_moment(t_max: f64, tol: f64) -> Result<HardyLittlewoodReport> {
    if !(t_max >= 0.0 && t_max <= HL_T_CAP) {
        return Err(Error::Domain(format!("T must lie in [0, {HL_T_CAP}], got {t_max}")));
    }
    let r = zeta_second_moment_interval(0.0, t_max, tol)?;
    let value = r.value[0];
    let refined = refined_main_term(t_max);
    let ratio = |d: f64| if d != 0.0 { value / d } else { 0.0 };
    Ok(HardyLittlewoodReport {
        t_max,
        value,
        quadrature_error: r.error,
        main_term_ratio: ratio(t_max * t_max.ln()),
        refined_main_term: refined,
        refined_ratio: ratio(refined),
    })
}

/// `T (log(T/2π) + 2γ - 1)`.
pub fn refined_main_term(t_max: f64) -> f64 {
    if t_max == 0.0 {
        return 0.0;
    }
    t_max * ((t_max / (2.0 * PI)).ln() + 2.0 * EULER_GAMMA - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    #[serde(rename = "Q")]
    pub q_param: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub samples: Vec<ScalingSample>,
    pub constant: f64,
    /// Exponent of `Q`.
    pub alpha: f64,
    /// Exponent of `T`.
    pub beta: f64,
    /// Largest `|log value - fitted|`.
    pub max_residual: f64,
}

/// Least-squares fit of `log value ≈ c + α log Q + β log T`.
pub fn exponent_fit(samples: &[ScalingSample]) -> Result<ScalingFit> {
    let distinct = |f: fn(&ScalingSample) -> f64| {
        let mut v: Vec<f64> = samples.iter().map(f).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v.len()
    };
    if samples.len() < 4 || distinct(|s| s.q_param) < 2 || distinct(|s| s.t_max) < 2 {
        return Err(Error::Domain("exponent fit needs >= 4 samples over >= 2 values of Q and of T".into()));
    }
    if let Some(s) = samples.iter().find(|s| !(s.value > 0.0 && s.q_param > 0.0 && s.t_max > 0.0)) {
        return Err(Error::Domain(format!("sample {s:?} is not positive")));
    }
    let n = samples.len();
    let design = DMatrix::from_fn(n, 3, |i, c| match c {
        0 => 1.0,
        1 => samples[i].q_param.ln(),
        _ => samples[i].t_max.ln(),
    });
    let rhs = DVector::from_iterator(n, samples.iter().map(|s| s.value.ln()));
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(Error::Domain("degenerate design matrix in exponent fit".into()));
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|e| Error::Internal(e.to_string()))?;
    let fitted = &design * &coef;
    let max_residual = (fitted - &rhs).amax();
    Ok(ScalingFit {
        samples: samples.to_vec(),
        constant: coef[0],
        alpha: coef[1],
        beta: coef[2],
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquarePartReport {
    pub j: u64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub t: f64,
    pub epsilon: f64,
    /// `N = (QT)^{½+ε}`.
    pub n_param: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub family_size: usize,
}

/// Blocks `(ℓ, lo, hi)` with integer ranges `lo < n ≤ hi` equal to `N ℓ^{-2} < n ≤ 2N ℓ^{-2}`, for `ℓ ≤ √(2N)`.
pub fn square_part_blocks(n_param: f64) -> Vec<(u64, u64, u64)> {
    if !(n_param >= 1.0) {
        return Vec::new();
    }
    let lmax = (2.0 * n_param).sqrt().floor() as u64;
    (1..=lmax)
        .map(|l| {
            let l2 = (l * l) as f64;
            (l, (n_param / l2).floor() as u64, (2.0 * n_param / l2).floor() as u64)
        })
        .collect()
}

/// Both sides of the square-part decomposition bound at `σ = ½`.
pub fn square_part_comparison(j: u64, q_param: f64, t_max: f64, t: f64, epsilon: f64) -> Result<SquarePartReport> {
    if !(t.abs() <= t_max) {
        return Err(Error::Domain(format!("t = {t} outside [-T, T]")));
    }
    let family = enumerate_family(j, q_param)?;
    let n_param = (q_param * t_max).powf(0.5 + epsilon);
    let blocks = square_part_blocks(n_param);
    let s = SPoint::critical(t);
    let l_tol = MomentOptions::default().l_tol;
    let rows: Vec<(f64, f64)> = family
        .members
        .par_iter()
        .map(|chi| -> Result<(f64, f64)> {
            let lhs = l_value_afe(s, chi, l_tol)?.value.norm_sqr();
            let mut rhs = 0.0;
            for &(l, lo, hi) in &blocks {
                let terms = (lo + 1..=hi)
                    .filter(|&n| squarefree_decompose(n).map(|(_, r)| r == 1).unwrap_or(false))
                    .map(|n| (n, Complex64::new(1.0, 0.0)));
                rhs += dirichlet_polynomial_sparse(terms, s, Some(chi)).norm_sqr() / l as f64;
            }
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let lhs: f64 = rows.iter().map(|r| r.0).sum();
    let rhs: f64 = rows.iter().map(|r| r.1).sum();
    Ok(SquarePartReport {
        j,
        q_param,
        t_max,
        t,
        epsilon,
        n_param,
        lhs,
        rhs,
        ratio: (rhs > 0.0).then(|| lhs / rhs),
        degenerate: blocks.is_empty(),
        family_size: family.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::l_value_oracle;

    #[test]
    fn fixed_t_examples() {
        let empty = family_moment_fixed_t(3, 2.0, 0.0, 1).unwrap();
        assert_eq!((empty.value, empty.family_size), (0.0, 0));
        let r = family_moment_fixed_t(2, 2.0, 0.0, 1).unwrap();
        let chi3 = DirichletCharacter::new(3, &[1]).unwrap();
        let chi4 = DirichletCharacter::new(4, &[1]).unwrap();
        let s = SPoint::critical(0.0);
        let expected = l_value_oracle(s, &chi3).unwrap().value.norm_sqr() + l_value_oracle(s, &chi4).unwrap().value.norm_sqr();
        assert!((r.value - expected).abs() < 1e-10);
        let r2 = family_moment_fixed_t(2, 2.0, 0.0, 2).unwrap();
        let squared: f64 = r.per_character.iter().map(|c| c.value * c.value).sum();
        assert!((r2.value - squared).abs() < 1e-12 * squared);
    }

    #[test]
    fn small_t_limit() {
        let t = 1e-6;
        let r = integrated_family_moment(2, 2.0, t, 1, 1e-8).unwrap();
        let f = family_moment_fixed_t(2, 2.0, 0.0, 1).unwrap();
        assert!((r.value / (2.0 * t * f.value) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn nested_runs_are_monotone_and_match_single_runs() {
        let opts = MomentOptions::default();
        let nested = integrated_family_moment_nested(2, 10.0, &[5.0, 10.0, 20.0], 1, &opts).unwrap();
        assert!(nested[0].value <= nested[1].value && nested[1].value <= nested[2].value);
        let single = integrated_family_moment(2, 10.0, 10.0, 1, 1e-8).unwrap();
        assert!((single.value - nested[1].value).abs() <= 2.0 * (single.quadrature_error + nested[1].quadrature_error) + 1e-9 * single.value);
        assert!(single.quadrature_error <= 1e-8 * single.value);
    }

    #[test]
    fn cubic_family_matches_trapezoid() {
        let r = integrated_family_moment(3, 6.0, 10.0, 1, 1e-10).unwrap();
        assert_eq!(r.family_size, 4);
        let sum: f64 = r.per_character.iter().map(|c| c.value).sum();
        assert!((sum - r.value).abs() < 1e-12 * r.value);
        let family = enumerate_family(3, 6.0).unwrap();
        for (chi, row) in family.members.iter().zip(&r.per_character) {
            // composite trapezoid, step 1e-3, on the independent oracle path
            let steps = 20_000;
            let h = 20.0 / steps as f64;
            let mut acc = 0.0;
            for i in 0..=steps {
                let t = -10.0 + i as f64 * h;
                let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
                acc += w * l_value_oracle(SPoint::critical(t), chi).unwrap().value.norm_sqr();
            }
            let trap = acc * h;
            assert!((trap - row.value).abs() <= 1e-4 * row.value, "{}: {trap} vs {}", chi.key(), row.value);
        }
    }

    #[test]
    fn halving_panels_stays_within_error() {
        let base = MomentOptions { tol: 1e-8, ..MomentOptions::default() };
        let a = integrated_family_moment_nested(3, 6.0, &[8.0], 1, &base).unwrap().remove(0);
        let width = default_panel_width(12, 8.0) / 2.0;
        let b = integrated_family_moment_nested(3, 6.0, &[8.0], 1, &MomentOptions { panel_width: Some(width), ..base })
            .unwrap()
            .remove(0);
        assert!((a.value - b.value).abs() <= 2.0 * a.quadrature_error.max(1e-13 * a.value));
    }

    #[test]
    fn wellspaced_validation() {
        assert!(WellSpacedSet::new(1.0, 5.0, vec![0.0, 0.5]).is_err());
        assert!(WellSpacedSet::new(1.0, 5.0, vec![4.9]).is_err());
        assert!(WellSpacedSet::new(1.0, 5.0, vec![-4.5, 4.5]).is_ok());
        let grid = generate_wellspaced(&DirichletCharacter::new(5, &[1]).unwrap(), 5.0, 1.0, SpacingStrategy::Grid).unwrap();
        let expected: Vec<f64> = (0..10).map(|i| -4.5 + i as f64).collect();
        assert_eq!(grid.points(), expected.as_slice());
    }

    #[test]
    fn greedy_sets_are_spaced() {
        let chi = DirichletCharacter::new(5, &[1]).unwrap();
        let set = generate_wellspaced(&chi, 10.0, 0.5, SpacingStrategy::GreedyLocalMaxima).unwrap();
        assert!(!set.is_empty());
        assert!(set.points().windows(2).all(|w| w[1] - w[0] >= 0.5 * (1.0 - SPACING_SLACK)));
    }

    #[test]
    fn discrete_examples() {
        let sets = BTreeMap::new();
        let r = discrete_family_moment(2, 10.0, &sets, 1, None).unwrap();
        assert_eq!(r.value, 0.0);
        let family = enumerate_family(2, 10.0).unwrap();
        let singletons: BTreeMap<CharacterKey, WellSpacedSet> = family
            .members
            .iter()
            .map(|c| (c.key(), WellSpacedSet::new(1.0, 3.0, vec![0.7]).unwrap()))
            .collect();
        let d = discrete_family_moment(2, 10.0, &singletons, 1, None).unwrap();
        let f = family_moment_fixed_t(2, 10.0, 0.7, 1).unwrap();
        assert_eq!(d.value, f.value);
    }

    #[test]
    fn hardy_littlewood_basics() {
        assert_eq!(hardy_littlewood_second_moment(0.0, 1e-10).unwrap().value, 0.0);
        let whole = zeta_second_moment_interval(0.0, 100.0, 1e-10).unwrap();
        let left = zeta_second_moment_interval(0.0, 50.0, 1e-10).unwrap();
        let right = zeta_second_moment_interval(50.0, 100.0, 1e-10).unwrap();
        let tol = 1e-10 * whole.value[0];
        assert!((whole.value[0] - left.value[0] - right.value[0]).abs() <= 2.0 * tol);
    }

    #[test]
    fn fit_examples() {
        let mut samples = Vec::new();
        for q in [10.0, 20.0, 40.0] {
            for t in [10.0, 20.0, 40.0] {
                samples.push(ScalingSample { q_param: q, t_max: t, value: q * q * t * t * t });
            }
        }
        let fit = exponent_fit(&samples).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-10 && (fit.beta - 3.0).abs() < 1e-10);
        for s in &mut samples {
            s.value = 7.0;
        }
        let fit = exponent_fit(&samples).unwrap();
        assert!(fit.alpha.abs() < 1e-10 && fit.beta.abs() < 1e-10);
        let line: Vec<ScalingSample> = (1..=4).map(|i| ScalingSample { q_param: i as f64, t_max: i as f64, value: 1.0 }).collect();
        assert!(matches!(exponent_fit(&line), Err(Error::Domain(_))));
        assert!(exponent_fit(&samples[..3]).is_err());
    }

    #[test]
    fn square_part_blocks_partition() {
        let n_param = 37.3;
        let blocks = square_part_blocks(n_param);
        for m in 1..=(2.0 * n_param) as u64 {
            if squarefree_decompose(m).unwrap().1 != 1 {
                continue;
            }
            for &(l, lo, hi) in &blocks {
                let l2 = (l * l) as f64;
                let admitted = (m as f64) > n_param / l2 && (m as f64) <= 2.0 * n_param / l2;
                assert_eq!(m > lo && m <= hi, admitted, "n={m}, ℓ={l}");
            }
        }
        assert!(square_part_blocks(0.5).is_empty());
    }

    #[test]
    fn square_part_example() {
        let r = square_part_comparison(3, 6.0, 4.0, 0.0, 0.1).unwrap();
        assert!(r.lhs.is_finite() && r.rhs.is_finite() && r.rhs > 0.0);
        assert!(!r.degenerate);
        let d = square_part_comparison(2, 2.0, 0.25, 0.0, 0.0).unwrap();
        assert!(d.degenerate && d.rhs == 0.0 && d.ratio.is_none());
    }
}
