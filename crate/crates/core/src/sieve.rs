//! Large-sieve quantities for character families: the `Δ_j` bound formulas,
//! brute-force left-hand sides, and the Gallagher and mean-value inequalities.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::squarefree_decompose;
use crate::characters::{enumerate_family, DirichletCharacter};
use crate::error::{Error, Result};
use crate::lfunc::{l_value_and_derivative, l_value_oracle, SPoint};
use crate::moments::{default_panel_width, WellSpacedSet};
use crate::quad::{check_total, combine, integrate_segments, QuadOptions};

/// Relative slack in the Gallagher comparison.
pub const GALLAGHER_SLACK: f64 = 1e-6;

/// `Δ_j(Q, T, N)`, the minimum of the stated right-hand sides.
pub fn delta_bound(j: u64, q: f64, t: f64, n: f64) -> Result<f64> {
    if !(q >= 1.0 && t >= 1.0 && n >= 1.0) || !(q.is_finite() && t.is_finite() && n.is_finite()) {
        return Err(Error::Domain(format!("delta_bound needs Q, T, N >= 1, got ({q}, {t}, {n})")));
    }
    Ok(delta_bound_terms(j, q, t, n)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// The individual expressions whose minimum is `Δ_j`.
pub fn delta_bound_terms(j: u64, q: f64, t: f64, n: f64) -> Result<Vec<f64>> {
    let p = f64::powf;
    match j {
        2 => Ok(vec![q * t + n]),
        3 | 6 => Ok(vec![
            p(q, 5.0 / 3.0) * t + n,
            p(q, 4.0 / 3.0) * t + p(q, 0.5) * n,
            p(q, 11.0 / 9.0) * t + p(q, 2.0 / 3.0) * n,
            q * t + p(q, 1.0 / 3.0) * p(n, 5.0 / 3.0) * p(t, -2.0 / 3.0) + p(n, 12.0 / 5.0) * p(t, -7.0 / 5.0),
        ]),
        4 => Ok(vec![
            p(q, 1.5) * t + n,
            p(q, 1.25) * t + p(q, 0.5) * n,
            p(q, 7.0 / 6.0) * t + p(q, 2.0 / 3.0) * n,
            q * t + p(q, 1.0 / 3.0) * p(n, 5.0 / 3.0) * p(t, -2.0 / 3.0) + p(n, 7.0 / 3.0) * p(t, -4.0 / 3.0),
        ]),
        _ => Err(Error::Domain(format!("no Δ_j formula for j = {j}; supported: 2, 3, 4, 6"))),
    }
}

/// Coefficients `a_n` on squarefree `n ∈ (N, 2N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    #[serde(rename = "N")]
    pub n_param: f64,
    entries: BTreeMap<u64, Complex64>,
    pub seed: Option<u64>,
    norm: f64,
}

fn is_squarefree(n: u64) -> bool {
    squarefree_decompose(n).map(|(_, r)| r == 1).unwrap_or(false)
}

/// Squarefree integers in `(N, 2N]`.
pub fn squarefree_window(n_param: f64) -> Vec<u64> {
    let lo = n_param.floor() as u64 + 1;
    let hi = (2.0 * n_param).floor() as u64;
    (lo..=hi).filter(|&n| is_squarefree(n)).collect()
}

impl CoefficientVector {
    pub fn new(n_param: f64, entries: BTreeMap<u64, Complex64>) -> Result<Self> {
        Self::build(n_param, entries, None)
    }

    /// Unit-modulus entries with uniform phases on every squarefree `n ∈ (N, 2N]`.
    pub fn random_unit(n_param: f64, seed: u64) -> Result<Self> {
        if !(n_param >= 1.0 && n_param.is_finite()) {
            return Err(Error::Domain(format!("N must be >= 1, got {n_param}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = squarefree_window(n_param)
            .into_iter()
            .map(|n| (n, Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))))
            .collect();
        Self::build(n_param, entries, Some(seed))
    }

    fn build(n_param: f64, entries: BTreeMap<u64, Complex64>, seed: Option<u64>) -> Result<Self> {
        if !(n_param >= 1.0 && n_param.is_finite()) {
            return Err(Error::Domain(format!("N must be >= 1, got {n_param}")));
        }
        for (&n, a) in &entries {
            if !((n as f64) > n_param && (n as f64) <= 2.0 * n_param) {
                return Err(Error::Domain(format!("index {n} outside (N, 2N] for N = {n_param}")));
            }
            if !is_squarefree(n) {
                return Err(Error::Domain(format!("index {n} is not squarefree")));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Domain(format!("coefficient a_{n} is not finite")));
            }
        }
        let norm: f64 = entries.values().map(|a| a.norm_sqr()).sum();
        if !(norm > 0.0) {
            return Err(Error::Domain("coefficient vector has zero norm".into()));
        }
        Ok(CoefficientVector { n_param, entries, seed, norm })
    }

    pub fn entries(&self) -> &BTreeMap<u64, Complex64> {
        &self.entries
    }

    /// `Σ′ |a_n|²`.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SieveMode {
    Discrete,
    Integrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveReport {
    pub j: u64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    #[serde(rename = "N")]
    pub n_param: f64,
    pub lhs: f64,
    pub norm: f64,
    pub delta_bound: f64,
    /// `lhs / (norm · delta_bound)`.
    pub ratio: f64,
    pub mode: SieveMode,
    pub family_size: usize,
    pub seed: Option<u64>,
}

/// `∫_{-T}^{T} (n/m)^{it} dt`.
pub fn sieve_kernel(n: u64, m: u64, t_max: f64) -> f64 {
    if n == m {
        return 2.0 * t_max;
    }
    let x = (n as f64 / m as f64).ln();
    2.0 * (t_max * x).sin() / x
}

fn character_coefficients(chi: &DirichletCharacter, coeffs: &CoefficientVector) -> Vec<Complex64> {
    let q = chi.modulus();
    let table = chi.value_table();
    coeffs.entries.iter().map(|(&n, &a)| a * table[(n % q) as usize]).collect()
}

fn family_of(j: u64, q_param: f64) -> Result<Vec<DirichletCharacter>> {
    Ok(enumerate_family(j, q_param)?.members)
}

/// `Σ_{χ ∈ O_j(Q)} |Σ a_n χ(n)|²`, compared with `Δ_j(Q, 1, N) · norm`.
pub fn sieve_lhs_discrete(j: u64, q_param: f64, coeffs: &CoefficientVector) -> Result<SieveReport> {
    let bound = delta_bound(j, q_param.max(1.0), 1.0, coeffs.n_param)?;
    let family = family_of(j, q_param)?;
    let rows: Vec<f64> = family
        .par_iter()
        .map(|chi| character_coefficients(chi, coeffs).into_iter().sum::<Complex64>().norm_sqr())
        .collect();
    let lhs: f64 = rows.iter().sum();
    Ok(report(j, q_param, 1.0, coeffs, lhs, bound, SieveMode::Discrete, family.len()))
}

/// `Σ_χ ∫_{-T}^{T} |Σ a_n χ(n) n^{-it}|² dt` from the closed-form kernel.
pub fn sieve_lhs_integrated(j: u64, q_param: f64, t_max: f64, coeffs: &CoefficientVector) -> Result<SieveReport> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    let bound = delta_bound(j, q_param.max(1.0), t_max.max(1.0), coeffs.n_param)?;
    let family = family_of(j, q_param)?;
    let idx: Vec<u64> = coeffs.entries.keys().copied().collect();
    let kernel: Vec<Vec<f64>> = idx.iter().map(|&n| idx.iter().map(|&m| sieve_kernel(n, m, t_max)).collect()).collect();
    let rows: Vec<f64> = family
        .par_iter()
        .map(|chi| {
            let b = character_coefficients(chi, coeffs);
            let mut acc = 0.0;
            for (i, bi) in b.iter().enumerate() {
                let mut row = Complex64::new(0.0, 0.0);
                for (k, bk) in b.iter().enumerate() {
                    row += bk.conj() * kernel[i][k];
                }
                acc += (bi * row).re;
            }
            acc.max(0.0)
        })
        .collect();
    let lhs: f64 = rows.iter().sum();
    Ok(report(j, q_param, t_max, coeffs, lhs, bound, SieveMode::Integrated, family.len()))
}

#[allow(clippy::too_many_arguments)]
fn report(
    j: u64,
    q_param: f64,
    t_max: f64,
    coeffs: &CoefficientVector,
    lhs: f64,
    bound: f64,
    mode: SieveMode,
    family_size: usize,
) -> SieveReport {
    SieveReport {
        j,
        q_param,
        t_max,
        n_param: coeffs.n_param,
        lhs,
        norm: coeffs.norm,
        delta_bound: bound,
        ratio: lhs / (coeffs.norm * bound),
        mode,
        family_size,
        seed: coeffs.seed,
    }
}

/// The function `f(t)` in the Gallagher inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum GallagherFunction {
    /// `f(t) = L(½ + it, χ)`.
    LOnCriticalLine(DirichletCharacter),
    /// `f(t) = Σ a_n χ(n) n^{-it}`, with `χ` omitted for plain polynomials.
    DirichletPoly { character: Option<DirichletCharacter>, terms: Vec<(u64, Complex64)> },
}

impl GallagherFunction {
    fn poly_terms(character: &Option<DirichletCharacter>, terms: &[(u64, Complex64)]) -> Vec<(u64, Complex64)> {
        terms
            .iter()
            .map(|&(n, a)| (n, character.as_ref().map_or(a, |c| a * c.value(n as i64))))
            .filter(|(_, a)| *a != Complex64::new(0.0, 0.0))
            .collect()
    }

    fn value(&self, t: f64) -> Result<Complex64> {
        match self {
            GallagherFunction::LOnCriticalLine(chi) => Ok(l_value_oracle(SPoint::critical(t), chi)?.value),
            GallagherFunction::DirichletPoly { character, terms } => Ok(Self::poly_terms(character, terms)
                .into_iter()
                .map(|(n, a)| a * Complex64::from_polar(1.0, -t * (n as f64).ln()))
                .sum()),
        }
    }
}

/// `∫_{-T}^{T} |f|²` and `∫_{-T}^{T} |f'|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagherEnergy {
    #[serde(rename = "T")]
    pub t_max: f64,
    pub f_squared: f64,
    pub derivative_squared: f64,
    pub quadrature_error: f64,
}

pub fn gallagher_energy(f: &GallagherFunction, t_max: f64) -> Result<GallagherEnergy> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    match f {
        GallagherFunction::DirichletPoly { character, terms } => {
            let b = GallagherFunction::poly_terms(character, terms);
            let (mut f2, mut d2) = (0.0, 0.0);
            for &(n, a) in &b {
                for &(m, c) in &b {
                    let k = sieve_kernel(n, m, t_max);
                    let w = (a * c.conj()).re * k;
                    f2 += w;
                    d2 += w * (n as f64).ln() * (m as f64).ln();
                }
            }
            Ok(GallagherEnergy { t_max, f_squared: f2.max(0.0), derivative_squared: d2.max(0.0), quadrature_error: 0.0 })
        }
        GallagherFunction::LOnCriticalLine(chi) => {
            let integrand = |t: f64| -> Result<Vec<f64>> {
                let (v, d) = l_value_and_derivative(SPoint::critical(t), chi)?;
                Ok(vec![v.value.norm_sqr(), d.value.norm_sqr()])
            };
            let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_depth: 12 };
            let width = default_panel_width(chi.modulus(), t_max);
            let r = combine(&integrate_segments(&integrand, &[-t_max, t_max], width, 2, &opts)?);
            check_total(&r, &opts)?;
            Ok(GallagherEnergy { t_max, f_squared: r.value[0], derivative_squared: r.value[1], quadrature_error: r.error })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagherReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub points: usize,
    pub energy: GallagherEnergy,
}

/// `Σ_t N_δ(t)^{-1} |f(t)|² ≤ δ^{-1} ∫|f|² + (∫|f|²)^{½} (∫|f'|²)^{½}`.
pub fn gallagher_check(f: &GallagherFunction, t_max: f64, delta: f64, set: &WellSpacedSet) -> Result<GallagherReport> {
    let energy = gallagher_energy(f, t_max)?;
    gallagher_check_with_energy(f, &energy, delta, set)
}

/// As [`gallagher_check`], reusing integrals computed for the same `f` and `T`.
pub fn gallagher_check_with_energy(
    f: &GallagherFunction,
    energy: &GallagherEnergy,
    delta: f64,
    set: &WellSpacedSet,
) -> Result<GallagherReport> {
    let t_max = energy.t_max;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    let (lo, hi) = (0.5 * delta - t_max, t_max - 0.5 * delta);
    if let Some(p) = set.points().iter().find(|&&p| !(p >= lo && p <= hi)) {
        return Err(Error::Domain(format!("point {p} outside [{lo}, {hi}]")));
    }
    let values: Vec<f64> = set.points().par_iter().map(|&t| f.value(t).map(|v| v.norm_sqr())).collect::<Result<_>>()?;
    let pts = set.points();
    let lhs: f64 = pts
        .iter()
        .zip(&values)
        .map(|(&t, &v)| v / pts.iter().filter(|&&u| (t - u).abs() < delta).count() as f64)
        .sum();
    let rhs = energy.f_squared / delta + (energy.f_squared * energy.derivative_squared).sqrt();
    Ok(GallagherReport { lhs, rhs, holds: lhs <= rhs + GALLAGHER_SLACK * rhs, points: pts.len(), energy: *energy })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueReport {
    pub j: u64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    #[serde(rename = "N")]
    pub n_param: f64,
    pub delta: f64,
    pub sigma0: f64,
    pub lhs: f64,
    /// `Σ′ |a_n|² n^{-2σ₀}`.
    pub weighted_norm: f64,
    /// `|𝒮(Q)|`, the number of pairs `(s, χ)`.
    pub pairs: usize,
    pub rhs_delta: f64,
    pub rhs_pairs: f64,
    pub ratio_delta: Option<f64>,
    pub ratio_pairs: Option<f64>,
}

/// Both mean-value comparisons for points `σ_t + it` attached to each character.
///
/// `point_sets` is keyed by position in the family enumeration; characters
/// without an entry contribute nothing.
#[allow(clippy::too_many_arguments)]
pub fn meanvalue_check(
    j: u64,
    q_param: f64,
    t_max: f64,
    delta: f64,
    point_sets: &BTreeMap<usize, Vec<(f64, f64)>>,
    coeffs: &BTreeMap<u64, Complex64>,
    n_param: f64,
    sigma0: f64,
) -> Result<MeanValueReport> {
    if !(sigma0 > 0.0 && sigma0 < 1.0) {
        return Err(Error::Domain(format!("σ₀ must lie in (0, 1), got {sigma0}")));
    }
    if let Some(&n) = coeffs.keys().find(|&&n| n == 0 || n as f64 > n_param) {
        return Err(Error::Domain(format!("coefficient index {n} outside [1, N]")));
    }
    let family = family_of(j, q_param)?;
    for (&idx, pts) in point_sets {
        if idx >= family.len() {
            return Err(Error::Domain(format!("point set index {idx} beyond family size {}", family.len())));
        }
        if let Some(&(s, t)) = pts.iter().find(|&&(s, _)| !(s >= sigma0 && s < 1.0)) {
            return Err(Error::Domain(format!("σ_t = {s} at t = {t} outside [{sigma0}, 1)")));
        }
        WellSpacedSet::new(delta, t_max, pts.iter().map(|p| p.1).collect())?;
    }
    let terms: Vec<(u64, Complex64)> =
        coeffs.iter().filter(|(&n, _)| is_squarefree(n)).map(|(&n, &a)| (n, a)).collect();
    let rows: Vec<f64> = point_sets
        .par_iter()
        .map(|(&idx, pts)| {
            let chi = &family[idx];
            pts.iter()
                .map(|&(sigma, t)| {
                    let s = Complex64::new(sigma, t);
                    let sum: Complex64 = terms
                        .iter()
                        .map(|&(n, a)| a * chi.value(n as i64) * (-s * (n as f64).ln()).exp())
                        .sum();
                    sum.norm_sqr()
                })
                .sum::<f64>()
        })
        .collect();
    let lhs: f64 = rows.iter().sum();
    let pairs: usize = point_sets.values().map(Vec::len).sum();
    let weighted_norm: f64 = terms.iter().map(|&(n, a)| a.norm_sqr() * (n as f64).powf(-2.0 * sigma0)).sum();
    let spacing = 1.0 / delta + 1.0;
    let rhs_delta = spacing * delta_bound(j, q_param, t_max, n_param)? * weighted_norm;
    let rhs_pairs = spacing * (n_param + q_param * t_max.sqrt() * pairs as f64) * weighted_norm;
    let ratio = |r: f64| (r > 0.0).then(|| lhs / r);
    Ok(MeanValueReport {
        j,
        q_param,
        t_max,
        n_param,
        delta,
        sigma0,
        lhs,
        weighted_norm,
        pairs,
        rhs_delta,
        rhs_pairs,
        ratio_delta: ratio(rhs_delta),
        ratio_pairs: ratio(rhs_pairs),
    })
}

/// Unit-modulus coefficients with uniform phases on `1 ≤ n ≤ N`.
pub fn random_unit_polynomial(n_param: f64, seed: u64) -> Result<BTreeMap<u64, Complex64>> {
    if !(n_param >= 1.0 && n_param.is_finite()) {
        return Err(Error::Domain(format!("N must be >= 1, got {n_param}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((1..=n_param.floor() as u64).map(|n| (n, Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))).collect())
}

/// Up to `points` heights per character, `δ`-spaced inside `[δ/2 - T, T - δ/2]`, with
/// abscissae uniform in `[σ₀, 1)`; candidates breaking the spacing are dropped.
pub fn random_point_sets(
    family_size: usize,
    t_max: f64,
    delta: f64,
    points: usize,
    sigma0: f64,
    seed: u64,
) -> Result<BTreeMap<usize, Vec<(f64, f64)>>> {
    if !(delta > 0.0 && t_max >= delta) || !(sigma0 > 0.0 && sigma0 < 1.0) {
        return Err(Error::Domain(format!("need T >= δ > 0 and σ₀ in (0, 1), got T={t_max}, δ={delta}, σ₀={sigma0}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (0.5 * delta - t_max, t_max - 0.5 * delta);
    let mut sets = BTreeMap::new();
    for idx in 0..family_size {
        let mut ts: Vec<f64> = Vec::new();
        for _ in 0..4 * points {
            if ts.len() == points {
                break;
            }
            let t = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            if ts.iter().all(|&u| (u - t).abs() >= delta) {
                ts.push(t);
            }
        }
        ts.sort_by(|a, b| a.total_cmp(b));
        sets.insert(idx, ts.into_iter().map(|t| (rng.gen_range(sigma0..1.0), t)).collect());
    }
    Ok(sets)
}
