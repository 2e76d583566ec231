//! Hurwitz zeta `ζ(s, a)` and `∂ζ/∂s` by Euler–Maclaurin summation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{pow_neg_ln, CompensatedSum, EvalResult, Method, SPoint};
use crate::error::{Error, Result};

/// `B_{2k} / (2k)!` for `k = 1..=10`.
const EM_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

const EM_TERMS: usize = EM_COEFFS.len();

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzOptions {
    /// Absolute tolerance on each `ζ(s, a)`.
    pub tol: f64,
    /// Largest admissible `|t|`.
    pub t_cap: f64,
    /// How many times the node count may double before giving up.
    pub max_doublings: u32,
}

impl Default for HurwitzOptions {
    fn default() -> Self {
        HurwitzOptions { tol: 1e-12, t_cap: 200.0, max_doublings: 8 }
    }
}

/// Values (and optionally `s`-derivatives) of `ζ(s, a)` for several shifts sharing one node count.
pub(crate) struct HurwitzBatch {
    pub values: Vec<Complex64>,
    pub derivatives: Vec<Complex64>,
    pub value_errors: Vec<f64>,
    pub derivative_errors: Vec<f64>,
    pub nodes: usize,
}

/// Euler–Maclaurin remainder bound after `EM_TERMS` corrections at `x = N + a`.
fn remainder_bound(s: Complex64, x: f64) -> f64 {
    let m2 = 2 * EM_TERMS;
    let exponent = s.re + m2 as f64 - 1.0;
    if exponent <= 0.0 {
        return f64::INFINITY;
    }
    let mut ln_rising = 0.0;
    for j in 0..m2 {
        ln_rising += (s + j as f64).norm().ln();
    }
    let ln_bound = 4f64.ln() + ln_rising - m2 as f64 * (2.0 * PI).ln() - exponent * x.ln() + x.ln()
        - exponent.ln();
    ln_bound.exp()
}

fn check_point(s: SPoint, opts: &HurwitzOptions) -> Result<Complex64> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite point {s:?}")));
    }
    if s.sigma == 1.0 && s.t == 0.0 {
        return Err(Error::Pole("ζ(s, a) has a pole at s = 1".into()));
    }
    if s.t.abs() > opts.t_cap {
        return Err(Error::Domain(format!("|t| = {} exceeds t_cap = {}", s.t.abs(), opts.t_cap)));
    }
    Ok(s.to_complex())
}

/// Node count with remainder bound below `tol / 2` for every shift `≥ a_min`.
fn choose_nodes(s: Complex64, a_min: f64, opts: &HurwitzOptions) -> Result<usize> {
    let mut n = (2.0 * s.im.abs().ceil()).max(30.0) as usize;
    for _ in 0..=opts.max_doublings {
        let bound = remainder_bound(s, n as f64 + a_min);
        if bound <= 0.5 * opts.tol {
            return Ok(n);
        }
        n *= 2;
    }
    Err(Error::accuracy(
        format!("Euler–Maclaurin remainder above {} at s = {s} with {n} nodes", opts.tol),
        None,
    ))
}

struct Tail {
    value: Complex64,
    derivative: Complex64,
}

/// `x^{1-s}/(s-1) + x^{-s}/2 + Σ_k B_{2k}/(2k)! (s)_{2k-1} x^{-s-2k+1}` and its `s`-derivative.
fn em_tail(s: Complex64, x: f64, with_derivative: bool) -> Tail {
    let ln_x = x.ln();
    let p = pow_neg_ln(ln_x, s);
    let sm1 = s - 1.0;
    let t0 = p * x / sm1;
    let mut value = CompensatedSum::default();
    let mut deriv = CompensatedSum::default();
    value.add(t0);
    value.add(p * 0.5);
    if with_derivative {
        deriv.add(t0 * (-ln_x) - t0 / sm1);
        deriv.add(p * (-0.5 * ln_x));
    }
    // rising factorial (s)_m and its derivative
    let mut rising = s;
    let mut rising_d = Complex64::new(1.0, 0.0);
    let inv_x2 = 1.0 / (x * x);
    let mut xp = p / x;
    for (k, &c) in EM_COEFFS.iter().enumerate() {
        value.add(rising * xp * c);
        if with_derivative {
            deriv.add((rising_d - rising * ln_x) * xp * c);
        }
        let m = 2 * k + 1;
        for j in [m, m + 1] {
            let f = s + j as f64;
            rising_d = rising_d * f + rising;
            rising *= f;
        }
        xp *= inv_x2;
    }
    Tail { value: value.total(), derivative: deriv.total() }
}

pub(crate) fn hurwitz_batch(
    s: SPoint,
    shifts: &[f64],
    opts: &HurwitzOptions,
    with_derivative: bool,
) -> Result<HurwitzBatch> {
    let z = check_point(s, opts)?;
    if shifts.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(Error::Domain("Hurwitz shift must lie in (0, 1]".into()));
    }
    let a_min = shifts.iter().cloned().fold(1.0, f64::min);
    let nodes = choose_nodes(z, a_min, opts)?;
    let mut out = HurwitzBatch {
        values: Vec::with_capacity(shifts.len()),
        derivatives: Vec::with_capacity(if with_derivative { shifts.len() } else { 0 }),
        value_errors: Vec::with_capacity(shifts.len()),
        derivative_errors: Vec::with_capacity(if with_derivative { shifts.len() } else { 0 }),
        nodes,
    };
    for &a in shifts {
        let mut head = CompensatedSum::default();
        let mut head_d = CompensatedSum::default();
        let mut magnitude = 0.0;
        let mut magnitude_d = 0.0;
        for n in 0..nodes {
            let ln_x = (n as f64 + a).ln();
            let term = pow_neg_ln(ln_x, z);
            head.add(term);
            magnitude += term.norm();
            if with_derivative {
                let d = term * (-ln_x);
                head_d.add(d);
                magnitude_d += d.norm();
            }
        }
        let x = nodes as f64 + a;
        let tail = em_tail(z, x, with_derivative);
        let bound = remainder_bound(z, x);
        let rounding = 4.0 * f64::EPSILON * (magnitude + tail.value.norm());
        out.values.push(head.total() + tail.value);
        out.value_errors.push(bound + rounding);
        if with_derivative {
            let d_bound = bound * (x.ln() + 2.0 * EM_TERMS as f64);
            let d_rounding = 4.0 * f64::EPSILON * (magnitude_d + tail.derivative.norm());
            out.derivatives.push(head_d.total() + tail.derivative);
            out.derivative_errors.push(d_bound + d_rounding);
        }
    }
    Ok(out)
}

/// `ζ(s, a) = Σ_{n ≥ 0} (n + a)^{-s}` for `a ∈ (0, 1]`.
pub fn hurwitz_zeta(s: SPoint, a: f64) -> Result<EvalResult> {
    hurwitz_zeta_with(s, a, &HurwitzOptions::default())
}

pub fn hurwitz_zeta_with(s: SPoint, a: f64, opts: &HurwitzOptions) -> Result<EvalResult> {
    let batch = hurwitz_batch(s, &[a], opts, false)?;
    Ok(EvalResult {
        value: batch.values[0],
        abs_error_bound: batch.value_errors[0],
        terms_used: batch.nodes as u64 + EM_TERMS as u64,
        method: Method::HurwitzOracle,
    })
}

/// `∂ζ(s, a)/∂s` by the term-wise differentiated Euler–Maclaurin formula.
pub fn hurwitz_zeta_derivative(s: SPoint, a: f64) -> Result<EvalResult> {
    let batch = hurwitz_batch(s, &[a], &HurwitzOptions::default(), true)?;
    Ok(EvalResult {
        value: batch.derivatives[0],
        abs_error_bound: batch.derivative_errors[0],
        terms_used: batch.nodes as u64 + EM_TERMS as u64,
        method: Method::HurwitzOracle,
    })
}
