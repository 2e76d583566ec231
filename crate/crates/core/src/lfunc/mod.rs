//! Evaluation of `L(s, χ)`, `ζ(s)`, `L'(s, χ)`, Dirichlet polynomials,
//! mollifiers and smoothed sums.
//!
//! Two independent paths compute `L(s, χ)`: a Hurwitz-zeta oracle
//! ([`l_value_oracle`]) and a smoothed approximate functional equation
//! ([`l_value_afe`]). Every summation runs in ascending index order with
//! compensated accumulation, so results do not depend on the thread count.

mod afe;
mod gamma;
mod hurwitz;
mod mellin;
mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{moebius_table, tau_k_table};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

pub use afe::{completed_l_value, gamma_factor, l_value_afe, AfeOptions};
pub use gamma::{gamma, ln_gamma};
pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_derivative, hurwitz_zeta_with, HurwitzOptions};
pub use mellin::{mellin_identity_residual, MellinReport};
pub(crate) use mellin::{mellin_quad_options, shifted_mellin_integral};
pub use oracle::{
    l_derivative, l_derivative_finite_difference, l_value_and_derivative, l_value_oracle, l_value_oracle_with,
    l_values_oracle_shared, zeta_value,
};

/// Largest `nmax` accepted for mollifier coefficient tables.
pub const MOLLIFIER_TABLE_CAP: u64 = 50_000_000;

/// Largest smoothing length accepted by [`smoothed_power_sum`].
pub const SMOOTHING_CAP: f64 = 1.0e5;

/// A point `s = σ + it`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SPoint {
    pub sigma: f64,
    pub t: f64,
}

impl SPoint {
    pub const fn new(sigma: f64, t: f64) -> Self {
        SPoint { sigma, t }
    }

    /// `½ + it`.
    pub const fn critical(t: f64) -> Self {
        SPoint { sigma: 0.5, t }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    pub fn conj(self) -> Self {
        SPoint { sigma: self.sigma, t: -self.t }
    }

    /// `1 - s`.
    pub fn reflect(self) -> Self {
        SPoint { sigma: 1.0 - self.sigma, t: -self.t }
    }

    pub fn is_finite(self) -> bool {
        self.sigma.is_finite() && self.t.is_finite()
    }
}

impl From<Complex64> for SPoint {
    fn from(z: Complex64) -> Self {
        SPoint { sigma: z.re, t: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    HurwitzOracle,
    SmoothedAfe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub abs_error_bound: f64,
    pub terms_used: u64,
    pub method: Method,
}

/// Neumaier-compensated complex accumulator.
///
/// Negating every input negates the result bitwise, which keeps conjugate
/// evaluations exact mirrors of each other.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: Complex64) {
        neumaier(&mut self.sum.re, &mut self.comp.re, x.re);
        neumaier(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    pub fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `(sin θ, cos θ)` with `sin(-θ) = -sin θ` holding bitwise.
#[inline]
fn odd_sin_cos(theta: f64) -> (f64, f64) {
    let (sin, cos) = theta.abs().sin_cos();
    (if theta < 0.0 { -sin } else { sin }, cos)
}

/// `exp(-s ln x)` for `x > 0`, computed so that `s ↦ s̄` conjugates the result bitwise.
#[inline]
pub(crate) fn pow_neg_ln(ln_x: f64, s: Complex64) -> Complex64 {
    let modulus = (-s.re * ln_x).exp();
    let (sin, cos) = odd_sin_cos(s.im * ln_x);
    Complex64::new(modulus * cos, -modulus * sin)
}

/// `x^{-s}` for real `x > 0`.
#[inline]
pub fn pow_neg(x: f64, s: Complex64) -> Complex64 {
    pow_neg_ln(x.ln(), s)
}

/// `exp(z)` with the conjugation symmetry of [`pow_neg_ln`].
#[inline]
pub(crate) fn cexp(z: Complex64) -> Complex64 {
    let m = z.re.exp();
    let (sin, cos) = odd_sin_cos(z.im);
    Complex64::new(m * cos, m * sin)
}

/// `Σ_n a_n χ(n) n^{-s}` with `a_n = coeffs[n - 1]`; `χ = None` means the constant 1.
pub fn dirichlet_polynomial(
    coeffs: &[Complex64],
    s: SPoint,
    chi: Option<&DirichletCharacter>,
) -> Complex64 {
    dirichlet_polynomial_sparse(
        coeffs.iter().enumerate().map(|(i, &a)| (i as u64 + 1, a)),
        s,
        chi,
    )
}

/// Same as [`dirichlet_polynomial`] for explicitly indexed terms, summed in the given order.
pub fn dirichlet_polynomial_sparse<I>(terms: I, s: SPoint, chi: Option<&DirichletCharacter>) -> Complex64
where
    I: IntoIterator<Item = (u64, Complex64)>,
{
    let z = s.to_complex();
    let mut acc = CompensatedSum::default();
    for (n, a) in terms {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let c = match chi {
            Some(chi) => {
                let v = chi.value(n as i64);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a * v
            }
            None => a,
        };
        acc.add(c * pow_neg(n as f64, z));
    }
    acc.total()
}

/// Coefficients of `M_X(s, χ) L(s, χ)`: `m_{X,n} = Σ_{d | n, d ≤ X} μ(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MollifierCoefficients {
    pub x: f64,
    pub nmax: u64,
    coefficients: Vec<i32>,
}

impl MollifierCoefficients {
    /// `m_{X,n}` for `1 ≤ n ≤ nmax`.
    pub fn get(&self, n: u64) -> i32 {
        self.coefficients[n as usize]
    }

    /// `(n, m_{X,n})` over the nonzero coefficients with `lo < n ≤ hi`.
    pub fn nonzero_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = (u64, i32)> + '_ {
        let hi = hi.min(self.nmax);
        ((lo + 1)..=hi).filter_map(move |n| {
            let m = self.coefficients[n as usize];
            (m != 0).then_some((n, m))
        })
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.coefficients[1..]
    }
}

pub fn mollifier_coefficients(x: f64, nmax: u64) -> Result<MollifierCoefficients> {
    if !(x >= 2.0) || x > nmax as f64 {
        return Err(Error::Domain(format!("mollifier needs 2 <= X <= nmax, got X={x}, nmax={nmax}")));
    }
    if nmax > MOLLIFIER_TABLE_CAP {
        return Err(Error::Domain(format!("nmax {nmax} exceeds table cap {MOLLIFIER_TABLE_CAP}")));
    }
    let xmax = x.floor() as u64;
    let mu = moebius_table(xmax as usize);
    let mut coefficients = vec![0i32; nmax as usize + 1];
    for d in 1..=xmax {
        let m = mu[d as usize] as i32;
        if m == 0 {
            continue;
        }
        let mut n = d;
        while n <= nmax {
            coefficients[n as usize] += m;
            n += d;
        }
    }
    Ok(MollifierCoefficients { x, nmax, coefficients })
}

/// `M_X(s, χ) = Σ_{n ≤ X} μ(n) χ(n) n^{-s}`.
pub fn mollifier_value(x: f64, s: SPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    let xmax = x.floor() as u64;
    let mu = moebius_table(xmax as usize);
    Ok(dirichlet_polynomial_sparse(
        (1..=xmax).map(|n| (n, Complex64::new(mu[n as usize] as f64, 0.0))),
        s,
        Some(chi),
    ))
}

/// `𝔐_X(s, χ) = M_X(s, χ) L(s, χ)`, with `L` from the oracle.
pub fn mollified_l(x: f64, s: SPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    Ok(mollifier_value(x, s, chi)? * l_value_oracle(s, chi)?.value)
}

/// Truncation point for `Σ τ_k(n) χ(n) n^{-s} e^{-n/U}`: first `n` with
/// `(2√n)^{k-1} e^{-n/U} < 1e-14`, using `τ_k(n) ≤ τ(n)^{k-1} ≤ (2√n)^{k-1}`.
pub fn smoothed_cutoff(k: u32, u: f64) -> u64 {
    let target = 1e-14f64.ln();
    let mut n = u.ceil().max(1.0);
    loop {
        let log_term = (k as f64 - 1.0) * (2.0 * n.sqrt()).ln() - n / u;
        if log_term < target {
            return n as u64;
        }
        n = (n * 1.05).ceil();
    }
}

/// `Σ_n τ_k(n) χ(n) n^{-s} e^{-n/U}`.
pub fn smoothed_power_sum(chi: &DirichletCharacter, s: SPoint, k: u32, u: f64) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::Domain("power k must be >= 1".into()));
    }
    if !(u >= 2.0) || u > SMOOTHING_CAP {
        return Err(Error::Domain(format!("smoothing length U={u} outside [2, {SMOOTHING_CAP}]")));
    }
    let nmax = smoothed_cutoff(k, u);
    let tau = tau_k_table(nmax as usize, k as u64)?;
    Ok(dirichlet_polynomial_sparse(
        (1..=nmax).map(|n| (n, Complex64::new(tau[n as usize] as f64 * (-(n as f64) / u).exp(), 0.0))),
        s,
        Some(chi),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;

    #[test]
    fn polynomial_examples() {
        let one = [Complex64::new(1.0, 0.0)];
        let v = dirichlet_polynomial(&one, SPoint::new(0.3, 17.0), None);
        assert_eq!(v, Complex64::new(1.0, 0.0));
        let ones = vec![Complex64::new(1.0, 0.0); 10];
        let principal = DirichletCharacter::principal(1).unwrap();
        let v = dirichlet_polynomial(&ones, SPoint::new(2.0, 0.0), Some(&principal));
        assert!((v.re - 1.5497677312).abs() < 1e-10 && v.im == 0.0);
    }

    #[test]
    fn polynomial_conjugation_is_bitwise() {
        let coeffs: Vec<Complex64> = (0..50).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let conj_coeffs: Vec<Complex64> = coeffs.iter().map(|c| c.conj()).collect();
        let s = SPoint::new(0.5, 13.7);
        for chi in enumerate_characters(13).unwrap() {
            let a = dirichlet_polynomial(&coeffs, s, Some(&chi));
            let b = dirichlet_polynomial(&conj_coeffs, s.conj(), Some(&chi.conjugate()));
            assert_eq!(a.conj(), b);
        }
    }

    #[test]
    fn mollifier_examples() {
        let m = mollifier_coefficients(3.0, 10).unwrap();
        assert_eq!([m.get(1), m.get(2), m.get(3), m.get(4)], [1, 0, 0, 0]);
        assert_eq!(m.get(6), -1);
        assert_eq!(m.get(5), 1);
        assert!(mollifier_coefficients(1.5, 10).is_err());
        assert!(mollifier_coefficients(20.0, 10).is_err());
    }

    #[test]
    fn mollifier_cancellation_exhaustive() {
        let nmax = 3000;
        for x in 2..=1000u64 {
            let m = mollifier_coefficients(x as f64, nmax).unwrap();
            assert_eq!(m.get(1), 1);
            assert!((2..=x).all(|n| m.get(n) == 0), "X = {x}");
        }
    }

    #[test]
    fn mollifier_bounded_by_divisor_count() {
        let nmax = 20_000;
        let tau = tau_k_table(nmax as usize, 2).unwrap();
        for x in [2.0, 10.0, 37.5, 500.0] {
            let m = mollifier_coefficients(x, nmax).unwrap();
            for n in 1..=nmax {
                assert!(m.get(n).unsigned_abs() as u64 <= tau[n as usize], "X={x}, n={n}");
            }
        }
    }

    #[test]
    fn mollified_series_matches_product() {
        // the Dirichlet coefficients of M_X · L at s = 3 reproduce the product of the two values
        let chi = DirichletCharacter::new(7, &[1]).unwrap();
        let x = 10.0;
        let s = SPoint::new(3.0, 1.0);
        let m = mollifier_coefficients(x, 200_000).unwrap();
        let series = dirichlet_polynomial_sparse(
            (1..=200_000).map(|n| (n, Complex64::new(m.get(n) as f64, 0.0))),
            s,
            Some(&chi),
        );
        let product = mollified_l(x, s, &chi).unwrap();
        assert!((series - product).norm() < 1e-9);
    }

    #[test]
    fn smoothed_sum_examples() {
        let chi4 = DirichletCharacter::new(4, &[1]).unwrap();
        let v = smoothed_power_sum(&chi4, SPoint::new(2.0, 0.0), 1, 2.0).unwrap();
        let lead = (-0.5f64).exp();
        assert!((v.re - lead).abs() < 0.05 * lead);

        let chi5 = DirichletCharacter::new(5, &[1]).unwrap();
        let s = SPoint::new(0.5, 3.0);
        let a = smoothed_power_sum(&chi5, s, 2, 20.0).unwrap();
        let b = smoothed_power_sum(&chi5.conjugate(), s.conj(), 2, 20.0).unwrap();
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn smoothed_square_matches_convolution() {
        let chi = DirichletCharacter::new(5, &[1]).unwrap();
        let s = SPoint::new(0.5, 0.0);
        let u = 20.0;
        let nmax = smoothed_cutoff(2, u);
        let z = s.to_complex();
        let mut direct = Complex64::new(0.0, 0.0);
        for a in 1..=nmax {
            for b in 1..=nmax / a {
                let n = a * b;
                direct += chi.value(n as i64) * pow_neg(n as f64, z) * (-(n as f64) / u).exp();
            }
        }
        let v = smoothed_power_sum(&chi, s, 2, u).unwrap();
        assert!((v - direct).norm() < 1e-12);
    }

    #[test]
    fn pow_neg_matches_complex_powc() {
        let s = Complex64::new(0.5, 21.3);
        for x in [1.0, 2.0, 17.0, 1e5] {
            let expected = Complex64::new(x, 0.0).powc(-s);
            assert!((pow_neg(x, s) - expected).norm() < 1e-12 * expected.norm().max(1.0));
        }
    }
}
