//! Smoothed approximate functional equation.
//!
//! With `z = (s+κ)/2`, `z' = (1-s+κ)/2`, `a_n = πn²/q` and a unit `w = e^{iφ}`,
//!
//! ```text
//! Λ(s, χ) = Σ χ(n) n^κ w^z G(z, a_n w) + ε(χ) Σ χ̄(n) n^κ w̄^{z'} G(z', a_n w̄),
//! ```
//!
//! where `G(z, ξ) = ξ^{-z} Γ(z, ξ)`. Rotating `w` towards `±i` balances the
//! exponential decay of `Γ(z)` at large `|t|`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use num_integer::Integer;

use super::gamma::ln_gamma;
use super::{cexp, pow_neg, CompensatedSum, EvalResult, Method, SPoint};
use crate::characters::{root_number, DirichletCharacter};
use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 5000;
const SERIES_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfeOptions {
    /// Absolute tolerance on `L(s, χ)`.
    pub tol: f64,
    /// Largest admissible `q (|t| + 1)`.
    pub afe_cap: f64,
}

impl Default for AfeOptions {
    fn default() -> Self {
        AfeOptions { tol: 1e-12, afe_cap: 1.0e8 }
    }
}

/// `e^{ξ} ξ^{-z} Γ(z, ξ)` by the Legendre continued fraction (modified Lentz).
fn upper_gamma_cf(z: Complex64, xi: Complex64) -> Result<Complex64> {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = xi + 1.0 - z;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = if b.norm() < 1e-300 { tiny.inv() } else { b.inv() };
    let mut h = d;
    for i in 1..CF_MAX_ITER {
        let an = -(i as f64) * (i as f64 - z);
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::accuracy(format!("incomplete gamma continued fraction stalled at z={z}, ξ={xi}"), None))
}

/// `Σ_{k≥0} ξ^k / (z)_{k+1}`.
fn lower_gamma_series(z: Complex64, xi: Complex64) -> Result<(Complex64, f64)> {
    let mut term = z.inv();
    let mut acc = CompensatedSum::default();
    let mut magnitude = 0.0;
    for k in 0..SERIES_MAX_ITER {
        acc.add(term);
        let m = term.norm();
        magnitude += m;
        let total = acc.total().norm();
        if k > 0 && m <= 1e-17 * total {
            return Ok((acc.total(), magnitude));
        }
        term = term * xi / (z + (k + 1) as f64);
    }
    Err(Error::accuracy(format!("incomplete gamma series stalled at z={z}, ξ={xi}"), None))
}

/// `w^z G(z, a w)` with its rounding scale.
struct Smoothing {
    z: Complex64,
    /// `Γ(z)`
    gamma: Complex64,
    /// `w^z`
    w_z: Complex64,
    w: Complex64,
}

impl Smoothing {
    fn new(z: Complex64, phi: f64) -> Result<Self> {
        let i_phi = Complex64::new(0.0, phi);
        let (sin, cos) = phi.abs().sin_cos();
        Ok(Smoothing {
            z,
            gamma: cexp(ln_gamma(z)?),
            w_z: cexp(i_phi * z),
            w: Complex64::new(cos, sin.copysign(phi)),
        })
    }

    fn term(&self, a: f64) -> Result<(Complex64, f64)> {
        let xi = self.w * a;
        let e = cexp(-xi);
        if xi.norm() >= self.z.norm() + 1.0 {
            let v = self.w_z * e * upper_gamma_cf(self.z, xi)?;
            Ok((v, v.norm()))
        } else {
            let (s, mag) = lower_gamma_series(self.z, xi)?;
            let full = pow_neg(a, self.z) * self.gamma;
            let low = self.w_z * e;
            let v = full - low * s;
            Ok((v, full.norm() + low.norm() * mag))
        }
    }
}

/// `(q/π)^{(s+κ)/2} Γ((s+κ)/2)`.
pub fn gamma_factor(s: SPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    let kappa = chi.parity() as f64;
    let z = (s.to_complex() + kappa) * 0.5;
    let ln = ln_gamma(z)? + z * (chi.modulus() as f64 / PI).ln();
    Ok(cexp(ln))
}

/// `Λ(s, χ)` from the oracle value of `L(s, χ)`.
pub fn completed_l_value(s: SPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    Ok(gamma_factor(s, chi)? * super::l_value_oracle(s, chi)?.value)
}

/// Fast evaluation of `L(s, χ)` for primitive non-principal `χ`.
pub fn l_value_afe(s: SPoint, chi: &DirichletCharacter, tol: f64) -> Result<EvalResult> {
    l_value_afe_with(s, chi, &AfeOptions { tol, ..AfeOptions::default() })
}

pub fn l_value_afe_with(s: SPoint, chi: &DirichletCharacter, opts: &AfeOptions) -> Result<EvalResult> {
    if !chi.is_primitive() || chi.is_principal() {
        return Err(Error::Domain(format!(
            "approximate functional equation needs a primitive non-principal character, got {}",
            chi.key()
        )));
    }
    if !s.is_finite() || !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("invalid AFE input s={s:?}, tol={}", opts.tol)));
    }
    let q = chi.modulus();
    let qf = q as f64;
    if qf * (s.t.abs() + 1.0) > opts.afe_cap {
        return Err(Error::Domain(format!("q(|t|+1) = {} exceeds afe_cap", qf * (s.t.abs() + 1.0))));
    }
    let kappa = chi.parity() as f64;
    let sc = s.to_complex();
    let z = (sc + kappa) * 0.5;
    let z_dual = (1.0 - sc + kappa) * 0.5;
    let t = s.t;
    let theta0 = if t == 0.0 { FRAC_PI_2 } else { FRAC_PI_2.min(8.0 / t.abs()) };
    let phi = if t == 0.0 { 0.0 } else { (FRAC_PI_2 - theta0).copysign(t) };
    let direct = Smoothing::new(z, phi)?;
    let dual = Smoothing::new(z_dual, -phi)?;
    let eps = root_number(chi)?;
    let factor = cexp(ln_gamma(z)? + z * (qf / PI).ln());
    let scale = factor.norm();
    let cos_phi = phi.cos();
    let stop_a = (theta0 * t.abs() * 0.5 + (1.0 / opts.tol).ln() + 10.0) / cos_phi;

    let values = chi.value_table();
    let mut first = CompensatedSum::default();
    let mut second = CompensatedSum::default();
    let mut magnitude = 0.0;
    let mut terms = 0u64;
    let mut n = 1u64;
    loop {
        let a = PI * (n as f64) * (n as f64) / qf;
        if n.gcd(&q) == 1 {
            let c = values[(n % q) as usize];
            let nk = if kappa == 0.0 { 1.0 } else { n as f64 };
            let (u, mu) = direct.term(a)?;
            let (v, mv) = dual.term(a)?;
            let x = c * u * nk;
            let y = c.conj() * v * nk;
            first.add(x);
            second.add(y);
            magnitude += (mu + mv) * nk;
            terms += 2;
            if a > stop_a && (x.norm() + y.norm()) < 1e-3 * opts.tol * scale {
                break;
            }
        }
        if a > 64.0 * stop_a {
            return Err(Error::accuracy(
                format!("AFE terms for {} at {s:?} did not decay", chi.key()),
                None,
            ));
        }
        n += 1;
    }
    let lambda = first.total() + eps * second.total();
    let value = lambda / factor;
    let rounding = 16.0 * f64::EPSILON * magnitude / scale;
    Ok(EvalResult {
        value,
        abs_error_bound: opts.tol + rounding,
        terms_used: terms,
        method: Method::SmoothedAfe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;
    use crate::lfunc::l_value_oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn primitive_upto(qmax: u64) -> Vec<DirichletCharacter> {
        (3..=qmax)
            .flat_map(|q| enumerate_characters(q).unwrap())
            .filter(|c| c.is_primitive() && !c.is_principal())
            .collect()
    }

    #[test]
    fn matches_oracle_at_half() {
        let chi = DirichletCharacter::new(4, &[1]).unwrap();
        let v = l_value_afe(SPoint::new(0.5, 0.0), &chi, 1e-12).unwrap();
        assert!((v.value.re - 0.6676914571896092).abs() < 1e-10, "{}", v.value);
        assert_eq!(v.method, Method::SmoothedAfe);
    }

    #[test]
    fn rejects_imprimitive() {
        let chi = DirichletCharacter::new(9, &[3]).unwrap();
        assert!(matches!(l_value_afe(SPoint::new(0.5, 1.0), &chi, 1e-10), Err(Error::Domain(_))));
    }

    #[test]
    fn random_oracle_agreement() {
        let chars = primitive_upto(200);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let chi = &chars[rng.gen_range(0..chars.len())];
            let t = rng.gen_range(-50.0..50.0);
            let s = SPoint::new(0.5, t);
            let a = l_value_afe(s, chi, 1e-12).unwrap().value;
            let b = l_value_oracle(s, chi).unwrap().value;
            assert!((a - b).norm() <= 1e-8, "{} at t={t}: {}", chi.key(), (a - b).norm());
        }
    }

    #[test]
    fn off_line_agreement() {
        let chars = primitive_upto(40);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let chi = &chars[rng.gen_range(0..chars.len())];
            let s = SPoint::new(rng.gen_range(0.0..1.5), rng.gen_range(-30.0..30.0));
            let a = l_value_afe(s, chi, 1e-12).unwrap().value;
            let b = l_value_oracle(s, chi).unwrap().value;
            assert!((a - b).norm() <= 1e-8 * b.norm().max(1.0), "{} at {s:?}", chi.key());
        }
    }

    #[test]
    fn functional_equation() {
        let chars = primitive_upto(60);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let chi = &chars[rng.gen_range(0..chars.len())];
            let s = SPoint::new(rng.gen_range(0.5..1.0), rng.gen_range(-40.0..40.0));
            let lhs = gamma_factor(s, chi).unwrap() * l_value_afe(s, chi, 1e-12).unwrap().value;
            let rhs = root_number(chi).unwrap() * completed_l_value(s.reflect(), &chi.conjugate()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8 * lhs.norm(), "{} at {s:?}", chi.key());
        }
    }
}
