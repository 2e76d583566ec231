//! Mellin–Barnes identity for smoothed sums of `τ_k(n) χ(n) n^{-s}`.
//!
//! Shifting `(2πi)^{-1} ∫_{(2)} L(s+w, χ)^k Γ(w) U^w dw` to `Re w = c ∈ (-1, 0)`
//! crosses the pole of `Γ` at `w = 0`, so
//! `Σ τ_k χ(n) n^{-s} e^{-n/U} = L(s, χ)^k + (2πi)^{-1} ∫_{(c)} …`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gamma::ln_gamma;
use super::{cexp, l_value_oracle, smoothed_power_sum, SPoint};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// `|Γ(c + iu)|` below which the contour is truncated.
const GAMMA_TRUNCATION: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinReport {
    pub l_power: Complex64,
    pub smoothed_sum: Complex64,
    pub contour_integral: Complex64,
    pub residual: f64,
    pub quadrature_error: f64,
    pub u_max: f64,
}

/// Smallest `u ≥ 0` beyond which `|Γ(c + iu)| < 1e-16`.
pub(crate) fn gamma_truncation(c: f64) -> Result<f64> {
    let mut u = 1.0;
    loop {
        let g = ln_gamma(Complex64::new(c, u))?.re.exp();
        if g < GAMMA_TRUNCATION {
            return Ok(u);
        }
        u += 0.5;
    }
}

/// `(2πi)^{-1} ∫_{Re w = c} f(w) Γ(w) Y^w dw`, truncated where `|Γ| < 1e-16`.
pub(crate) fn shifted_mellin_integral<F>(f: F, c: f64, y: f64, opts: &QuadOptions) -> Result<(Complex64, f64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    if !(c > -1.0 && c < 0.0) {
        return Err(Error::Domain(format!("contour Re w = {c} must lie strictly between -1 and 0")));
    }
    let u_max = gamma_truncation(c)?;
    let ln_y = y.ln();
    let integrand = |u: f64| -> Result<Vec<f64>> {
        let w = Complex64::new(c, u);
        let v = f(w)? * cexp(ln_gamma(w)? + w * ln_y) / (2.0 * PI);
        Ok(vec![v.re, v.im])
    };
    let r = integrate(&integrand, -u_max, u_max, 0.25, 2, opts)?;
    Ok((Complex64::new(r.value[0], r.value[1]), r.error, u_max))
}

pub(crate) fn mellin_quad_options() -> QuadOptions {
    QuadOptions { rel_tol: 1e-11, abs_tol: 1e-11, max_depth: 16 }
}

/// `|L(s)^k - Σ τ_k χ(n) n^{-s} e^{-n/U} + (2πi)^{-1} ∫_{(c)} L(s+w)^k Γ(w) U^w dw|`.
pub fn mellin_identity_residual(
    chi: &DirichletCharacter,
    s: SPoint,
    k: u32,
    u: f64,
    c_offset: f64,
) -> Result<MellinReport> {
    if chi.is_principal() || !chi.is_primitive() {
        return Err(Error::Domain(format!("Mellin identity needs a primitive non-principal character, got {}", chi.key())));
    }
    if k == 0 {
        return Err(Error::Domain("power k must be >= 1".into()));
    }
    let kk = k as i32;
    let l_power = l_value_oracle(s, chi)?.value.powi(kk);
    let smoothed_sum = smoothed_power_sum(chi, s, k, u)?;
    let base = s.to_complex();
    let (contour_integral, quadrature_error, u_max) = shifted_mellin_integral(
        |w| Ok(l_value_oracle(SPoint::from(base + w), chi)?.value.powi(kk)),
        c_offset,
        u,
        &mellin_quad_options(),
    )?;
    let residual = (l_power - smoothed_sum + contour_integral).norm();
    Ok(MellinReport { l_power, smoothed_sum, contour_integral, residual, quadrature_error, u_max })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_examples() {
        let chi4 = DirichletCharacter::new(4, &[1]).unwrap();
        let r = mellin_identity_residual(&chi4, SPoint::new(0.5, 0.0), 1, 20.0, -0.25).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        let chi5 = DirichletCharacter::new(5, &[1]).unwrap();
        let r = mellin_identity_residual(&chi5, SPoint::new(0.5, 1.0), 2, 20.0, -0.25).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        let r2 = mellin_identity_residual(&chi5, SPoint::new(0.5, 1.0), 2, 40.0, -0.25).unwrap();
        assert!((r.residual - r2.residual).abs() <= 1e-6);
    }

    #[test]
    fn contour_through_pole_is_rejected() {
        let chi4 = DirichletCharacter::new(4, &[1]).unwrap();
        for c in [0.0, -1.0, 0.3] {
            assert!(matches!(
                mellin_identity_residual(&chi4, SPoint::new(0.5, 0.0), 1, 20.0, c),
                Err(Error::Domain(_))
            ));
        }
    }
}
