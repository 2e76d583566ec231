//! Complex log-gamma by upward recurrence and the Stirling series.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::cexp;
use crate::error::{Error, Result};

/// `B_{2k} / (2k (2k-1))` for `k = 1..=10`.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const MIN_STIRLING_MODULUS: f64 = 12.0;

fn stirling(z: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for c in STIRLING {
        series += power * c;
        power *= inv2;
    }
    (z - 0.5) * z.ln() - z + half_ln_2pi + series
}

/// Principal branch of `ln Γ(z)`, continuous off the non-positive real axis.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("ln Γ at non-finite point {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("Γ has a pole at {}", z.re)));
    }
    if z.re < -1.0e4 {
        return Err(Error::Domain(format!("ln Γ argument {z} too far left")));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 0.5 || w.norm() < MIN_STIRLING_MODULUS {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(cexp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_values() {
        assert!((gamma(c(5.0, 0.0)).unwrap().re - 24.0).abs() < 1e-12);
        assert!((gamma(c(0.5, 0.0)).unwrap().re - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(c(-0.5, 0.0)).unwrap().re + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((ln_gamma(c(100.0, 0.0)).unwrap().re - 359.134_205_369_575_4).abs() < 1e-10);
    }

    #[test]
    fn poles_are_errors() {
        assert!(matches!(gamma(c(0.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(gamma(c(-3.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn recurrence_and_reflection() {
        for &(x, y) in &[(0.3, 1.0), (0.25, 17.0), (-0.25, 3.0), (2.0, -40.0), (0.5, 100.0)] {
            let z = c(x, y);
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "{z}");
            let refl = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (z * PI).sin();
            if refl.norm().is_finite() {
                assert!((refl - c(PI, 0.0)).norm() < 1e-9, "{z}: {refl}");
            }
        }
    }

    #[test]
    fn critical_line_modulus() {
        // |Γ(½ + iy)|² = π / cosh(πy)
        for y in [0.0, 1.0, 7.5, 30.0, 90.0] {
            let g = ln_gamma(c(0.5, y)).unwrap();
            let expected = 0.5 * (PI / (PI * y).cosh()).ln();
            assert!((g.re - expected).abs() < 1e-12 * expected.abs().max(1.0), "y = {y}");
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let z = c(0.7, 23.1);
        let a = ln_gamma(z).unwrap();
        let b = ln_gamma(z.conj()).unwrap();
        assert!((a.conj() - b).norm() < 1e-14);
    }
}
