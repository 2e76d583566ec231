//! `L(s, χ) = q^{-s} Σ_{a=1}^{q} χ(a) ζ(s, a/q)` and its derivative.

use num_complex::Complex64;
use num_integer::Integer;

use super::hurwitz::{hurwitz_batch, HurwitzOptions};
use super::{pow_neg, CompensatedSum, EvalResult, Method, SPoint};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};

struct Shared {
    values: Vec<EvalResult>,
    derivatives: Vec<EvalResult>,
}

fn evaluate(
    s: SPoint,
    chars: &[&DirichletCharacter],
    opts: &HurwitzOptions,
    with_derivative: bool,
) -> Result<Shared> {
    let Some(first) = chars.first() else {
        return Ok(Shared { values: Vec::new(), derivatives: Vec::new() });
    };
    let q = first.modulus();
    if chars.iter().any(|c| c.modulus() != q) {
        return Err(Error::Domain("shared oracle evaluation needs a common modulus".into()));
    }
    let residues: Vec<u64> = (1..=q).filter(|a| a.gcd(&q) == 1).collect();
    let shifts: Vec<f64> = residues.iter().map(|&a| a as f64 / q as f64).collect();
    let batch = hurwitz_batch(s, &shifts, opts, with_derivative)
        .map_err(|e| e.context(format!("L-value oracle mod {q}")))?;
    let z = s.to_complex();
    let scale = pow_neg(q as f64, z);
    let ln_q = (q as f64).ln();
    let terms_used = (batch.nodes * residues.len()) as u64;
    let mut values = Vec::with_capacity(chars.len());
    let mut derivatives = Vec::new();
    for chi in chars {
        let table = chi.value_table();
        let mut acc = CompensatedSum::default();
        let mut err = 0.0;
        for (i, &a) in residues.iter().enumerate() {
            acc.add(table[(a % q) as usize] * batch.values[i]);
            err += batch.value_errors[i];
        }
        let inner = acc.total();
        let value = scale * inner;
        let abs_error_bound = scale.norm() * err + 4.0 * f64::EPSILON * value.norm();
        values.push(EvalResult { value, abs_error_bound, terms_used, method: Method::HurwitzOracle });
        if with_derivative {
            let mut dacc = CompensatedSum::default();
            let mut derr = 0.0;
            for (i, &a) in residues.iter().enumerate() {
                dacc.add(table[(a % q) as usize] * batch.derivatives[i]);
                derr += batch.derivative_errors[i];
            }
            let dvalue = scale * (dacc.total() - inner * ln_q);
            let dbound = scale.norm() * (derr + ln_q * err) + 4.0 * f64::EPSILON * dvalue.norm();
            derivatives.push(EvalResult {
                value: dvalue,
                abs_error_bound: dbound,
                terms_used,
                method: Method::HurwitzOracle,
            });
        }
    }
    Ok(Shared { values, derivatives })
}

/// Trusted evaluation of `L(s, χ)` through Hurwitz zeta values.
pub fn l_value_oracle(s: SPoint, chi: &DirichletCharacter) -> Result<EvalResult> {
    l_value_oracle_with(s, chi, &HurwitzOptions::default())
}

pub fn l_value_oracle_with(s: SPoint, chi: &DirichletCharacter, opts: &HurwitzOptions) -> Result<EvalResult> {
    Ok(evaluate(s, &[chi], opts, false)?.values[0])
}

/// Oracle values for several characters of one modulus, sharing the `ζ(s, a/q)` evaluations.
pub fn l_values_oracle_shared(
    s: SPoint,
    chars: &[&DirichletCharacter],
    opts: &HurwitzOptions,
) -> Result<Vec<EvalResult>> {
    Ok(evaluate(s, chars, opts, false)?.values)
}

/// `ζ(s)`.
pub fn zeta_value(s: SPoint) -> Result<EvalResult> {
    let chi = DirichletCharacter::principal(1)?;
    l_value_oracle(s, &chi)
}

/// `L'(s, χ)` from the term-wise differentiated Hurwitz series.
pub fn l_derivative(s: SPoint, chi: &DirichletCharacter) -> Result<EvalResult> {
    Ok(evaluate(s, &[chi], &HurwitzOptions::default(), true)?.derivatives[0])
}

/// `L(s, χ)` and `L'(s, χ)` from one pass over the Hurwitz values.
pub fn l_value_and_derivative(s: SPoint, chi: &DirichletCharacter) -> Result<(EvalResult, EvalResult)> {
    let shared = evaluate(s, &[chi], &HurwitzOptions::default(), true)?;
    Ok((shared.values[0], shared.derivatives[0]))
}

/// Central difference `(L(s + h) - L(s - h)) / 2h` along the real direction.
pub fn l_derivative_finite_difference(s: SPoint, chi: &DirichletCharacter, h: f64) -> Result<Complex64> {
    let plus = l_value_oracle(SPoint::new(s.sigma + h, s.t), chi)?.value;
    let minus = l_value_oracle(SPoint::new(s.sigma - h, s.t), chi)?.value;
    Ok((plus - minus) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_characters;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chi4() -> DirichletCharacter {
        DirichletCharacter::new(4, &[1]).unwrap()
    }

    #[test]
    fn spec_values() {
        let g = l_value_oracle(SPoint::new(2.0, 0.0), &chi4()).unwrap();
        assert!((g.value.re - 0.915965594177219).abs() < 1e-12);
        let h = l_value_oracle(SPoint::new(0.5, 0.0), &chi4()).unwrap();
        assert!((h.value.re - 0.6676914571896092).abs() < 1e-12);
        assert!(h.abs_error_bound <= 4.0 * 1e-12);
        let z = zeta_value(SPoint::new(0.5, 0.0)).unwrap();
        assert!((z.value.re + 1.4603545088095868).abs() < 1e-12);
        assert!(matches!(zeta_value(SPoint::new(1.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn reflection_is_bitwise() {
        for q in [5u64, 7, 12, 13] {
            for chi in enumerate_characters(q).unwrap() {
                for &(sigma, t) in &[(0.5, 3.3), (0.8, -17.0), (2.0, 40.0)] {
                    let a = l_value_oracle(SPoint::new(sigma, t), &chi).unwrap().value;
                    let b = l_value_oracle(SPoint::new(sigma, -t), &chi.conjugate()).unwrap().value;
                    assert_eq!(a.conj(), b);
                }
            }
        }
    }

    #[test]
    fn shared_matches_single() {
        let chars = enumerate_characters(15).unwrap();
        let refs: Vec<&DirichletCharacter> = chars.iter().collect();
        let s = SPoint::new(0.5, 7.0);
        let shared = l_values_oracle_shared(s, &refs, &HurwitzOptions::default()).unwrap();
        for (chi, v) in chars.iter().zip(&shared) {
            assert_eq!(l_value_oracle(s, chi).unwrap().value, v.value);
        }
    }

    #[test]
    fn zeta_derivative() {
        let chi = DirichletCharacter::principal(1).unwrap();
        let d = l_derivative(SPoint::new(2.0, 0.0), &chi).unwrap();
        assert!((d.value.re + 0.9375482543158437).abs() < 1e-11);
    }

    #[test]
    fn derivative_of_rotation_obeys_product_rule() {
        // f(s) = e^{ics} L(s); f'(s) = ic f(s) + e^{ics} L'(s), compared against a difference quotient of f
        let chi = DirichletCharacter::new(7, &[1]).unwrap();
        let c = 0.37;
        let s = SPoint::new(0.6, 4.0);
        let rot = |s: SPoint| (Complex64::new(0.0, c) * s.to_complex()).exp();
        let f = |s: SPoint| rot(s) * l_value_oracle(s, &chi).unwrap().value;
        let h = 1e-4;
        let fd = (f(SPoint::new(s.sigma + h, s.t)) - f(SPoint::new(s.sigma - h, s.t))) / (2.0 * h);
        let exact = Complex64::new(0.0, c) * f(s) + rot(s) * l_derivative(s, &chi).unwrap().value;
        assert!((fd - exact).norm() < 1e-6);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut chars = Vec::new();
        for q in 3..=30u64 {
            chars.extend(enumerate_characters(q).unwrap().into_iter().filter(|c| !c.is_principal()));
        }
        for _ in 0..20 {
            let chi = &chars[rng.gen_range(0..chars.len())];
            let s = SPoint::new(rng.gen_range(0.3..1.8), rng.gen_range(-30.0..30.0));
            let exact = l_derivative(s, chi).unwrap().value;
            let fd = l_derivative_finite_difference(s, chi, 1e-4).unwrap();
            assert!((exact - fd).norm() < 1e-6, "{} at {s:?}", chi.key());
        }
    }

    #[test]
    fn euler_product_at_two() {
        // primes up to 10^6; at 10^5 the prime tail alone is about 2e-9 for the character mod 4
        let limit = 1_000_000usize;
        let spf = crate::arith::smallest_prime_factor_table(limit);
        for (q, exps) in [(4u64, vec![1u64]), (5, vec![1]), (7, vec![2]), (12, vec![1, 1])] {
            let chi = DirichletCharacter::new(q, &exps).unwrap();
            for t in [0.0, 3.0] {
                let s = SPoint::new(2.0, t);
                let mut log_product = CompensatedSum::default();
                for p in (2..=limit).filter(|&p| spf[p] as usize == p) {
                    let local = Complex64::new(1.0, 0.0) - chi.value(p as i64) * pow_neg(p as f64, s.to_complex());
                    log_product.add(-local.ln());
                }
                let l = l_value_oracle(s, &chi).unwrap().value;
                let gap = (l - log_product.total().exp()).norm();
                assert!(gap <= 1e-9, "{} at t={t}: {gap:e}", chi.key());
            }
        }
    }
}
