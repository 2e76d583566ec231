//! Zeros of `L(s, χ)`: argument-principle counts, critical-line zeros, the
//! mollified zero detector, and the zero-density bound formulas.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{enumerate_family, root_number, CharacterKey, DirichletCharacter};
use crate::error::{Error, Result};
use crate::lfunc::{
    gamma_factor, l_value_afe, ln_gamma, mellin_quad_options, mollified_l, mollifier_coefficients,
    shifted_mellin_integral, SPoint,
};
use crate::quad::{check_total, combine, integrate_segments, QuadOptions};

/// Right edge of counting rectangles, inside the zero-free half-plane.
pub const RIGHT_EDGE: f64 = 1.5;
/// Offset applied to contour points where the AFE gamma factors have poles.
const POLE_NUDGE: f64 = 1e-9;
/// Largest accepted `|winding - round(winding)|`.
pub const WINDING_TOLERANCE: f64 = 0.25;
/// Shortest step, relative to the edge length, before phase tracking gives up.
const MIN_RELATIVE_STEP: f64 = 1e-10;
/// Shift used by [`family_zero_count`] when a contour runs into a zero.
pub const SIGMA_PERTURBATION: f64 = 1e-4;
/// Bisection width for critical-line zeros.
pub const ZERO_WIDTH: f64 = 1e-8;
/// Largest `Y²` accepted by [`detector_check`].
pub const DETECTOR_CAP: f64 = 1.0e7;
/// Contour abscissa for the detector identity.
pub const DETECTOR_SHIFT: f64 = -0.25;
/// Threshold of the detector dichotomy.
pub const DETECTOR_THRESHOLD: f64 = 1.0 / 6.0;

/// Mean gap between zeros of height about `t`, with a floor for small conductors.
pub fn zero_gap_estimate(q: u64, t: f64) -> f64 {
    2.0 * PI / (q as f64 * (t.abs() + 3.0)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub sigma: f64,
    pub right: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCountReport {
    pub character: CharacterKey,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub count: u64,
    pub winding_residual: f64,
    pub contour: Contour,
    pub evaluations: u64,
    /// Count from the rerun with halved initial steps.
    pub rerun_count: u64,
}

struct Tracker<'a> {
    chi: &'a DirichletCharacter,
    tol: f64,
}

impl Tracker<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        // the dual gamma factor of the AFE has poles at real s = 1 + κ + 2m; L is smooth there
        let v = match l_value_afe(SPoint::from(z), self.chi, self.tol) {
            Err(Error::Pole(_)) => l_value_afe(SPoint::new(z.re, z.im + POLE_NUDGE), self.chi, self.tol)?.value,
            other => other?.value,
        };
        if !(v.norm() > 1e-300) {
            return Err(Error::NearZero(format!("L vanishes at {z} for {}", self.chi.key())));
        }
        Ok(v)
    }

    /// Phase change along `z0 + τ (z1 - z0)` for `τ ∈ [a, b]`, splitting until
    /// every accepted step turns by less than `π/2` and agrees with its halves.
    #[allow(clippy::too_many_arguments)]
    fn track(&self, z0: Complex64, dz: Complex64, a: f64, b: f64, fa: Complex64, fb: Complex64, evals: &mut u64) -> Result<f64> {
        let d = (fb / fa).arg();
        let m = 0.5 * (a + b);
        let fm = self.eval(z0 + dz * m)?;
        *evals += 1;
        let d1 = (fm / fa).arg();
        let d2 = (fb / fm).arg();
        if d.abs() < FRAC_PI_2 && d1.abs() < FRAC_PI_2 && d2.abs() < FRAC_PI_2 && (d1 + d2 - d).abs() < 1e-9 {
            return Ok(d1 + d2);
        }
        if b - a < MIN_RELATIVE_STEP {
            return Err(Error::NearZero(format!(
                "phase step too large near {} for {}",
                z0 + dz * m,
                self.chi.key()
            )));
        }
        Ok(self.track(z0, dz, a, m, fa, fm, evals)? + self.track(z0, dz, m, b, fm, fb, evals)?)
    }

    fn edge(&self, z0: Complex64, z1: Complex64, steps: usize) -> Result<(f64, u64)> {
        let dz = z1 - z0;
        let taus: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        let values: Vec<Complex64> = taus.par_iter().map(|&tau| self.eval(z0 + dz * tau)).collect::<Result<_>>()?;
        let parts: Vec<(f64, u64)> = (0..steps)
            .into_par_iter()
            .map(|i| {
                let mut evals = 0;
                let d = self.track(z0, dz, taus[i], taus[i + 1], values[i], values[i + 1], &mut evals)?;
                Ok((d, evals))
            })
            .collect::<Result<_>>()?;
        let phase = parts.iter().map(|p| p.0).sum();
        let evals = parts.iter().map(|p| p.1).sum::<u64>() + values.len() as u64;
        Ok((phase, evals))
    }

    /// Winding number of `L` around the box with initial steps scaled by `refine`.
    fn winding(&self, contour: &Contour, refine: f64) -> Result<(f64, u64)> {
        let q = self.chi.modulus();
        let t_abs = contour.t_lo.abs().max(contour.t_hi.abs());
        let h_horizontal = 0.1f64.min(1.0 / (q as f64 * (t_abs + 3.0)).ln()) * refine;
        let h_vertical = zero_gap_estimate(q, t_abs) / 8.0 * refine;
        let width = contour.right - contour.sigma;
        let height = contour.t_hi - contour.t_lo;
        let nh = (width / h_horizontal).ceil().max(1.0) as usize;
        let nv = (height / h_vertical).ceil().max(1.0) as usize;
        let corners = [
            Complex64::new(contour.sigma, contour.t_lo),
            Complex64::new(contour.right, contour.t_lo),
            Complex64::new(contour.right, contour.t_hi),
            Complex64::new(contour.sigma, contour.t_hi),
        ];
        let edges = [(0, 1, nh), (1, 2, nv), (2, 3, nh), (3, 0, nv)];
        let parts: Vec<(f64, u64)> = edges
            .par_iter()
            .map(|&(i, j, n)| self.edge(corners[i], corners[j], n))
            .collect::<Result<_>>()?;
        let phase: f64 = parts.iter().map(|p| p.0).sum();
        Ok((phase / (2.0 * PI), parts.iter().map(|p| p.1).sum()))
    }
}

/// Zeros of `L(s, χ)` in `[σ, 1] + i[t_lo, t_hi]`, counted on `[σ, 1.5] + i[t_lo, t_hi]`.
pub fn count_zeros_box(chi: &DirichletCharacter, sigma: f64, t_lo: f64, t_hi: f64, tol: f64) -> Result<ZeroCountReport> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::Domain(format!("σ must lie in (1/2, 1), got {sigma}")));
    }
    if !(t_lo < t_hi && t_lo.is_finite() && t_hi.is_finite()) {
        return Err(Error::Domain(format!("need t_lo < t_hi, got [{t_lo}, {t_hi}]")));
    }
    let tracker = Tracker { chi, tol };
    let contour = Contour { sigma, right: RIGHT_EDGE, t_lo, t_hi };
    let (w, evals) = tracker.winding(&contour, 1.0).map_err(|e| e.context(chi.key()))?;
    let residual = (w - w.round()).abs();
    if !(residual < WINDING_TOLERANCE) || w.round() < 0.0 {
        return Err(Error::WindingRejected { residual });
    }
    let (w2, evals2) = tracker.winding(&contour, 0.5).map_err(|e| e.context(chi.key()))?;
    let residual2 = (w2 - w2.round()).abs();
    if !(residual2 < WINDING_TOLERANCE) {
        return Err(Error::WindingRejected { residual: residual2 });
    }
    if w2.round() != w.round() {
        return Err(Error::accuracy(
            format!("step-halving rerun for {} gives {} zeros instead of {}", chi.key(), w2.round(), w.round()),
            Some(w.round()),
        ));
    }
    Ok(ZeroCountReport {
        character: chi.key(),
        sigma,
        t_max: t_hi.abs().max(t_lo.abs()),
        count: w.round() as u64,
        winding_residual: residual.max(residual2),
        contour,
        evaluations: evals + evals2,
        rerun_count: w2.round() as u64,
    })
}

/// `N(σ, T, χ)` by the argument principle.
pub fn count_zeros_rectangle(chi: &DirichletCharacter, sigma: f64, t_max: f64, tol: f64) -> Result<ZeroCountReport> {
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    count_zeros_box(chi, sigma, -t_max, t_max, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalZero {
    pub character: CharacterKey,
    pub gamma: f64,
    pub width: f64,
    /// `|L(½ + iγ, χ)|` at the bracket midpoint.
    pub abs_l: f64,
}

/// `ε^{-1/2} Λ(½ + it, χ)` scaled by `|(q/π)^{z} Γ(z)|`, with its real part as `Z`.
struct HardyZ<'a> {
    chi: &'a DirichletCharacter,
    rotation: Complex64,
}

impl HardyZ<'_> {
    fn new(chi: &DirichletCharacter) -> Result<HardyZ<'_>> {
        Ok(HardyZ { chi, rotation: root_number(chi)?.sqrt().inv() })
    }

    /// Returns `(Z(t), |L|)`.
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let s = SPoint::critical(t);
        let l = l_value_afe(s, self.chi, 1e-12)?.value;
        let g = gamma_factor(s, self.chi)?;
        let scale = g.norm();
        let v = self.rotation * g / scale * l;
        if v.im.abs() > 1e-8 * l.norm().max(1.0) {
            return Err(Error::Internal(format!(
                "rotated Λ for {} at t={t} has imaginary part {:e}",
                self.chi.key(),
                v.im
            )));
        }
        Ok((v.re, l.norm()))
    }
}

/// Scan heights `±(offset·h₀ + Σ steps)` with steps of a gap estimate over 8, symmetric about 0.
fn scan_grid(q: u64, t_max: f64, offset: f64) -> Vec<f64> {
    let mut pos = Vec::new();
    let mut t = offset * zero_gap_estimate(q, 0.0) / 8.0;
    while t < t_max {
        pos.push(t);
        t += zero_gap_estimate(q, t) / 8.0;
    }
    pos.push(t_max);
    let mut grid: Vec<f64> = pos.iter().rev().map(|t| -t).collect();
    if pos[0] == 0.0 {
        grid.pop();
    }
    grid.extend(pos);
    grid
}

/// Sign changes of `Z_χ` on `[-T, T]`, bisected to width `1e-8`.
pub fn critical_line_zeros(chi: &DirichletCharacter, t_max: f64) -> Result<Vec<CriticalZero>> {
    critical_line_zeros_offset(chi, t_max, 0.0)
}

/// As [`critical_line_zeros`], with the scan grid shifted by `offset` of its first step.
pub fn critical_line_zeros_offset(chi: &DirichletCharacter, t_max: f64, offset: f64) -> Result<Vec<CriticalZero>> {
    if chi.is_principal() || !chi.is_primitive() {
        return Err(Error::Domain(format!("critical-line zeros need a primitive character, got {}", chi.key())));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("T must be positive, got {t_max}")));
    }
    let z = HardyZ::new(chi)?;
    let grid = scan_grid(chi.modulus(), t_max, offset);
    let values: Vec<f64> = grid.par_iter().map(|&t| z.eval(t).map(|v| v.0)).collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64, f64)> = (0..grid.len() - 1)
        .filter(|&i| values[i] == 0.0 || values[i] * values[i + 1] < 0.0)
        .map(|i| (grid[i], grid[i + 1], values[i]))
        .collect();
    brackets
        .into_par_iter()
        .map(|(mut a, mut b, mut za)| {
            if za == 0.0 {
                b = a;
            }
            while b - a > ZERO_WIDTH {
                let m = 0.5 * (a + b);
                let (zm, _) = z.eval(m)?;
                if zm == 0.0 {
                    a = m;
                    b = m;
                } else if zm * za < 0.0 {
                    b = m;
                } else {
                    a = m;
                    za = zm;
                }
            }
            let gamma = 0.5 * (a + b);
            let (_, abs_l) = z.eval(gamma)?;
            Ok(CriticalZero { character: chi.key(), gamma, width: b - a, abs_l })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorClass {
    R1,
    R2,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorReport {
    pub zero: CriticalZero,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `C log(qT)` with `T = max(|γ|, 2)`.
    pub u_range: f64,
    pub r1_value: f64,
    pub r2_value: f64,
    /// `Σ_{n ≥ 1} 𝔪_{X,n} χ(n) n^{-ρ} e^{-n/Y}`, truncated where the tail is negligible.
    pub smoothed_sum: Complex64,
    pub shifted_integral: Complex64,
    pub identity_residual: f64,
    pub quadrature_error: f64,
    pub class: DetectorClass,
}

/// Number of terms after which `τ(n) n^{-1/2} e^{-n/Y} < 1e-16` for all later `n`.
fn detector_cutoff(y: f64) -> u64 {
    (y * (2.0e16f64).ln()).ceil() as u64
}

/// The detector sums at `ρ = ½ + iγ` and the identity linking them.
pub fn detector_check(chi: &DirichletCharacter, zero: &CriticalZero, x: f64, y: f64, c: f64) -> Result<DetectorReport> {
    if chi.is_principal() || !chi.is_primitive() {
        return Err(Error::Domain(format!("detector needs a primitive character, got {}", chi.key())));
    }
    if !(x >= 2.0 && x <= y * y && y * y <= DETECTOR_CAP) {
        return Err(Error::Domain(format!("need 2 <= X <= Y^2 <= {DETECTOR_CAP}, got X={x}, Y={y}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("C must be positive, got {c}")));
    }
    let gamma = zero.gamma;
    let rho = SPoint::critical(gamma);
    let n_id = detector_cutoff(y).max((y * y).floor() as u64);
    let m = mollifier_coefficients(x, n_id)?;
    let term = |n: u64, a: i32| {
        Complex64::new(a as f64 * (-(n as f64) / y).exp(), 0.0)
    };
    let y2 = (y * y).floor() as u64;
    let r1 = crate::lfunc::dirichlet_polynomial_sparse(m.nonzero_in(x.floor() as u64, y2).map(|(n, a)| (n, term(n, a))), rho, Some(chi));
    let smoothed_sum = crate::lfunc::dirichlet_polynomial_sparse(m.nonzero_in(0, n_id).map(|(n, a)| (n, term(n, a))), rho, Some(chi));

    let base = rho.to_complex();
    let (shifted_integral, shift_error, _) =
        shifted_mellin_integral(|w| mollified_l(x, SPoint::from(base + w), chi), DETECTOR_SHIFT, y, &mellin_quad_options())?;

    let u_range = c * (chi.modulus() as f64 * gamma.abs().max(2.0)).ln();
    let ln_y = y.ln();
    let g = |u: f64| -> Result<Complex64> {
        let w = Complex64::new(0.0, u);
        Ok(mollified_l(x, SPoint::critical(gamma + u), chi)? * (ln_gamma(w)? + w * ln_y).exp())
    };
    let integrand = |u: f64| -> Result<Vec<f64>> {
        let v = g(u)? + g(-u)?;
        Ok(vec![v.re, v.im])
    };
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-12, max_depth: 16 };
    let r = combine(&integrate_segments(&integrand, &[0.0, u_range], 0.25, 2, &opts)?);
    check_total(&r, &opts).map_err(|e| e.context(format!("detector integral for {}", chi.key())))?;
    let r2 = Complex64::new(r.value[0], r.value[1]).norm() / (2.0 * PI);
    let r1_value = r1.norm();
    let class = match (r1_value >= DETECTOR_THRESHOLD, r2 >= DETECTOR_THRESHOLD) {
        (true, true) => DetectorClass::Both,
        (true, false) => DetectorClass::R1,
        (false, true) => DetectorClass::R2,
        (false, false) => DetectorClass::Neither,
    };
    Ok(DetectorReport {
        zero: zero.clone(),
        x,
        y,
        c,
        u_range,
        r1_value,
        r2_value: r2,
        smoothed_sum,
        shifted_integral,
        identity_residual: (smoothed_sum - shifted_integral).norm(),
        quadrature_error: shift_error + r.error / (2.0 * PI),
        class,
    })
}

/// Zero-density bounds at `(σ, Q, T)`, without the `(QT)^ε` factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDensityBounds {
    pub sigma: f64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    /// Quadratic family: `(QT)^{(7-6σ)/(6-4σ)}`.
    pub quadratic_classical: f64,
    /// Quadratic family, fourth-moment route.
    pub quadratic_fourth_moment: f64,
    /// Quadratic family, second-moment route.
    pub quadratic_second_moment: f64,
    /// Cubic family, fourth-moment route (stated for `T ≫ Q^{2/3}`).
    pub cubic_fourth_moment: f64,
    /// Quartic family, fourth-moment route (stated for `T ≫ Q^{1/2}`).
    pub quartic_fourth_moment: f64,
    /// Cubic and sextic families, second-moment route (stated for `T ≫ Q^{1/5}`).
    pub cubic_second_moment: f64,
    /// Quartic family, second-moment route (stated for `T ≫ Q^{1/5}`).
    pub quartic_second_moment: f64,
    /// `V = Q^{(4σ-3)/2} T^{(3σ-2)/2}`, the balancing parameter of the last terms.
    pub v_choice: f64,
    pub t_ge_q_one_fifth: bool,
    pub t_ge_q_half: bool,
    pub t_ge_q_two_thirds: bool,
}

impl ZeroDensityBounds {
    /// `(name, value)` pairs in a fixed order.
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("quadratic_classical", self.quadratic_classical),
            ("quadratic_fourth_moment", self.quadratic_fourth_moment),
            ("quadratic_second_moment", self.quadratic_second_moment),
            ("cubic_fourth_moment", self.cubic_fourth_moment),
            ("quartic_fourth_moment", self.quartic_fourth_moment),
            ("cubic_second_moment", self.cubic_second_moment),
            ("quartic_second_moment", self.quartic_second_moment),
        ]
    }
}

pub fn zero_density_bounds(sigma: f64, q: f64, t: f64) -> Result<ZeroDensityBounds> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::Domain(format!("σ must lie in (1/2, 1), got {sigma}")));
    }
    if !(q >= 2.0 && t >= 2.0 && q.is_finite() && t.is_finite()) {
        return Err(Error::Domain(format!("need Q, T >= 2, got Q={q}, T={t}")));
    }
    let s = sigma;
    let qt = q * t;
    let p = f64::powf;
    let t_second = p(t, 4.0 * (1.0 - s) / (3.0 - 2.0 * s));
    let last = p(p(q, 4.0) * p(t, 3.0), 1.0 - s);
    let fourth_t = p(t, (49.0 - 44.0 * s) / (22.0 - 8.0 * s));
    let fourth_tail = p(qt, 7.0 * (1.0 - s) / (2.0 * s));
    Ok(ZeroDensityBounds {
        sigma,
        q_param: q,
        t_max: t,
        quadratic_classical: p(qt, (7.0 - 6.0 * s) / (6.0 - 4.0 * s)),
        quadratic_fourth_moment: p(p(q, 3.0) * p(t, 4.0), (1.0 - s) / (2.0 - s)).min(p(qt, 3.0 * (1.0 - s) / s)),
        quadratic_second_moment: p(qt, 4.0 * (1.0 - s) / (3.0 - 2.0 * s)).min(last),
        cubic_fourth_moment: (p(q, (125.0 - 108.0 * s) / (90.0 - 72.0 * s)) * fourth_t).min(fourth_tail),
        quartic_fourth_moment: (p(q, (41.0 - 36.0 * s) / (30.0 - 24.0 * s)) * fourth_t).min(fourth_tail),
        cubic_second_moment: (p(q, (16.0 - 10.0 * s) / 9.0) * t_second)
            .min(p(q, 16.0 * (1.0 - s) / (9.0 - 6.0 * s)) * t_second)
            .min(last),
        quartic_second_moment: (p(q, (5.0 - 3.0 * s) / 3.0) * t_second)
            .min(p(q, 5.0 * (1.0 - s) / (3.0 - 2.0 * s)) * t_second)
            .min(last),
        v_choice: p(q, (4.0 * s - 3.0) / 2.0) * p(t, (3.0 * s - 2.0) / 2.0),
        t_ge_q_one_fifth: t >= p(q, 0.2),
        t_ge_q_half: t >= p(q, 0.5),
        t_ge_q_two_thirds: t >= p(q, 2.0 / 3.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyZeroReport {
    pub j: u64,
    #[serde(rename = "Q")]
    pub q_param: f64,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub total: u64,
    pub family_size: usize,
    pub per_character: Vec<ZeroCountReport>,
    pub bounds: Option<ZeroDensityBounds>,
}

/// `Σ_{χ ∈ O_j(Q)} N(σ, T, χ)`; a contour meeting a zero is retried at `σ ± 1e-4`.
pub fn family_zero_count(j: u64, q_param: f64, sigma: f64, t_max: f64) -> Result<FamilyZeroReport> {
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::Domain(format!("σ must lie in (1/2, 1), got {sigma}")));
    }
    let family = enumerate_family(j, q_param)?;
    let per_character: Vec<ZeroCountReport> = family
        .members
        .par_iter()
        .map(|chi| {
            let mut last = None;
            for s in [sigma, sigma + SIGMA_PERTURBATION, sigma - SIGMA_PERTURBATION] {
                match count_zeros_rectangle(chi, s, t_max, 1e-12) {
                    Err(e @ Error::NearZero(_)) => last = Some(e),
                    other => return other.map_err(|e| e.context(chi.key())),
                }
            }
            Err(last.expect("at least one attempt").context(chi.key()))
        })
        .collect::<Result<_>>()?;
    let bounds = if q_param >= 2.0 && t_max >= 2.0 { Some(zero_density_bounds(sigma, q_param, t_max)?) } else { None };
    Ok(FamilyZeroReport {
        j,
        q_param,
        sigma,
        t_max,
        total: per_character.iter().map(|r| r.count).sum(),
        family_size: family.len(),
        per_character,
        bounds,
    })
}

/// Greedy subsequence of zeros with consecutive ordinates at least `3 C log(qT)` apart.
pub fn spaced_zeros(zeros: &[CriticalZero], q: u64, t_max: f64, c: f64) -> Vec<CriticalZero> {
    let gap = 3.0 * c * (q as f64 * t_max.max(2.0)).ln();
    let mut out: Vec<CriticalZero> = Vec::new();
    for z in zeros {
        if out.last().is_none_or(|p| z.gamma - p.gamma >= gap) {
            out.push(z.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::{l_value_oracle, mollified_l};

    fn chi4() -> DirichletCharacter {
        DirichletCharacter::new(4, &[1]).unwrap()
    }

    fn cubic7() -> DirichletCharacter {
        DirichletCharacter::new(7, &[2]).unwrap()
    }

    #[test]
    fn counts_vanish() {
        let r = count_zeros_rectangle(&chi4(), 0.55, 10.0, 1e-12).unwrap();
        assert_eq!(r.count, 0);
        assert!(r.winding_residual < 1e-6);
        let c = cubic7();
        assert_eq!(c.order(), 3);
        let r = count_zeros_rectangle(&c, 0.6, 15.0, 1e-12).unwrap();
        assert_eq!((r.count, r.rerun_count), (0, 0));
    }

    #[test]
    fn halves_agree_for_real_characters() {
        let chi = DirichletCharacter::new(5, &[2]).unwrap();
        assert!(chi.is_real());
        let up = count_zeros_box(&chi, 0.55, 0.0, 8.0, 1e-12).unwrap();
        let down = count_zeros_box(&chi, 0.55, -8.0, 0.0, 1e-12).unwrap();
        assert_eq!(up.count, down.count);
    }

    #[test]
    fn sigma_outside_range_is_rejected() {
        assert!(matches!(count_zeros_box(&chi4(), 0.4, -1.0, 1.0, 1e-12), Err(Error::Domain(_))));
    }

    #[test]
    fn winding_sees_critical_zeros() {
        // the box [0.3, 1.5] + i[5, 11] holds the zeros near 6.02, 10.24 of the character mod 4
        let tracker = Tracker { chi: &chi4(), tol: 1e-12 };
        let contour = Contour { sigma: 0.3, right: RIGHT_EDGE, t_lo: 5.0, t_hi: 11.0 };
        let (w, _) = tracker.winding(&contour, 1.0).unwrap();
        assert!((w - 2.0).abs() < 1e-9, "{w}");
    }

    #[test]
    fn critical_zeros_of_chi4() {
        let zeros = critical_line_zeros(&chi4(), 15.0).unwrap();
        assert!(!zeros.is_empty());
        for z in &zeros {
            let l = l_value_oracle(SPoint::critical(z.gamma), &chi4()).unwrap().value.norm();
            assert!(l <= 1e-6, "γ = {}: |L| = {l:e}", z.gamma);
            assert!(z.width <= ZERO_WIDTH);
        }
        // first zero of L(s, χ_{-4}) is at 6.0209489...
        assert!(zeros.iter().any(|z| (z.gamma - 6.020_948_904_697_597).abs() < 1e-7));
        let shifted = critical_line_zeros_offset(&chi4(), 15.0, 0.5).unwrap();
        assert_eq!(shifted.len(), zeros.len());
        for (a, b) in zeros.iter().zip(&shifted) {
            assert!((a.gamma - b.gamma).abs() < 1e-7);
        }
    }

    #[test]
    fn conjugate_zeros_mirror() {
        let c = cubic7();
        let a = critical_line_zeros(&c, 12.0).unwrap();
        let b = critical_line_zeros(&c.conjugate(), 12.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter().rev()) {
            assert!((x.gamma + y.gamma).abs() < 1e-7, "{} vs {}", x.gamma, y.gamma);
        }
    }

    #[test]
    fn detector_at_first_zero() {
        let zeros = critical_line_zeros(&chi4(), 10.0).unwrap();
        let first = zeros.iter().filter(|z| z.gamma > 0.0).min_by(|a, b| a.gamma.total_cmp(&b.gamma)).unwrap();
        let r = detector_check(&chi4(), first, 10.0, 30.0, 2.0).unwrap();
        assert!(r.identity_residual <= 1e-6, "{r:?}");
        assert!(r.r1_value + r.r2_value >= 0.8, "{r:?}");
    }

    #[test]
    fn detector_off_zero_picks_up_residue() {
        let t = 3.0;
        let fake = CriticalZero { character: chi4().key(), gamma: t, width: 0.0, abs_l: 0.0 };
        let r = detector_check(&chi4(), &fake, 10.0, 30.0, 2.0).unwrap();
        let residue = mollified_l(10.0, SPoint::critical(t), &chi4()).unwrap().norm();
        assert!(residue > 0.1);
        assert!((r.identity_residual - residue).abs() <= 1e-6, "{} vs {residue}", r.identity_residual);
    }

    #[test]
    fn density_examples() {
        let b = zero_density_bounds(0.75, 10.0, 10.0).unwrap();
        let expected = 100f64.powf(2.0 / 3.0);
        assert!((b.quadratic_second_moment - expected).abs() <= 1e-12 * expected);
        assert!((b.quadratic_second_moment - 21.54).abs() < 0.01);
        let classical = 100f64.powf(5.0 / 6.0);
        assert!((b.quadratic_classical - classical).abs() <= 1e-12 * classical);
        assert!(b.quadratic_second_moment <= b.quadratic_classical);
        assert!(zero_density_bounds(1.0, 10.0, 10.0).is_err());
        assert!(zero_density_bounds(0.5, 10.0, 10.0).is_err());
        let near_one = zero_density_bounds(1.0 - 1e-9, 50.0, 70.0).unwrap();
        for (name, v) in near_one.named().into_iter().skip(1) {
            assert!((v - 1.0).abs() < 1e-6, "{name}: {v}");
        }
    }

    #[test]
    fn second_moment_route_beats_classical() {
        for i in 0..5 {
            let sigma = 0.55 + 0.1 * i as f64;
            for q in [2.0, 10.0, 100.0] {
                for t in [2.0, 10.0, 100.0] {
                    let b = zero_density_bounds(sigma, q, t).unwrap();
                    assert!(b.quadratic_second_moment <= b.quadratic_classical, "σ={sigma} Q={q} T={t}");
                }
            }
        }
    }

    #[test]
    fn family_counts() {
        let r = family_zero_count(2, 10.0, 0.55, 10.0).unwrap();
        assert_eq!(r.total, 0);
        let b = r.bounds.unwrap();
        assert!(b.named().iter().all(|&(_, v)| v > 0.0));
        let hi = family_zero_count(2, 10.0, 0.7, 10.0).unwrap();
        assert!(hi.total <= r.total);
        let empty = family_zero_count(3, 2.0, 0.6, 5.0).unwrap();
        assert_eq!((empty.total, empty.family_size), (0, 0));
    }

    #[test]
    fn spacing_subsample() {
        let zeros = critical_line_zeros(&chi4(), 30.0).unwrap();
        let spaced = spaced_zeros(&zeros, 4, 30.0, 0.2);
        let gap = 0.6 * (120f64).ln();
        assert!(spaced.windows(2).all(|w| w[1].gamma - w[0].gamma >= gap));
        assert_eq!(spaced[0], zeros[0]);
    }
}
