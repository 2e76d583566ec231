//! Composite Gauss–Legendre quadrature for vector-valued integrands.
//!
//! Each panel is integrated with 16 nodes; the 8-node rule on the same panel
//! provides the error estimate, and panels bisect until the estimate meets
//! the tolerance. Panels run in parallel and are reduced in index order, so
//! results are identical for any number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};

const GL16_NODES: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisection depth below an initial panel.
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-10, abs_tol: 1e-14, max_depth: 12 }
    }
}

/// Integral over one interval between consecutive edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub value: Vec<f64>,
    pub error: f64,
    /// Error estimate per component; sums to `error`.
    pub component_errors: Vec<f64>,
    pub evaluations: usize,
    /// False if some panel hit the depth limit before meeting its tolerance.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub component_errors: Vec<f64>,
    pub evaluations: usize,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

struct Panel {
    value: Vec<f64>,
    errors: Vec<f64>,
    evaluations: usize,
    converged: bool,
}

fn rule<F>(f: &F, a: f64, b: f64, dim: usize) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut hi = vec![0.0; dim];
    let mut lo = vec![0.0; dim];
    let accumulate = |out: &mut Vec<f64>, x: f64, w: f64| -> Result<()> {
        let v = f(x)?;
        if v.len() != dim {
            return Err(Error::Internal(format!("integrand returned {} values, expected {dim}", v.len())));
        }
        for (o, y) in out.iter_mut().zip(v) {
            *o += w * half * y;
        }
        Ok(())
    };
    for (&x, &w) in GL16_NODES.iter().zip(&GL16_WEIGHTS) {
        accumulate(&mut hi, mid - half * x, w)?;
        accumulate(&mut hi, mid + half * x, w)?;
    }
    for (&x, &w) in GL8_NODES.iter().zip(&GL8_WEIGHTS) {
        accumulate(&mut lo, mid - half * x, w)?;
        accumulate(&mut lo, mid + half * x, w)?;
    }
    Ok((hi, lo))
}

fn adaptive<F>(f: &F, a: f64, b: f64, dim: usize, abs_share: f64, opts: &QuadOptions, depth: u32) -> Result<Panel>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let (hi, lo) = rule(f, a, b, dim)?;
    let errors: Vec<f64> = hi.iter().zip(&lo).map(|(x, y)| (x - y).abs()).collect();
    let error: f64 = errors.iter().sum();
    let target = (opts.rel_tol * l1(&hi)).max(abs_share);
    if error <= target || depth >= opts.max_depth {
        return Ok(Panel { value: hi, errors, evaluations: 24, converged: error <= target });
    }
    let mid = 0.5 * (a + b);
    let left = adaptive(f, a, mid, dim, 0.5 * abs_share, opts, depth + 1)?;
    let right = adaptive(f, mid, b, dim, 0.5 * abs_share, opts, depth + 1)?;
    let value = left.value.iter().zip(&right.value).map(|(x, y)| x + y).collect();
    let errors = left.errors.iter().zip(&right.errors).map(|(x, y)| x + y).collect();
    Ok(Panel {
        value,
        errors,
        evaluations: 24 + left.evaluations + right.evaluations,
        converged: left.converged && right.converged,
    })
}

/// Integrates `f: R -> R^dim` over each interval `[edges[i], edges[i+1]]`.
///
/// Every interval is cut into equal initial panels no wider than `max_width`.
pub fn integrate_segments<F>(
    f: &F,
    edges: &[f64],
    max_width: f64,
    dim: usize,
    opts: &QuadOptions,
) -> Result<Vec<Segment>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] <= w[1])) || !(max_width > 0.0) {
        return Err(Error::Domain("quadrature edges must be sorted and panels positive".into()));
    }
    let total = edges[edges.len() - 1] - edges[0];
    let mut panels = Vec::new();
    for (seg, w) in edges.windows(2).enumerate() {
        let len = w[1] - w[0];
        if len == 0.0 {
            continue;
        }
        let count = (len / max_width).ceil().max(1.0) as usize;
        let h = len / count as f64;
        for i in 0..count {
            let a = w[0] + i as f64 * h;
            let b = if i + 1 == count { w[1] } else { w[0] + (i + 1) as f64 * h };
            panels.push((seg, a, b));
        }
    }
    let results: Vec<Panel> = panels
        .par_iter()
        .map(|&(_, a, b)| {
            let share = if total > 0.0 { opts.abs_tol * (b - a) / total } else { opts.abs_tol };
            adaptive(f, a, b, dim, share, opts, 0)
        })
        .collect::<Result<_>>()?;
    let mut segments: Vec<Segment> = edges
        .windows(2)
        .map(|w| Segment {
            a: w[0],
            b: w[1],
            value: vec![0.0; dim],
            error: 0.0,
            component_errors: vec![0.0; dim],
            evaluations: 0,
            converged: true,
        })
        .collect();
    for (&(seg, _, _), panel) in panels.iter().zip(results) {
        let s = &mut segments[seg];
        for (x, y) in s.value.iter_mut().zip(&panel.value) {
            *x += y;
        }
        for (x, y) in s.component_errors.iter_mut().zip(&panel.errors) {
            *x += y;
        }
        s.error = s.component_errors.iter().sum();
        s.evaluations += panel.evaluations;
        s.converged &= panel.converged;
    }
    Ok(segments)
}

/// `∫_a^b f`, failing with an accuracy error when the total estimate misses the tolerance.
pub fn integrate<F>(f: &F, a: f64, b: f64, max_width: f64, dim: usize, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let seg = integrate_segments(f, &[a, b], max_width, dim, opts)?.remove(0);
    let result = QuadResult {
        value: seg.value,
        error: seg.error,
        component_errors: seg.component_errors,
        evaluations: seg.evaluations,
    };
    check_total(&result, opts)?;
    Ok(result)
}

/// Accuracy check on a combined result: `error ≤ rel_tol · ‖value‖₁ + abs_tol`.
pub fn check_total(result: &QuadResult, opts: &QuadOptions) -> Result<()> {
    let target = opts.rel_tol * l1(&result.value) + opts.abs_tol;
    if result.error > target {
        return Err(Error::accuracy(
            format!("quadrature error {:.3e} above target {:.3e}", result.error, target),
            Some(l1(&result.value)),
        ));
    }
    Ok(())
}

/// Sums consecutive segments into one result.
pub fn combine(segments: &[Segment]) -> QuadResult {
    let dim = segments.first().map_or(0, |s| s.value.len());
    let mut value = vec![0.0; dim];
    let mut component_errors = vec![0.0; dim];
    let mut evaluations = 0;
    for s in segments {
        for (x, y) in value.iter_mut().zip(&s.value) {
            *x += y;
        }
        for (x, y) in component_errors.iter_mut().zip(&s.component_errors) {
            *x += y;
        }
        evaluations += s.evaluations;
    }
    let error = component_errors.iter().sum();
    QuadResult { value, error, component_errors, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let w16: f64 = 2.0 * GL16_WEIGHTS.iter().sum::<f64>();
        let w8: f64 = 2.0 * GL8_WEIGHTS.iter().sum::<f64>();
        assert!((w16 - 2.0).abs() < 1e-15);
        assert!((w8 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_on_polynomials() {
        let f = |x: f64| Ok(vec![x.powi(31), x.powi(14) - 3.0 * x]);
        let (hi, _) = rule(&f, -1.0, 2.0, 2).unwrap();
        let exact31 = (2f64.powi(32) - 1.0) / 32.0;
        let exact14 = (2f64.powi(15) + 1.0) / 15.0 - 1.5 * (4.0 - 1.0);
        assert!((hi[0] - exact31).abs() < 1e-9 * exact31);
        assert!((hi[1] - exact14).abs() < 1e-11 * exact14.abs());
    }

    #[test]
    fn oscillatory_integral() {
        let f = |x: f64| Ok(vec![(x * 7.0).cos(), x.exp()]);
        let r = integrate(&f, 0.0, 10.0, 0.25, 2, &QuadOptions::default()).unwrap();
        assert!((r.value[0] - (70f64).sin() / 7.0).abs() < 1e-12);
        assert!((r.value[1] - (10f64.exp() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn segments_add_up() {
        let f = |x: f64| Ok(vec![1.0 / (1.0 + x * x)]);
        let segs = integrate_segments(&f, &[-5.0, -1.0, 1.0, 5.0], 0.3, 1, &QuadOptions::default()).unwrap();
        let total = combine(&segs);
        assert!((total.value[0] - 2.0 * 5f64.atan()).abs() < 1e-12);
        assert!((segs[1].value[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| Ok(vec![1e-4 / (x * x + 1e-8)]);
        let r = integrate(&f, -1.0, 1.0, 0.25, 1, &QuadOptions { max_depth: 40, ..Default::default() }).unwrap();
        let exact = 2.0 * 1e-4 / 1e-4 * (1.0f64 / 1e-4).atan();
        assert!((r.value[0] - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn unreachable_tolerance_is_an_error() {
        let f = |x: f64| Ok(vec![1e-4 / (x * x + 1e-8)]);
        let opts = QuadOptions { max_depth: 1, ..Default::default() };
        assert!(matches!(integrate(&f, -1.0, 1.0, 0.25, 1, &opts), Err(Error::Accuracy { partial: Some(_), .. })));
    }
}
