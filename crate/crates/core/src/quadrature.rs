//! Adaptive 21-point Gauss–Kronrod quadrature and nested cubature.
//!
//! The 1D integrator bisects the interval with the largest error estimate
//! until the requested tolerance is met, QUADPACK style. Multi-dimensional
//! integrals are computed by nesting the 1D integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// 10-point Gauss weights, paired with the odd Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-300, max_subdivisions: 500 }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One 21-point Kronrod panel on [a, b]; returns (value, error estimate).
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_k - res_g) * half;
    let abs_half = half.abs();
    (res_k * half, rescale_error(err, res_abs * abs_half, res_asc * abs_half))
}

/// Integrates `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> QuadResult {
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrates over the interval spanned by `points` (sorted), using them as
/// the initial partition. Points outside the outer bounds are ignored.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    cfg: &QuadConfig,
) -> QuadResult {
    assert!(points.len() >= 2, "need at least the two end points");
    let lo = points[0];
    let hi = points[points.len() - 1];
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| *p >= lo && *p <= hi).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
    }

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let (v, e) = gk21(&mut f, w[0], w[1]);
        evaluations += 21;
        total += v;
        total_err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }

    let mut subdivisions = heap.len();
    loop {
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol {
            return QuadResult { value: total, abs_error: total_err, evaluations, converged: true };
        }
        if subdivisions >= cfg.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, mid);
        let (v2, e2) = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        subdivisions += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed drift from the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let abs_error: f64 = heap.iter().map(|s| s.error).sum();
    let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    QuadResult { value, abs_error, evaluations, converged: abs_error <= tol }
}

/// Axis description for [`integrate_nested`]: the outer bounds come first and
/// last in `breaks`, interior entries are extra partition points.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub breaks: Vec<f64>,
}

impl Axis {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { breaks: vec![lo, hi] }
    }

    /// Adds partition points that fall strictly inside the bounds.
    pub fn with_breaks(mut self, extra: &[f64]) -> Self {
        let lo = self.breaks[0];
        let hi = *self.breaks.last().unwrap();
        for &p in extra {
            if p > lo && p < hi {
                self.breaks.push(p);
            }
        }
        self.breaks.sort_by(f64::total_cmp);
        self.breaks.dedup();
        self
    }
}

/// Nested adaptive integration over a box; axis 0 is the outermost.
///
/// Inner integrals are requested at a tenth of the outer relative tolerance.
/// The returned error adds the outer estimate to the largest inner estimate
/// times the outer length.
pub fn integrate_nested<F: Fn(&[f64]) -> f64>(f: &F, axes: &[Axis], cfg: &QuadConfig) -> QuadResult {
    let mut point = vec![0.0; axes.len()];
    nested_level(f, axes, 0, &mut point, cfg)
}

fn nested_level<F: Fn(&[f64]) -> f64>(
    f: &F,
    axes: &[Axis],
    level: usize,
    point: &mut [f64],
    cfg: &QuadConfig,
) -> QuadResult {
    let axis = &axes[level];
    if level + 1 == axes.len() {
        return integrate_with_breaks(
            |x| {
                point[level] = x;
                f(point)
            },
            &axis.breaks,
            cfg,
        );
    }
    let inner_cfg = QuadConfig { rel_tol: 0.1 * cfg.rel_tol, ..*cfg };
    let mut worst_inner = 0.0_f64;
    let mut all_inner = true;
    let mut evaluations = 0;
    let mut scratch = point.to_vec();
    let outer = integrate_with_breaks(
        |x| {
            scratch[level] = x;
            let r = nested_level(f, axes, level + 1, &mut scratch, &inner_cfg);
            worst_inner = worst_inner.max(r.abs_error);
            all_inner &= r.converged;
            evaluations += r.evaluations;
            r.value
        },
        &axis.breaks,
        cfg,
    );
    let length = axis.breaks[axis.breaks.len() - 1] - axis.breaks[0];
    QuadResult {
        value: outer.value,
        abs_error: outer.abs_error + worst_inner * length,
        evaluations,
        converged: outer.converged && all_inner,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn kronrod_weights_integrate_constants() {
        let sum: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert_relative_eq!(sum, 2.0, epsilon = 1e-15);
        let gsum: f64 = 2.0 * WG.iter().sum::<f64>();
        assert_relative_eq!(gsum, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn polynomial_is_exact_in_one_panel() {
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), 0.0, 1.0, &QuadConfig::default());
        assert_relative_eq!(r.value, 1.0 / 21.0 - 3.0 / 8.0, epsilon = 1e-15);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // integral of ln x on (0, 1] is -1
        let r = integrate(f64::ln, 0.0, 1.0, &QuadConfig::with_rel_tol(1e-12));
        assert!(r.converged);
        assert_relative_eq!(r.value, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn breaks_help_with_kinks() {
        let r = integrate_with_breaks(|x: f64| x.abs().sqrt(), &[-1.0, 0.0, 1.0], &QuadConfig::default());
        assert!(r.converged);
        assert_relative_eq!(r.value, 4.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn nested_gaussian_volume() {
        let axes = vec![Axis::new(-9.0, 9.0), Axis::new(-9.0, 9.0), Axis::new(-9.0, 9.0)];
        let f = |p: &[f64]| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 2.0).exp();
        let r = integrate_nested(&f, &axes, &QuadConfig::with_rel_tol(1e-10));
        assert!(r.converged);
        assert_relative_eq!(r.value, (2.0 * PI).powf(1.5), max_relative = 1e-10);
    }

    #[test]
    fn axis_breaks_are_clipped() {
        let a = Axis::new(0.0, 1.0).with_breaks(&[-1.0, 0.5, 0.5, 2.0]);
        assert_eq!(a.breaks, vec![0.0, 0.5, 1.0]);
    }
}
