//! Fixing the variational frequencies by minimal sensitivity.
//!
//! At finite temperature W₁ is stationary at a saddle: a maximum in Ω⊥1 and a
//! minimum in (Ω⊥2, Ω∥). Minimizing over all three runs off to infinity, so
//! `minimize_w1` solves the nested problem min over (Ω⊥2, Ω∥) of max over Ω⊥1.
//! W₁ is even in Ω⊥2 and in Ω∥, which makes the bound at zero a mirror plane
//! and lets central differences straddle it.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::effective_potential::components_raw;
use crate::error::{check_field, Result, VptError};
use crate::greens::{FrequencyTriple, ThermoState};
use crate::jet::Jet;
use crate::smearing::{inverse_distance_zero_t_jet, Position};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Projected gradient norm accepted as stationary.
    pub tol_grad: f64,
    /// Relative step below which the iteration stops.
    pub tol_step: f64,
    pub max_iter: usize,
    pub n_multistart: usize,
    pub seed: u64,
    /// Include the Coulomb interaction (off gives the pure-field problem).
    pub coulomb: bool,
    /// Run the multi-starts on the rayon pool.
    pub parallel: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { tol_grad: 1e-6, tol_step: 1e-12, max_iter: 200, n_multistart: 4, seed: 0, coulomb: true, parallel: false }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.tol_grad) || !pos(self.tol_step) {
            return Err(VptError::Domain("optimizer tolerances must be positive".into()));
        }
        if self.n_multistart == 0 || self.max_iter == 0 {
            return Err(VptError::Domain("n_multistart and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub omega_opt: FrequencyTriple,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Second-order certificate of the stationary point (see `minimize_w1`).
    pub hessian_psd: bool,
    pub grad_norm: f64,
}

/// Ω = 32/(9π): transverse optimum of the field-free ground state.
pub const HYDROGEN_OMEGA: f64 = 32.0 / (9.0 * PI);

const PSD_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// scalar and simplex helpers

/// Brent minimization of `f` on [a, b]. Returns (x, f(x)).
pub(crate) fn brent_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    const CGOLD: f64 = 0.381_966_011_250_105;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut x = a + CGOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    for _ in 0..max_iter {
        let xm = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-14;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

/// Nelder–Mead on an unconstrained function of two variables.
pub(crate) fn nelder_mead<F: FnMut(&[f64; 2]) -> f64>(
    mut f: F,
    start: [f64; 2],
    scale: f64,
    ftol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut pts = [start, [start[0] + scale, start[1]], [start[0], start[1] + scale]];
    let mut vals = [f(&pts[0]), f(&pts[1]), f(&pts[2])];
    let nan_high = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    for _ in 0..max_iter {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| nan_high(vals[i]).total_cmp(&nan_high(vals[j])));
        pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];
        if (nan_high(vals[2]) - vals[0]).abs() <= ftol * (1.0 + vals[0].abs()) {
            break;
        }
        let c = [(pts[0][0] + pts[1][0]) / 2.0, (pts[0][1] + pts[1][1]) / 2.0];
        let along = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
        } else {
            let t = if fr < nan_high(vals[2]) { -0.5 } else { 0.5 };
            let xc = along(t);
            let fc = f(&xc);
            if fc < fr.min(nan_high(vals[2])) {
                pts[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    pts[k] = [(pts[0][0] + pts[k][0]) / 2.0, (pts[0][1] + pts[k][1]) / 2.0];
                    vals[k] = f(&pts[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| nan_high(vals[i]).total_cmp(&nan_high(vals[j]))).unwrap_or(0);
    (pts[best], vals[best])
}

// Modified Newton step -H̃⁻¹g where H̃ has the absolute eigenvalues of H.
fn newton_step(h: &Matrix2<f64>, g: &Vector2<f64>) -> Vector2<f64> {
    let eig = SymmetricEigen::new(*h);
    let top = eig.eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let floor = 1e-8 * top;
    let mut step = Vector2::zeros();
    for k in 0..2 {
        let v = eig.eigenvectors.column(k);
        let lam = eig.eigenvalues[k].abs().max(floor);
        step -= v * (v.dot(g) / lam);
    }
    step
}

fn min_eigenvalue(h: &Matrix2<f64>) -> (f64, Vector2<f64>) {
    let eig = SymmetricEigen::new(*h);
    let k = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

// ---------------------------------------------------------------------------
// finite-temperature W₁

struct Saddle<'a> {
    beta: f64,
    omega_c: f64,
    x0: &'a Position,
    coulomb: bool,
}

impl Saddle<'_> {
    fn w(&self, o1: f64, o2: f64, op: f64) -> f64 {
        components_raw(self.beta, self.omega_c, [o1, o2.abs(), op.abs()], self.x0, self.coulomb)
            .map(|c| c.total)
            .unwrap_or(f64::NAN)
    }

    /// max over Ω⊥1 ≥ 0 at fixed (Ω⊥2, Ω∥). Returns (value, Ω⊥1).
    fn inner(&self, o2: f64, op: f64) -> (f64, f64) {
        let (o2, op) = (o2.abs(), op.abs());
        let mut upper = 2.0 * o2.max(self.omega_c) + 1.0;
        const N: usize = 16;
        for _ in 0..8 {
            let xs: Vec<f64> = (0..=N).map(|i| upper * i as f64 / N as f64).collect();
            let fs: Vec<f64> = xs.iter().map(|&x| self.w(x, o2, op)).collect();
            let k = (0..=N)
                .max_by(|&i, &j| fs[i].total_cmp(&fs[j]).then(j.cmp(&i)))
                .unwrap_or(0);
            if k == N && fs[N].is_finite() {
                upper *= 2.0;
                continue;
            }
            let lo = xs[k.saturating_sub(1)];
            let hi = xs[(k + 1).min(N)];
            let (x, negf) = brent_min(|x| -self.w(x, o2, op), lo, hi, 1e-10, 200);
            return if -negf >= fs[k] { (-negf, x) } else { (fs[k], xs[k]) };
        }
        (f64::NAN, upper)
    }

    fn outer(&self, p: &[f64; 2]) -> f64 {
        self.inner(p[0], p[1]).0
    }

    fn gradient(&self, p: &[f64; 2]) -> Vector2<f64> {
        let mut g = Vector2::zeros();
        for i in 0..2 {
            let h = 1e-6 * (1.0 + p[i].abs());
            let (mut a, mut b) = (*p, *p);
            a[i] += h;
            b[i] -= h;
            g[i] = (self.outer(&a) - self.outer(&b)) / (2.0 * h);
        }
        g
    }

    fn hessian(&self, p: &[f64; 2], f0: f64) -> Matrix2<f64> {
        let h = [1e-4 * (1.0 + p[0].abs()), 1e-4 * (1.0 + p[1].abs())];
        let at = |d0: f64, d1: f64| self.outer(&[p[0] + d0, p[1] + d1]);
        let h00 = (at(h[0], 0.0) - 2.0 * f0 + at(-h[0], 0.0)) / (h[0] * h[0]);
        let h11 = (at(0.0, h[1]) - 2.0 * f0 + at(0.0, -h[1])) / (h[1] * h[1]);
        let h01 = (at(h[0], h[1]) - at(h[0], -h[1]) - at(-h[0], h[1]) + at(-h[0], -h[1])) / (4.0 * h[0] * h[1]);
        Matrix2::new(h00, h01, h01, h11)
    }

    /// (∂W/∂Ω⊥1 projected on Ω⊥1 ≥ 0, ∂²W/∂Ω⊥1²) at the inner optimum.
    fn inner_derivatives(&self, o1: f64, o2: f64, op: f64) -> (f64, f64) {
        let h = 1e-6 * (1.0 + o1);
        let hc = 1e-4 * (1.0 + o1);
        let w0 = self.w(o1, o2, op);
        if o1 > hc {
            let g = (self.w(o1 + h, o2, op) - self.w(o1 - h, o2, op)) / (2.0 * h);
            let c = (self.w(o1 + hc, o2, op) - 2.0 * w0 + self.w(o1 - hc, o2, op)) / (hc * hc);
            (g, c)
        } else {
            // one-sided at the bound; a maximum there needs ∂W/∂Ω⊥1 ≤ 0
            let g = (-3.0 * w0 + 4.0 * self.w(o1 + h, o2, op) - self.w(o1 + 2.0 * h, o2, op)) / (2.0 * h);
            (g.max(0.0), f64::NEG_INFINITY)
        }
    }

    fn descend(&self, start: [f64; 2], cfg: &OptimizerConfig) -> OptimizationResult {
        let mut p = [start[0].abs(), start[1].abs()];
        let mut f = self.outer(&p);
        let mut iterations = 0;
        let mut stalled = false;
        while iterations < cfg.max_iter {
            iterations += 1;
            let g = self.gradient(&p);
            let gn = g.norm();
            let hess = self.hessian(&p, f);
            if gn <= cfg.tol_grad {
                // stationary; leave only if some direction curves down
                let (lam, v) = min_eigenvalue(&hess);
                if lam >= -PSD_TOL {
                    break;
                }
                match self.curvature_escape(&p, f, &v) {
                    Some((q, fq)) => {
                        p = q;
                        f = fq;
                        continue;
                    }
                    None => break,
                }
            }
            let step = newton_step(&hess, &g);
            let cap = 0.5 * (1.0 + p[0].abs().max(p[1].abs()));
            let scale = if step.norm() > cap { cap / step.norm() } else { 1.0 };
            let mut t = scale;
            let mut accepted = None;
            for _ in 0..40 {
                let q = [(p[0] + t * step[0]).abs(), (p[1] + t * step[1]).abs()];
                let fq = self.outer(&q);
                if fq < f {
                    accepted = Some((q, fq));
                    break;
                }
                t *= 0.5;
            }
            let (q, fq) = match accepted {
                Some(v) => v,
                None => {
                    let s = 1e-2 * (1.0 + p[0].abs().max(p[1].abs()));
                    let (q, fq) = nelder_mead(|x| self.outer(x), p, s, 1e-15, 400);
                    let q = [q[0].abs(), q[1].abs()];
                    if fq < f {
                        (q, fq)
                    } else {
                        stalled = true;
                        break;
                    }
                }
            };
            let moved = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            p = q;
            f = fq;
            if moved <= cfg.tol_step * (1.0 + p[0].max(p[1])) {
                stalled = true;
                break;
            }
        }
        let _ = stalled;
        self.certify(p, iterations, cfg)
    }

    // Try moving along a negative-curvature direction.
    fn curvature_escape(&self, p: &[f64; 2], f: f64, v: &Vector2<f64>) -> Option<([f64; 2], f64)> {
        let mut best: Option<([f64; 2], f64)> = None;
        let base = 1.0 + p[0].abs().max(p[1].abs());
        for k in 0..30 {
            let t = base * 0.5_f64.powi(k);
            for s in [1.0, -1.0] {
                let q = [(p[0] + s * t * v[0]).abs(), (p[1] + s * t * v[1]).abs()];
                let fq = self.outer(&q);
                if fq < f && best.map_or(true, |b| fq < b.1) {
                    best = Some((q, fq));
                }
            }
            if best.is_some() {
                break;
            }
        }
        best
    }

    fn certify(&self, p: [f64; 2], iterations: usize, cfg: &OptimizerConfig) -> OptimizationResult {
        let (value, o1) = self.inner(p[0], p[1]);
        let g = self.gradient(&p);
        let (g1, c1) = self.inner_derivatives(o1, p[0], p[1]);
        let grad_norm = (g.norm_squared() + g1 * g1).sqrt();
        let hess = self.hessian(&p, value);
        // Coordinates sitting on the bound are active; by evenness their
        // gradient vanishes and only the remaining block must be convex.
        let free: Vec<usize> = (0..2).filter(|&i| p[i] > 1e-4 * (1.0 + p[i])).collect();
        let outer_ok = match free.len() {
            2 => min_eigenvalue(&hess).0 >= -PSD_TOL,
            1 => hess[(free[0], free[0])] >= -PSD_TOL,
            _ => true,
        } && (0..2).all(|i| free.contains(&i) || hess[(i, i)] >= -PSD_TOL);
        let inner_ok = c1 <= PSD_TOL;
        let converged = value.is_finite() && grad_norm <= cfg.tol_grad;
        OptimizationResult {
            omega_opt: FrequencyTriple::new(o1, p[0], p[1]).unwrap_or_else(|_| nan_triple()),
            value,
            iterations,
            converged,
            hessian_psd: outer_ok && inner_ok,
            grad_norm,
        }
    }
}

fn nan_triple() -> FrequencyTriple {
    // only reached if the search produced non-finite frequencies
    FrequencyTriple::new(0.0, 0.0, 0.0).expect("zero is a valid frequency")
}

fn better(a: &OptimizationResult, b: &OptimizationResult) -> Ordering {
    // converged first, then lower value, then lexicographic on Ω
    b.converged
        .cmp(&a.converged)
        .then(a.value.total_cmp(&b.value))
        .then_with(|| {
            let (x, y) = (a.omega_opt.as_array(), b.omega_opt.as_array());
            x.iter().zip(y.iter()).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
        })
}

/// Starting points (Ω⊥2, Ω∥) for the outer search.
fn starts(state: &ThermoState, cfg: &OptimizerConfig, warm: Option<&FrequencyTriple>) -> Vec<[f64; 2]> {
    let wc = state.omega_c();
    let mut out = Vec::new();
    if let Some(w) = warm {
        out.push([w.omega_perp2(), w.omega_par()]);
    }
    let mut fixed = vec![[wc, 0.0], [HYDROGEN_OMEGA, HYDROGEN_OMEGA / 2.0]];
    if cfg.coulomb {
        if let Ok(gs) = minimize_ground_state(wc, &OptimizerConfig { coulomb: true, ..*cfg }) {
            fixed.push([gs.omega_opt.omega_perp2(), gs.omega_opt.omega_par()]);
        }
    }
    out.extend(fixed.into_iter().take(cfg.n_multistart));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span = 2.0 * (1.0 + wc);
    while out.len() < cfg.n_multistart + usize::from(warm.is_some()) {
        out.push([rng.gen_range(0.0..span), rng.gen_range(0.0..span)]);
    }
    out
}

/// Stationary point of W₁(Ω; x₀) by minimal sensitivity.
///
/// The returned point maximizes W₁ over Ω⊥1 and minimizes the result over
/// (Ω⊥2, Ω∥) ≥ 0. Derivatives are central differences with step
/// 10⁻⁶(1 + |Ω|). `converged` means the projected gradient in all three
/// frequencies is below `tol_grad`; `hessian_psd` certifies the saddle type:
/// the (Ω⊥2, Ω∥) Hessian of the inner maximum is positive semidefinite on the
/// free coordinates and ∂²W₁/∂Ω⊥1² ≤ 0.
pub fn minimize_w1(state: &ThermoState, x0: &Position, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    minimize_w1_from(state, x0, cfg, None)
}

/// `minimize_w1` with an extra starting point, used for warm-started sweeps.
pub fn minimize_w1_from(
    state: &ThermoState,
    x0: &Position,
    cfg: &OptimizerConfig,
    warm: Option<&FrequencyTriple>,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    if cfg.coulomb && x0.distance() == 0.0 && state.beta().is_infinite() {
        return Err(VptError::SingularOrigin);
    }
    // Without a field nothing fixes the trial symmetry axis; align it with x₀.
    let aligned;
    let x0 = if state.omega_c() == 0.0 {
        aligned = Position::new(0.0, x0.distance())?;
        &aligned
    } else {
        x0
    };
    let saddle = Saddle { beta: state.beta(), omega_c: state.omega_c(), x0, coulomb: cfg.coulomb };
    let pts = starts(state, cfg, warm);
    let results: Vec<OptimizationResult> = if cfg.parallel {
        pts.par_iter().map(|s| saddle.descend(*s, cfg)).collect()
    } else {
        pts.iter().map(|s| saddle.descend(*s, cfg)).collect()
    };
    let iterations = results.iter().map(|r| r.iterations).sum();
    let mut best = results.into_iter().min_by(better).expect("at least one start");
    best.iterations = iterations;
    Ok(best)
}

// ---------------------------------------------------------------------------
// zero temperature

/// Zero-temperature first-order energy at x₀ = 0,
/// E = (Ω⊥2² + ω_c²)/(4Ω⊥2) + Ω∥/4 − ⟨1/r⟩.
pub fn ground_state_energy(field: f64, omega_perp2: f64, omega_par: f64) -> Result<f64> {
    check_field(field)?;
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !(ok(omega_perp2) && ok(omega_par)) {
        return Err(VptError::Domain(format!(
            "ground-state energy needs positive frequencies, got omega_perp2 = {omega_perp2}, omega_par = {omega_par}"
        )));
    }
    Ok(ground_state_jet(field, &Jet::constant(omega_perp2, 0), &Jet::constant(omega_par, 0)).value())
}

fn ground_state_jet(field: f64, o2: &Jet, op: &Jet) -> Jet {
    (o2.square() + field * field) / &(o2 * 4.0) + op * 0.25 - inverse_distance_zero_t_jet(o2, op)
}

// Value, gradient and Hessian in log-frequencies u = (ln Ω⊥2, ln Ω∥).
fn ground_state_local(field: f64, u: &[f64; 2]) -> (f64, Vector2<f64>, Matrix2<f64>) {
    let along = |d: [f64; 2]| {
        let o2 = (Jet::constant(u[0], 2) + Jet::variable(0.0, 2) * d[0]).exp();
        let op = (Jet::constant(u[1], 2) + Jet::variable(0.0, 2) * d[1]).exp();
        ground_state_jet(field, &o2, &op)
    };
    let e0 = along([1.0, 0.0]);
    let e1 = along([0.0, 1.0]);
    let e01 = along([1.0, 1.0]);
    let (h00, h11) = (2.0 * e0.coeff(2), 2.0 * e1.coeff(2));
    let h01 = (2.0 * e01.coeff(2) - h00 - h11) / 2.0;
    (e0.value(), Vector2::new(e0.coeff(1), e1.coeff(1)), Matrix2::new(h00, h01, h01, h11))
}

/// Minimizes the zero-temperature energy over (Ω⊥2, Ω∥) > 0 with exact
/// derivatives. Ω⊥1 does not enter and is reported as 0.
///
/// With the Coulomb term off the energy is linear and increasing in Ω∥, so
/// Ω∥ is clamped to 0 and Ω⊥2 = ω_c.
pub fn minimize_ground_state(field: f64, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    check_field(field)?;
    cfg.validate()?;
    if !cfg.coulomb {
        return minimize_pure_field(field, cfg);
    }
    let mut best: Option<OptimizationResult> = None;
    for start in ground_state_starts(field) {
        let r = ground_state_newton(field, start, cfg);
        if best.as_ref().map_or(true, |b| better(&r, b) == Ordering::Less) {
            best = Some(r);
        }
    }
    best.ok_or(VptError::Diverged { iterations: 0 })
}

// Coulomb off: E = (Ω⊥2² + ω_c²)/(4Ω⊥2) + Ω∥/4.
fn minimize_pure_field(field: f64, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    let energy = |o2: &Jet, op: &Jet| (o2.square() + field * field) / &(o2 * 4.0) + op * 0.25;
    // E is linear in Ω∥ with positive slope, so the bound Ω∥ = 0 is active.
    let slope = energy(&Jet::constant(HYDROGEN_OMEGA, 1), &Jet::variable(0.0, 1)).coeff(1);
    if slope <= 0.0 {
        return Err(VptError::Domain("energy unbounded below along omega_par".into()));
    }
    if field == 0.0 {
        // E = Ω⊥2/4 also increases monotonically; both frequencies sit on the bound
        return Ok(OptimizationResult {
            omega_opt: FrequencyTriple::new(0.0, 0.0, 0.0)?,
            value: 0.0,
            iterations: 0,
            converged: true,
            hessian_psd: true,
            grad_norm: 0.0,
        });
    }
    // Newton in u = ln Ω⊥2
    let op = Jet::constant(0.0, 2);
    let mut u = field.max(HYDROGEN_OMEGA).ln();
    let mut iterations = 0;
    let mut e = energy(&Jet::variable(u, 2).exp(), &op);
    while iterations < cfg.max_iter {
        iterations += 1;
        let (g, h) = (e.coeff(1), 2.0 * e.coeff(2));
        let step = if h > 0.0 { -g / h } else { -g.signum() };
        let next = energy(&Jet::variable(u + step, 2).exp(), &op);
        if !(next.value() <= e.value()) || step.abs() <= cfg.tol_step {
            break;
        }
        u += step;
        e = next;
    }
    let o2 = u.exp();
    let grad_norm = (e.coeff(1) / o2).abs();
    Ok(OptimizationResult {
        omega_opt: FrequencyTriple::new(0.0, o2, 0.0)?,
        value: e.value(),
        iterations,
        converged: grad_norm <= cfg.tol_grad,
        hessian_psd: e.coeff(2) >= 0.0,
        grad_norm,
    })
}

fn ground_state_starts(field: f64) -> Vec<[f64; 2]> {
    let o2 = field.max(HYDROGEN_OMEGA);
    let mut v = vec![[o2, HYDROGEN_OMEGA / 2.0]];
    if field > 1.0 {
        // logarithmic growth of Ω∥ in strong fields
        let l = field.ln();
        v.push([o2, (4.0 / PI) * l * l / 4.0]);
    }
    v
}

fn ground_state_newton(field: f64, start: [f64; 2], cfg: &OptimizerConfig) -> OptimizationResult {
    let mut u = [start[0].ln(), start[1].ln()];
    let (mut f, mut g, mut h) = ground_state_local(field, &u);
    let mut iterations = 0;
    let grad_in_omega = |u: &[f64; 2], g: &Vector2<f64>| {
        // ∂E/∂Ω = (∂E/∂u)/Ω
        Vector2::new(g[0] / u[0].exp(), g[1] / u[1].exp()).norm()
    };
    // Newton is cheap here, so iterate to the rounding floor rather than to tol_grad.
    while iterations < cfg.max_iter && grad_in_omega(&u, &g) > 1e-15 {
        iterations += 1;
        let step = newton_step(&h, &g);
        let step = if step.norm() > 2.0 { step * (2.0 / step.norm()) } else { step };
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..60 {
            let q = [u[0] + t * step[0], u[1] + t * step[1]];
            let (fq, gq, hq) = ground_state_local(field, &q);
            if fq.is_finite() && fq <= f {
                next = Some((q, fq, gq, hq));
                break;
            }
            t *= 0.5;
        }
        match next {
            Some((q, fq, gq, hq)) => {
                let moved = ((q[0] - u[0]).powi(2) + (q[1] - u[1]).powi(2)).sqrt();
                u = q;
                f = fq;
                g = gq;
                h = hq;
                if moved <= cfg.tol_step {
                    break;
                }
            }
            None => break,
        }
    }
    let grad_norm = grad_in_omega(&u, &g);
    let (o2, op) = (u[0].exp(), u[1].exp());
    OptimizationResult {
        omega_opt: FrequencyTriple::new(0.0, o2, op).unwrap_or_else(|_| nan_triple()),
        value: f,
        iterations,
        converged: f.is_finite() && grad_norm <= cfg.tol_grad,
        hessian_psd: min_eigenvalue(&h).0 >= -PSD_TOL,
        grad_norm,
    }
}

/// Binding energy ε = ω_c/2 − E at the optimum.
pub fn binding_energy(field: f64, cfg: &OptimizerConfig) -> Result<f64> {
    let r = minimize_ground_state(field, cfg)?;
    if !r.converged {
        return Err(VptError::Diverged { iterations: r.iterations });
    }
    Ok(field / 2.0 - r.value)
}
