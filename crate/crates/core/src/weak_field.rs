//! Weak-field expansion of the zero-temperature variational energy in powers of B².
//!
//! With η = 2Ω∥/Ω⊥2 and Ω = Ω⊥2 the energy reads
//!
//! ```text
//! E(η, Ω; B) = (Ω/4)(1 + η/2) + B²/(4Ω) + √(ηΩ/2π) h(η)
//! h(η) = (1/√(1−η)) ln[(1 − √(1−η))/(1 + √(1−η))]
//! ```
//!
//! and the binding energy is ε = B/2 − E. The stationarity conditions are
//! solved as truncated power series in t = B² by Newton iteration on jets.
//! The B = 0 point sits at η = 1, where h is only removable-singular, so all
//! expansions of h use its series in 1 − η.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use twofloat::TwoFloat;

use crate::error::{check_field, Result, VptError};
use crate::jet::Jet;
use crate::optimizer::{minimize_ground_state, OptimizerConfig};
use crate::smearing::shape_jet;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakFieldParams {
    eta: f64,
    omega: f64,
}

impl WeakFieldParams {
    pub fn new(eta: f64, omega: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(VptError::Domain(format!("eta must lie in (0, 1], got {eta}")));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(VptError::InvalidFrequency { name: "omega", value: omega });
        }
        Ok(Self { eta, omega })
    }

    /// Parameters from the truncated series Σ (ηₙ, Ωₙ) B^{2n}.
    pub fn from_series(coeffs: &[SeriesCoefficients], field: f64) -> Result<Self> {
        let t = field * field;
        let eta = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.eta);
        let omega = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.omega);
        Self::new(eta, omega)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub order: usize,
    pub eta: f64,
    pub omega: f64,
    pub eps: f64,
}

pub fn h_function(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(VptError::Domain(format!("h(eta) needs eta in (0, 1], got {eta}")));
    }
    if eta == 1.0 {
        return Ok(-2.0);
    }
    // h(η) = −2 S(η − 1), S(c) = ∫₀¹ dξ/(1 + cξ²)
    let c = Jet::constant(eta - 1.0, 0);
    let log_ratio = Jet::constant(-eta.ln(), 0);
    Ok(-2.0 * shape_jet(&c, Some(&log_ratio)).value())
}

/// Binding energy ε = B/2 − E(η, Ω; B).
pub fn weak_field_energy(field: f64, params: &WeakFieldParams) -> Result<f64> {
    check_field(field)?;
    let (eta, om) = (params.eta, params.omega);
    let h = h_function(eta)?;
    Ok(field / 2.0 - om / 4.0 * (1.0 + eta / 2.0) - field * field / (4.0 * om) - (eta * om / (2.0 * PI)).sqrt() * h)
}

const H_SERIES_LEN: usize = 64;

// h and dh/dη as power series in u = 1 − η.
fn h_of_u(u: &Jet) -> Jet {
    let a: Vec<f64> = (0..H_SERIES_LEN).map(|k| -2.0 / (2 * k + 1) as f64).collect();
    u.polynomial(&a)
}

fn dh_of_u(u: &Jet) -> Jet {
    let a: Vec<f64> = (0..H_SERIES_LEN).map(|k| 2.0 * (k + 1) as f64 / (2 * k + 3) as f64).collect();
    u.polynomial(&a)
}

// (E, ∂E/∂η, ∂E/∂Ω) with every argument a jet.
fn energy_and_gradient(eta: &Jet, omega: &Jet, t: &Jet) -> (Jet, Jet, Jet) {
    let u = -eta + 1.0;
    let (h, dh) = (h_of_u(&u), dh_of_u(&u));
    let sq_eta = eta.sqrt();
    let pref = (omega * (1.0 / (2.0 * PI))).sqrt();
    let e = omega * 0.25 * &(eta * 0.5 + 1.0) + t / &(omega * 4.0) + &pref * &sq_eta * &h;
    let d_eta = omega * 0.125 + &pref * &(&h / &(&sq_eta * 2.0) + &sq_eta * &dh);
    let d_omega = (eta * 0.5 + 1.0) * 0.25 - t / &(omega.square() * 4.0) + &sq_eta * &h * &pref / &(omega * 2.0);
    (e, d_eta, d_omega)
}

// Jacobian of the stationarity conditions at t = 0.
fn jacobian(eta: f64, omega: f64) -> Matrix2<f64> {
    let t = Jet::constant(0.0, 1);
    let (_, a1, b1) = energy_and_gradient(&Jet::variable(eta, 1), &Jet::constant(omega, 1), &t);
    let (_, a2, b2) = energy_and_gradient(&Jet::constant(eta, 1), &Jet::variable(omega, 1), &t);
    Matrix2::new(a1.coeff(1), a2.coeff(1), b1.coeff(1), b2.coeff(1))
}

fn solve_2x2(j: &Matrix2<f64>, rhs: &Vector2<f64>, order: usize) -> Result<Vector2<f64>> {
    let scale = j.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if j.determinant().abs() <= 1e-12 * scale * scale {
        return Err(VptError::SingularSystem { order });
    }
    j.lu().solve(rhs).ok_or(VptError::SingularSystem { order })
}

/// Series coefficients (ηₙ, Ωₙ, εₙ) of η, Ω and E in powers of B², n = 0..=n_max.
///
/// Orders above 3 are computed the same way but have no reference values.
pub fn solve_series(n_max: usize) -> Result<Vec<SeriesCoefficients>> {
    // order 0: Newton from a point inside the convergence disc of the h series
    let (mut eta, mut omega) = (0.9, 1.0);
    let t0 = Jet::constant(0.0, 0);
    let mut done = false;
    for _ in 0..100 {
        let (_, f1, f2) = energy_and_gradient(&Jet::constant(eta, 0), &Jet::constant(omega, 0), &t0);
        let step = solve_2x2(&jacobian(eta, omega), &Vector2::new(f1.value(), f2.value()), 0)?;
        eta -= step[0];
        omega -= step[1];
        if !(eta.is_finite() && omega > 0.0 && (1.0 - eta).abs() < 0.5) {
            return Err(VptError::Diverged { iterations: 0 });
        }
        if step.norm() <= 1e-15 * (1.0 + omega) {
            done = true;
            break;
        }
    }
    if !done {
        return Err(VptError::Diverged { iterations: 100 });
    }
    // higher orders: each sweep with the fixed Jacobian fixes one more coefficient
    let j0 = jacobian(eta, omega);
    let t = Jet::variable(0.0, n_max);
    let mut eta_j = Jet::constant(eta, n_max);
    let mut om_j = Jet::constant(omega, n_max);
    for _ in 0..n_max + 2 {
        let (_, f1, f2) = energy_and_gradient(&eta_j, &om_j, &t);
        let mut de = vec![0.0; n_max + 1];
        let mut dw = vec![0.0; n_max + 1];
        for k in 1..=n_max {
            let s = solve_2x2(&j0, &Vector2::new(f1.coeff(k), f2.coeff(k)), k)?;
            de[k] = s[0];
            dw[k] = s[1];
        }
        eta_j = eta_j - Jet::from_coeffs(de);
        om_j = om_j - Jet::from_coeffs(dw);
    }
    let (e, _, _) = energy_and_gradient(&eta_j, &om_j, &t);
    Ok((0..=n_max)
        .map(|n| SeriesCoefficients { order: n, eta: eta_j.coeff(n), omega: om_j.coeff(n), eps: e.coeff(n) })
        .collect())
}

/// Known exact coefficients of the hydrogen ground-state energy in powers of B².
pub const EXACT_EPS: [f64; 4] = [-0.5, 0.25, -53.0 / 192.0, 5581.0 / 4608.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactComparison {
    pub order: usize,
    pub variational: f64,
    pub exact: Option<f64>,
}

pub fn compare_exact(n_max: usize) -> Result<Vec<ExactComparison>> {
    Ok(solve_series(n_max)?
        .into_iter()
        .map(|c| ExactComparison { order: c.order, variational: c.eps, exact: EXACT_EPS.get(c.order).copied() })
        .collect())
}

// ---------------------------------------------------------------------------
// extended precision

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

// twofloat's own division is only good to about one f64 ulp, so refine the
// quotient twice against the exact double-double remainder.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    TwoFloat::from(q1) + q2 + r.hi() / b.hi()
}

/// Ground-state energy in double-double arithmetic, for |2Ω∥/Ω⊥2 − 1| < 0.3.
pub fn ground_state_energy_dd(field: f64, omega_perp2: f64, omega_par: f64) -> Result<TwoFloat> {
    let c = dd_div(dd(omega_par) * 2.0, dd(omega_perp2)) - 1.0;
    if !(omega_perp2 > 0.0 && omega_par > 0.0) || c.hi().abs() >= 0.3 {
        return Err(VptError::Domain("extended-precision energy only covers the near-isotropic regime".into()));
    }
    // S(c) = Σ (−c)^k/(2k+1); 0.3^100 is far below the double-double epsilon
    let mut s = TwoFloat::from(0.0);
    for k in (0..100).rev() {
        s = s * (-c) + dd_div(dd(1.0), dd((2 * k + 1) as f64));
    }
    let (o2, op, b) = (dd(omega_perp2), dd(omega_par), dd(field));
    let coulomb = dd_div(op.sqrt() * s * 2.0, twofloat::consts::PI.sqrt());
    Ok(dd_div(o2 * o2 + b * b, o2 * 4.0) + op * 0.25 - coulomb)
}

/// Residual E(B) − Σ_{n≤3} εₙ B^{2n} of the truncated weak-field series
/// against the fully optimized energy.
///
/// The B-independent part cancels exactly by subtracting E(0), and the
/// energies are evaluated in double-double precision at the optimized
/// frequencies, so residuals far below the f64 resolution of E remain visible.
pub fn series_residual(field: f64, coeffs: &[SeriesCoefficients], cfg: &OptimizerConfig) -> Result<f64> {
    check_field(field)?;
    let at = |b: f64| -> Result<TwoFloat> {
        let r = minimize_ground_state(b, cfg)?;
        if !r.converged {
            return Err(VptError::Diverged { iterations: r.iterations });
        }
        ground_state_energy_dd(b, r.omega_opt.omega_perp2(), r.omega_opt.omega_par())
    };
    let t = field * field;
    let tail = coeffs.iter().skip(1).rev().fold(TwoFloat::from(0.0), |acc, c| (acc + c.eps) * t);
    Ok(f64::from(at(field)? - at(0.0)? - tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::ground_state_energy;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn h_values() {
        assert_eq!(h_function(1.0).unwrap(), -2.0);
        assert_relative_eq!(h_function(0.75).unwrap(), 2.0 * (1.0_f64 / 3.0).ln(), max_relative = 1e-14);
        assert!(h_function(0.0).is_err() && h_function(1.1).is_err());
        let tiny = 1e-12;
        assert_relative_eq!(h_function(tiny).unwrap(), (tiny / 4.0).ln(), max_relative = 1e-9);
    }

    #[test]
    fn h_series_matches_closed_form() {
        for eta in [0.75, 0.8, 0.95, 0.999] {
            let u = Jet::constant(1.0 - eta, 0);
            assert_relative_eq!(h_of_u(&u).value(), h_function(eta).unwrap(), max_relative = 1e-14);
            let d = (h_function(eta + 1e-6).unwrap() - h_function(eta - 1e-6).unwrap()) / 2e-6;
            assert_relative_eq!(dh_of_u(&u).value(), d, max_relative = 1e-7);
        }
    }

    #[test]
    fn zeroth_order_is_field_free_hydrogen() {
        let c = solve_series(0).unwrap();
        assert!((c[0].eta - 1.0).abs() < 1e-10);
        assert_relative_eq!(c[0].omega, 32.0 / (9.0 * PI), max_relative = 1e-12);
        assert_relative_eq!(c[0].eps, -4.0 / (3.0 * PI), max_relative = 1e-12);
        let p = WeakFieldParams::new(1.0, 32.0 / (9.0 * PI)).unwrap();
        assert_relative_eq!(weak_field_energy(0.0, &p).unwrap(), 4.0 / (3.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn first_order_closed_forms() {
        let c = solve_series(1).unwrap();
        assert_relative_eq!(c[1].eta, -405.0 * PI * PI / 7168.0, max_relative = 1e-10);
        assert_relative_eq!(c[1].omega, 99.0 * PI / 224.0, max_relative = 1e-10);
        assert_relative_eq!(c[1].eps, 9.0 * PI / 128.0, max_relative = 1e-10);
    }

    #[test]
    fn comparison_table() {
        let t = compare_exact(4).unwrap();
        assert_eq!(t[0].exact, Some(-0.5));
        assert_eq!(t[4].exact, None);
        assert_relative_eq!(t[2].exact.unwrap(), -0.276_041_666, max_relative = 1e-8);
    }

    #[test]
    fn dd_division_is_accurate() {
        let third = dd_div(dd(1.0), dd(3.0));
        assert_eq!(third.hi(), 1.0 / 3.0);
        assert!((third.lo() - 1.850_371_707_708_594e-17).abs() < 1e-31);
        // E at the exact field-free optimum equals −4/(3π) to double-double accuracy
        let om = dd_div(dd(32.0), twofloat::consts::PI * 9.0);
        let e = ground_state_energy_dd(0.0, om.hi(), om.hi() / 2.0).unwrap();
        let exact = dd_div(dd(-4.0), twofloat::consts::PI * 3.0);
        assert!(f64::from(e - exact).abs() < 1e-30);
    }

    #[test]
    fn dd_energy_matches_f64() {
        let e = ground_state_energy_dd(0.3, 1.2, 0.55).unwrap();
        assert_relative_eq!(f64::from(e), ground_state_energy(0.3, 1.2, 0.55).unwrap(), max_relative = 1e-14);
        assert!(ground_state_energy_dd(0.3, 1.0, 2.0).is_err());
    }

    proptest! {
        #[test]
        fn energy_matches_ground_state_form(eta in 0.01f64..1.0, om in 0.1f64..20.0, b in 0.0f64..5.0) {
            let p = WeakFieldParams::new(eta, om).unwrap();
            let e = ground_state_energy(b, om, eta * om / 2.0).unwrap();
            let eps = weak_field_energy(b, &p).unwrap();
            prop_assert!((eps - (b / 2.0 - e)).abs() <= 1e-12 * (1.0 + e.abs() + b));
        }
    }
}
