//! Exact results for a free electron in the magnetic field, used as an
//! oracle for the variational machinery with the Coulomb term switched off.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::effective_potential::w1_asymptote;
use crate::error::{check_frequency, Result, VptError};
use crate::greens::{log_x_over_sinh, ThermoState};
use crate::quadrature::{integrate_nested, Axis, QuadConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactFieldResult {
    /// Constant effective classical potential.
    pub v_eff: f64,
    /// ln[Z / (A/λ²)] with λ² = 2πβ the thermal wavelength squared.
    pub log_z_per_area: f64,
}

/// (1/β) ln[sinh(βω_c/2)/(βω_c/2)], identical to the large-distance limit
/// of the optimized W₁.
pub fn exact_veff(state: &ThermoState) -> f64 {
    w1_asymptote(state)
}

pub fn exact_log_partition_per_area(state: &ThermoState) -> f64 {
    log_x_over_sinh(state.beta() * state.omega_c() / 2.0)
}

pub fn exact_field(state: &ThermoState) -> ExactFieldResult {
    ExactFieldResult { v_eff: exact_veff(state), log_z_per_area: exact_log_partition_per_area(state) }
}

/// H_eff(p₀, x₀) = V_eff + p₀²/2 − (ω_c/2)(x₀ p₀y − y₀ p₀x) + (ω_c²/8)(x₀² + y₀²).
pub fn exact_hamiltonian(state: &ThermoState, p0: [f64; 2], x0: [f64; 2]) -> f64 {
    let wc = state.omega_c();
    let [px, py] = p0;
    let [x, y] = x0;
    exact_veff(state) + 0.5 * (px * px + py * py) - 0.5 * wc * (x * py - y * px) + wc * wc / 8.0 * (x * x + y * y)
}

/// Normal-mode frequencies Ω± = √(Ω² + ω_c²/2 ± ω_c √(Ω² + ω_c²/4)) of a
/// charged oscillator of frequency Ω in the field.
pub fn regulator_frequencies(omega_c: f64, omega_reg: f64) -> Result<(f64, f64)> {
    check_frequency("omega_c", omega_c)?;
    check_frequency("omega_reg", omega_reg)?;
    // Ω± = √(Ω² + ω_c²/4) ± ω_c/2, with Ω− from Ω+Ω− = Ω² to avoid cancellation
    let root = (omega_reg * omega_reg + omega_c * omega_c / 4.0).sqrt();
    let plus = root + omega_c / 2.0;
    let minus = if plus > 0.0 { omega_reg * omega_reg / plus } else { 0.0 };
    Ok((plus, minus))
}

/// Phase-space integral of exp(−βH_eff) over momenta and the square
/// |x₀|, |y₀| ≤ half_side, divided by A/λ². Returns (value, error estimate).
pub fn phase_space_partition_per_area(state: &ThermoState, half_side: f64, rel_tol: f64) -> Result<(f64, f64)> {
    if !(half_side.is_finite() && half_side > 0.0) {
        return Err(VptError::Domain(format!("box half side must be positive, got {half_side}")));
    }
    let (beta, wc) = (state.beta(), state.omega_c());
    let v = exact_veff(state);
    // The momentum Gaussian has width 1/√β around (−ω_c y₀/2, ω_c x₀/2).
    let pmax = 0.5 * wc * half_side + 12.0 / beta.sqrt();
    let axes = [
        Axis::new(-half_side, half_side),
        Axis::new(-half_side, half_side),
        Axis::new(-pmax, pmax),
        Axis::new(-pmax, pmax),
    ];
    let f = |z: &[f64]| {
        let h = exact_hamiltonian(state, [z[2], z[3]], [z[0], z[1]]);
        (-beta * (h - v)).exp()
    };
    let q = integrate_nested(&f, &axes, &QuadConfig::with_rel_tol(rel_tol));
    if !q.converged {
        return Err(VptError::QuadratureFailed { value: q.value, abs_error: q.abs_error });
    }
    // ∫d²p/(2π)² over the box, times λ²/A, with the constant V_eff restored
    let area = 4.0 * half_side * half_side;
    let norm = (-beta * v).exp() * 2.0 * PI * beta / (4.0 * PI * PI * area);
    Ok((q.value * norm, q.abs_error * norm))
}
