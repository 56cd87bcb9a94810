//! First-order effective classical potential W₁(x₀) and its large-distance limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VptError};
use crate::greens::{log_partition_raw, log_x_over_sinh, widths_raw, FluctuationWidths, FrequencyTriple, ThermoState};
use crate::optimizer::{minimize_w1, minimize_w1_from, OptimizerConfig};
use crate::smearing::{coulomb_expectation, Position};

/// Term-by-term breakdown of W₁ at fixed frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct W1Components {
    pub widths: FluctuationWidths,
    /// −(1/β) ln Z of the trial oscillators.
    pub free_energy: f64,
    /// (ω_c − Ω⊥1) b⊥²
    pub rotation: f64,
    /// −¼(Ω⊥2² − ω_c²) a⊥²
    pub transverse: f64,
    /// −½ Ω∥² a∥²
    pub longitudinal: f64,
    /// Smeared Coulomb potential, zero when the interaction is switched off.
    pub coulomb: f64,
    pub total: f64,
}

pub fn w1_components(state: &ThermoState, omega: &FrequencyTriple, x0: &Position) -> Result<W1Components> {
    components_raw(state.beta(), state.omega_c(), omega.as_array(), x0, true)
}

/// W₁ at fixed frequencies.
pub fn w1(state: &ThermoState, omega: &FrequencyTriple, x0: &Position) -> Result<f64> {
    Ok(w1_components(state, omega, x0)?.total)
}

/// W₁ with the Coulomb term removed (pure magnetic field).
pub fn w1_without_coulomb(state: &ThermoState, omega: &FrequencyTriple) -> f64 {
    // infallible: only the Coulomb term can fail
    components_raw(state.beta(), state.omega_c(), omega.as_array(), &Position::origin(), false)
        .map(|c| c.total)
        .unwrap_or(f64::NAN)
}

pub(crate) fn components_raw(
    beta: f64,
    omega_c: f64,
    omega: [f64; 3],
    x0: &Position,
    with_coulomb: bool,
) -> Result<W1Components> {
    let [o1, o2, op] = omega;
    let widths = widths_raw(beta, o1, o2, op);
    let free_energy = -log_partition_raw(beta, o1, o2, op) / beta;
    let rotation = (omega_c - o1) * widths.b_perp_sq;
    let transverse = -0.25 * (o2 - omega_c) * (o2 + omega_c) * widths.a_perp_sq;
    let longitudinal = -0.5 * op * op * widths.a_par_sq;
    let coulomb = if with_coulomb { coulomb_expectation(&widths, x0)?.value } else { 0.0 };
    let total = free_energy + rotation + transverse + longitudinal + coulomb;
    Ok(W1Components { widths, free_energy, rotation, transverse, longitudinal, coulomb, total })
}

/// Large-distance value of the optimized potential, (1/β) ln[sinh(βω_c/2)/(βω_c/2)].
pub fn w1_asymptote(state: &ThermoState) -> f64 {
    sinh_family_potential(state.beta(), state.omega_c())
}

/// (1/β) ln[sinh(βω/2)/(βω/2)]: free energy of a frequency-ω oscillator
/// relative to its classical limit.
pub(crate) fn sinh_family_potential(beta: f64, omega: f64) -> f64 {
    -log_x_over_sinh(beta * omega / 2.0) / beta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveAxis {
    /// ρ₀ = r, z₀ = 0
    Transverse,
    /// ρ₀ = 0, z₀ = r
    Longitudinal,
}

impl CurveAxis {
    pub fn position(self, r: f64) -> Result<Position> {
        match self {
            CurveAxis::Transverse => Position::new(r, 0.0),
            CurveAxis::Longitudinal => Position::new(0.0, r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSample {
    pub x0: Position,
    pub w1: f64,
    pub omega_opt: FrequencyTriple,
    pub converged: bool,
    /// Projected gradient norm at the returned point.
    pub grad_norm: f64,
}

/// Optimized W₁ along one axis, each point warm-started from its neighbour.
///
/// Unconverged points are flagged, not dropped.
pub fn potential_curve(
    state: &ThermoState,
    axis: CurveAxis,
    r_values: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<PotentialSample>> {
    check_grid(r_values)?;
    let mut out = Vec::with_capacity(r_values.len());
    let mut warm: Option<FrequencyTriple> = None;
    for &r in r_values {
        let x0 = axis.position(r)?;
        let res = minimize_w1_from(state, &x0, cfg, warm.as_ref())?;
        warm = Some(res.omega_opt);
        out.push(PotentialSample { x0, w1: res.value, omega_opt: res.omega_opt, converged: res.converged, grad_norm: res.grad_norm });
    }
    Ok(out)
}

/// Same curve with every point optimized independently by multi-start, in parallel.
pub fn potential_curve_parallel(
    state: &ThermoState,
    axis: CurveAxis,
    r_values: &[f64],
    cfg: &OptimizerConfig,
) -> Result<Vec<PotentialSample>> {
    check_grid(r_values)?;
    r_values
        .par_iter()
        .map(|&r| {
            let x0 = axis.position(r)?;
            let res = minimize_w1(state, &x0, cfg)?;
            Ok(PotentialSample { x0, w1: res.value, omega_opt: res.omega_opt, converged: res.converged, grad_norm: res.grad_norm })
        })
        .collect()
}

fn check_grid(r_values: &[f64]) -> Result<()> {
    if r_values.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(VptError::Domain("distances must be finite and nonnegative".into()));
    }
    if r_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(VptError::Domain("distances must be sorted ascending".into()));
    }
    Ok(())
}
