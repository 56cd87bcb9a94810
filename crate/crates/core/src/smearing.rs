//! Gaussian smearing of potentials over the trial fluctuations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VptError};
use crate::greens::FluctuationWidths;
use crate::jet::Jet;
use crate::quadrature::{integrate_nested, integrate_with_breaks, Axis, QuadConfig};

/// Position of the path centroid in cylindrical coordinates about the field axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    rho0: f64,
    z0: f64,
}

impl Position {
    pub fn new(rho0: f64, z0: f64) -> Result<Self> {
        if !(rho0.is_finite() && rho0 >= 0.0 && z0.is_finite()) {
            return Err(VptError::Domain(format!("invalid position rho0 = {rho0}, z0 = {z0}")));
        }
        Ok(Self { rho0, z0 })
    }

    pub fn origin() -> Self {
        Self { rho0: 0.0, z0: 0.0 }
    }

    /// From Cartesian (x₀, y₀, z₀); only ρ₀ = √(x₀² + y₀²) is kept.
    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(x.hypot(y), z)
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn distance(&self) -> f64 {
        self.rho0.hypot(self.z0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmearedCoulomb {
    pub value: f64,
    pub est_abs_error: f64,
}

/// Result of the generic 3D smearing cubature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmearedValue {
    pub value: f64,
    pub est_abs_error: f64,
    pub evaluations: usize,
}

/// Relative tolerance of the 1D Coulomb integral.
pub const COULOMB_REL_TOL: f64 = 1e-10;
/// Relative tolerance requested from the 3D cubature.
pub const CUBATURE_REL_TOL: f64 = 1e-8;
/// Gaussian truncation in standard deviations per axis.
pub const TRUNCATION_SIGMAS: f64 = 8.0;

fn check_widths(widths: &FluctuationWidths) -> Result<()> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if ok(widths.a_perp_sq) && ok(widths.a_par_sq) {
        Ok(())
    } else {
        Err(VptError::InvalidWidths { a_perp_sq: widths.a_perp_sq, a_par_sq: widths.a_par_sq })
    }
}

/// Smeared Coulomb potential ⟨−1/|x|⟩ over an anisotropic Gaussian centred at x₀.
///
/// ```text
/// ⟨−1/|x|⟩ = −√(2a∥²/π) ∫₀¹ dξ exp(−ξ²/2 (ρ₀²/D + z₀²/a∥²)) / D,
/// D = a∥² + ξ² (a⊥² − a∥²)
/// ```
///
/// Vanishing widths give the bare value −1/r.
pub fn coulomb_expectation(widths: &FluctuationWidths, x0: &Position) -> Result<SmearedCoulomb> {
    if widths.a_perp_sq == 0.0 && widths.a_par_sq == 0.0 {
        let r = x0.distance();
        if r == 0.0 {
            return Err(VptError::SingularOrigin);
        }
        return Ok(SmearedCoulomb { value: -1.0 / r, est_abs_error: 0.0 });
    }
    check_widths(widths)?;
    let (ap, az) = (widths.a_perp_sq, widths.a_par_sq);
    let (rho2, z2) = (x0.rho0 * x0.rho0, x0.z0 * x0.z0);
    let diff = ap - az;
    let integrand = |xi: f64| {
        let xi2 = xi * xi;
        let den = az + xi2 * diff;
        (-0.5 * xi2 * (rho2 / den + z2 / az)).exp() / den
    };
    // Far from the nucleus the integrand is a narrow peak at ξ = 0.
    let r = x0.distance();
    let sigma = ap.max(az).sqrt();
    let mut breaks = vec![0.0, 1.0];
    if r > 0.0 {
        let edge = 4.0 * sigma / r;
        if edge < 0.5 {
            breaks.insert(1, edge);
        }
    }
    let q = integrate_with_breaks(integrand, &breaks, &QuadConfig::with_rel_tol(COULOMB_REL_TOL));
    let pref = (2.0 * az / PI).sqrt();
    if !q.converged {
        return Err(VptError::QuadratureFailed { value: -pref * q.value, abs_error: pref * q.abs_error });
    }
    Ok(SmearedCoulomb { value: -pref * q.value, est_abs_error: pref * q.abs_error })
}

/// Gaussian average of `potential` (a function of Cartesian x, y, z) with
/// transverse variance a⊥² and longitudinal variance a∥², centred at
/// x₀ = (ρ₀, 0, z₀).
///
/// The cubature runs in spherical coordinates about the origin over a ball
/// that contains the ±8σ box, so a 1/r singularity at the nucleus is
/// integrable without special treatment.
pub fn smear_potential<F>(widths: &FluctuationWidths, x0: &Position, potential: F) -> Result<SmearedValue>
where
    F: Fn([f64; 3]) -> f64,
{
    smear_potential_with_tol(widths, x0, potential, CUBATURE_REL_TOL)
}

pub fn smear_potential_with_tol<F>(
    widths: &FluctuationWidths,
    x0: &Position,
    potential: F,
    rel_tol: f64,
) -> Result<SmearedValue>
where
    F: Fn([f64; 3]) -> f64,
{
    check_widths(widths)?;
    let (ap, az) = (widths.a_perp_sq, widths.a_par_sq);
    let (cx, cz) = (x0.rho0, x0.z0);
    let norm = 1.0 / ((2.0 * PI).powf(1.5) * ap * az.sqrt());
    let sigma_max = ap.max(az).sqrt();
    let r0 = x0.distance();
    let r_max = r0 + TRUNCATION_SIGMAS * 3f64.sqrt() * sigma_max;
    let theta0 = cx.atan2(cz);

    // Extra radial breaks bracket the Gaussian shell around r₀.
    let sigma_min = ap.min(az).sqrt();
    let r_breaks: Vec<f64> = [-4.0, -1.0, 0.0, 1.0, 4.0].iter().map(|k| r0 + k * sigma_min).collect();
    let axes = [
        Axis::new(0.0, r_max).with_breaks(&r_breaks),
        Axis::new(0.0, PI).with_breaks(&[theta0]),
        Axis::new(-PI, PI).with_breaks(&[0.0]),
    ];
    let integrand = |p: &[f64]| {
        let (r, theta, phi) = (p[0], p[1], p[2]);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let x = r * st * cp;
        let y = r * st * sp;
        let z = r * ct;
        let dx = x - cx;
        let dz = z - cz;
        let g = (-(dx * dx + y * y) / (2.0 * ap) - dz * dz / (2.0 * az)).exp();
        if g == 0.0 {
            return 0.0;
        }
        potential([x, y, z]) * g * r * r * st
    };
    let cfg = QuadConfig { rel_tol, abs_tol: 1e-300, max_subdivisions: 2000 };
    let q = integrate_nested(&integrand, &axes, &cfg);
    let value = norm * q.value;
    let est_abs_error = norm * q.abs_error;
    if !q.converged {
        return Err(VptError::QuadratureFailed { value, abs_error: est_abs_error });
    }
    Ok(SmearedValue { value, est_abs_error, evaluations: q.evaluations })
}

/// S(c) = ∫₀¹ dξ / (1 + c ξ²) for c > −1.
pub fn inverse_distance_shape(c: f64) -> f64 {
    shape_jet(&Jet::constant(c, 0), None).value()
}

const SHAPE_SERIES_RADIUS: f64 = 0.3;
const SHAPE_SERIES_LEN: usize = 48;

// For c < 0 and d = √(−c) → 1 the caller may pass ln(Ω⊥2/(2Ω∥)) to avoid
// forming 1 − d.
pub(crate) fn shape_jet(c: &Jet, log_ratio: Option<&Jet>) -> Jet {
    let c0 = c.value();
    if c0.abs() < SHAPE_SERIES_RADIUS {
        let coeffs: Vec<f64> = (0..SHAPE_SERIES_LEN)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (2 * k + 1) as f64)
            .collect();
        c.polynomial(&coeffs)
    } else if c0 > 0.0 {
        let s = c.sqrt();
        s.atan() / &s
    } else {
        let d = (-c).sqrt();
        let at = match log_ratio {
            // atanh d = ln(1 + d) + ½ ln(Ω⊥2/(2Ω∥)) since 1 − d² = 2Ω∥/Ω⊥2
            Some(lr) => (&d + 1.0).ln() + lr * 0.5,
            None => d.atanh(),
        };
        at / &d
    }
}

/// ⟨1/|x|⟩ in the zero-temperature trial state, as a jet in any parameter.
pub(crate) fn inverse_distance_zero_t_jet(omega_perp2: &Jet, omega_par: &Jet) -> Jet {
    let c = omega_par * 2.0 / omega_perp2 - 1.0;
    let log_ratio = (omega_perp2 / &(omega_par * 2.0)).ln();
    let s = shape_jet(&c, Some(&log_ratio));
    omega_par.sqrt() * &s * (2.0 / PI.sqrt())
}

/// Zero-temperature Coulomb expectation ⟨−1/|x|⟩ at x₀ = 0.
///
/// With c = 2Ω∥/Ω⊥2 − 1:
/// ```text
/// ⟨1/|x|⟩ = 2√(Ω∥/π) · arctan(√c)/√c    c > 0
///         = 2√(Ω∥/π)                    c = 0
///         = 2√(Ω∥/π) · artanh(√−c)/√−c  c < 0
/// ```
/// The three regimes share one analytic function of c and are continuous.
pub fn coulomb_expectation_zero_t(omega_perp2: f64, omega_par: f64) -> Result<f64> {
    let ok = |v: f64| v.is_finite() && v > 0.0;
    if !(ok(omega_perp2) && ok(omega_par)) {
        return Err(VptError::Domain(format!(
            "zero-temperature Coulomb term needs positive frequencies, got omega_perp2 = {omega_perp2}, omega_par = {omega_par}"
        )));
    }
    let v = inverse_distance_zero_t_jet(&Jet::constant(omega_perp2, 0), &Jet::constant(omega_par, 0));
    Ok(-v.value())
}
