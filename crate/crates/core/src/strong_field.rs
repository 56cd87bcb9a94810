//! Strong-field asymptotics of the zero-temperature binding energy.
//!
//! For Ω⊥ ≫ 2Ω∥ the binding energy reduces to
//!
//! ```text
//! ε(Ω⊥, Ω∥) = B/2 − [Ω⊥/4 + B²/(4Ω⊥) + Ω∥/4 + √(Ω∥/π) ln(Ω∥/(2Ω⊥))]
//! ```
//!
//! whose stationary point is expanded in powers of ln B and ln ln B.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{check_field, Result, VptError};

/// The constants a = 2 − ln 2 and b = ln(π/2) − 2 of the expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub a: f64,
    pub b: f64,
}

impl Default for AsymptoticConstants {
    fn default() -> Self {
        Self { a: 2.0 - LN_2, b: (PI / 2.0).ln() - 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBreakdown {
    /// ln²B, −4 lnB lnlnB, 4 ln²lnB, −4b lnlnB, 2(b+2) lnB, b², each divided by π.
    pub terms: [f64; 6],
    pub six_term_sum: f64,
    /// −(8 ln²lnB − 8b lnlnB + 2b²)/(π lnB)
    pub correction: f64,
    pub total: f64,
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(VptError::InvalidFrequency { name, value: v })
    }
}

pub fn strong_field_functional(field: f64, omega_perp: f64, omega_par: f64) -> Result<f64> {
    check_field(field)?;
    positive("omega_perp", omega_perp)?;
    positive("omega_par", omega_par)?;
    let bracket = omega_perp / 4.0
        + field * field / (4.0 * omega_perp)
        + omega_par / 4.0
        + (omega_par / PI).sqrt() * (omega_par / (2.0 * omega_perp)).ln();
    Ok(field / 2.0 - bracket)
}

/// Ω⊥ at which ∂ε/∂Ω⊥ = 0 for given Ω∥.
pub fn stationary_omega_perp(field: f64, omega_par: f64) -> Result<f64> {
    check_field(field)?;
    positive("omega_par", omega_par)?;
    let s = (omega_par / PI).sqrt();
    Ok(2.0 * s + (4.0 * s * s + field * field).sqrt())
}

fn check_strong(field: f64, threshold: f64, what: &str) -> Result<()> {
    check_field(field)?;
    if field <= threshold {
        return Err(VptError::Domain(format!("{what} needs B > {threshold:.4}, got {field}")));
    }
    Ok(())
}

/// Fixed-point iteration √Ω∥ ← (2/√π)(ln(2B e⁻²) − ln Ω∥), started from
/// √Ω∥ = (2/√π) ln(2B e⁻²). `n_iter` = 1 returns the starting value.
pub fn iterate_omega_par(field: f64, n_iter: usize) -> Result<f64> {
    let threshold = (2.0_f64).exp() / 2.0;
    check_strong(field, threshold, "the Ω∥ iteration")?;
    if n_iter == 0 {
        return Err(VptError::Domain("n_iter must be at least 1".into()));
    }
    let l = (2.0 * field).ln() - 2.0;
    let pref = 2.0 / PI.sqrt();
    let mut root = pref * l;
    for k in 1..n_iter {
        let next = pref * (l - 2.0 * root.ln());
        if !(next.is_finite() && next > 0.0) {
            return Err(VptError::Diverged { iterations: k });
        }
        root = next;
    }
    Ok(root * root)
}

/// Explicit expansion of ε(B) in ln B and ln ln B, with the first 1/ln B correction.
pub fn asymptotic_binding_energy(field: f64) -> Result<AsymptoticBreakdown> {
    check_strong(field, (2.0_f64).exp(), "the asymptotic expansion")?;
    let AsymptoticConstants { b, .. } = AsymptoticConstants::default();
    let l = field.ln();
    let ll = l.ln();
    let terms = [
        l * l / PI,
        -4.0 * l * ll / PI,
        4.0 * ll * ll / PI,
        -4.0 * b * ll / PI,
        2.0 * (b + 2.0) * l / PI,
        b * b / PI,
    ];
    let six_term_sum = terms.iter().sum::<f64>();
    let correction = -(8.0 * ll * ll - 8.0 * b * ll + 2.0 * b * b) / (PI * l);
    Ok(AsymptoticBreakdown { terms, six_term_sum, correction, total: six_term_sum + correction })
}

/// ½ ln²B.
pub fn landau_estimate(field: f64) -> Result<f64> {
    check_strong(field, 1.0, "the Landau estimate")?;
    let l = field.ln();
    Ok(0.5 * l * l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants() {
        let c = AsymptoticConstants::default();
        assert!((c.a - 1.307).abs() < 5e-4);
        assert!((c.b + 1.548).abs() < 5e-4);
    }

    #[test]
    fn functional_at_omega_perp_equal_b() {
        let (b, op) = (1e4, 7.0);
        let expect = -op / 4.0 - (op / PI).sqrt() * (op / (2.0 * b)).ln();
        assert_relative_eq!(strong_field_functional(b, b, op).unwrap(), expect, max_relative = 1e-9);
    }

    #[test]
    fn stationary_perp_is_stationary() {
        let (b, op) = (1e3, 9.0);
        let w = stationary_omega_perp(b, op).unwrap();
        let h = 1e-3;
        let d = (strong_field_functional(b, w + h, op).unwrap() - strong_field_functional(b, w - h, op).unwrap()) / (2.0 * h);
        assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn first_iterate() {
        let root = 2.0 / PI.sqrt() * (LN_2 + 5.0 * 10.0_f64.ln() - 2.0);
        assert_relative_eq!(iterate_omega_par(1e5, 1).unwrap(), root * root, max_relative = 1e-14);
        assert!(iterate_omega_par(3.0, 1).is_err());
        assert!(iterate_omega_par(1e5, 0).is_err());
    }

    #[test]
    fn iteration_contracts() {
        let mut prev = iterate_omega_par(1e5, 1).unwrap();
        let mut gap = f64::INFINITY;
        for n in 2..30 {
            let cur = iterate_omega_par(1e5, n).unwrap();
            assert!((cur - prev).abs() <= gap);
            gap = (cur - prev).abs();
            prev = cur;
        }
        assert!(gap < 1e-6);
    }

    #[test]
    fn landau_values() {
        assert_relative_eq!(landau_estimate(std::f64::consts::E).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(landau_estimate(1e5).unwrap(), 66.2737, epsilon = 1e-3);
        assert!(landau_estimate(1.0).is_err());
    }

    #[test]
    fn breakdown_domain() {
        assert!(asymptotic_binding_energy(7.0).is_err());
        assert!(asymptotic_binding_energy(8.0).is_ok());
    }
}
