//! Trial-system quantities in closed form: auxiliary frequencies, the trial
//! partition function and the equal-time fluctuation widths.
//!
//! Units are natural throughout (ħ = M = e²/4πε₀ = k_B = 1), so the cyclotron
//! frequency equals the field strength.
//!
//! The widths are built from the subtracted single-oscillator width
//!
//! ```text
//! F(s) = (1/(2√s)) coth(β√s/2) − 1/(βs) = (2/β) Σ_{m≥1} 1/(ω_m² + s)
//! ```
//!
//! and its divided differences over the pair s± = Ω±². Writing the
//! transverse quantities as divided differences keeps them finite and
//! accurate through the degeneracies Ω− → 0, Ω² → 0 and Ω⊥1 → 0.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_beta, check_field, check_frequency, Result, VptError};
use crate::jet::Jet;

/// Inverse temperature and field strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoState {
    beta: f64,
    field: f64,
}

impl ThermoState {
    pub fn new(beta: f64, field: f64) -> Result<Self> {
        check_beta(beta)?;
        check_field(field)?;
        Ok(Self { beta, field })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Cyclotron (Landau) frequency, equal to B in natural units.
    pub fn omega_c(&self) -> f64 {
        self.field
    }
}

/// Variational frequencies (Ω⊥1, Ω⊥2, Ω∥).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTriple {
    omega_perp1: f64,
    omega_perp2: f64,
    omega_par: f64,
}

impl FrequencyTriple {
    pub fn new(omega_perp1: f64, omega_perp2: f64, omega_par: f64) -> Result<Self> {
        check_frequency("omega_perp1", omega_perp1)?;
        check_frequency("omega_perp2", omega_perp2)?;
        check_frequency("omega_par", omega_par)?;
        Ok(Self { omega_perp1, omega_perp2, omega_par })
    }

    pub fn omega_perp1(&self) -> f64 {
        self.omega_perp1
    }

    pub fn omega_perp2(&self) -> f64 {
        self.omega_perp2
    }

    pub fn omega_par(&self) -> f64 {
        self.omega_par
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.omega_perp1, self.omega_perp2, self.omega_par]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedFrequencies {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Ω² = (Ω⊥2² − Ω⊥1²)/4, negative when Ω⊥1 > Ω⊥2.
    pub omega_sq: f64,
}

/// Equal-time correlators of the trial system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluctuationWidths {
    pub a_perp_sq: f64,
    pub a_par_sq: f64,
    pub b_perp_sq: f64,
}

pub fn derived_frequencies(omega: &FrequencyTriple) -> DerivedFrequencies {
    derived_raw(omega.omega_perp1, omega.omega_perp2)
}

fn derived_raw(o1: f64, o2: f64) -> DerivedFrequencies {
    DerivedFrequencies {
        omega_plus: (o1 + o2).abs() / 2.0,
        omega_minus: (o1 - o2).abs() / 2.0,
        omega_sq: (o2 - o1) * (o2 + o1) / 4.0,
    }
}

/// ln[y / sinh y], even in y, evaluated without overflow.
pub fn log_x_over_sinh(y: f64) -> f64 {
    let y = y.abs();
    if y < 1.0 {
        // sinh y / y − 1 = Σ y^{2k}/(2k+1)!
        let y2 = y * y;
        let (mut term, mut sum) = (1.0, 0.0);
        for k in 1..=12 {
            term *= y2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        -sum.ln_1p()
    } else {
        // ln sinh y = y − ln 2 + ln(1 − e^{−2y})
        y.ln() - (y - std::f64::consts::LN_2 + (-(-2.0 * y).exp_m1()).ln())
    }
}

/// ln Z of the trial oscillators at fixed x₀ (and p₀).
pub fn trial_log_partition(state: &ThermoState, omega: &FrequencyTriple) -> f64 {
    log_partition_raw(state.beta, omega.omega_perp1, omega.omega_perp2, omega.omega_par)
}

pub(crate) fn log_partition_raw(beta: f64, o1: f64, o2: f64, op: f64) -> f64 {
    let d = derived_raw(o1, o2);
    log_x_over_sinh(beta * d.omega_plus / 2.0)
        + log_x_over_sinh(beta * d.omega_minus / 2.0)
        + log_x_over_sinh(beta * op / 2.0)
}

// q(u) = (√u coth √u − 1)/u, so that F(s) = (β/4) q(β² s / 4).
// Maclaurin coefficients 2(−1)^j ζ(2j+2)/π^{2j+2}; radius of convergence π².
const Q_SERIES_LEN: usize = 90;
const Q_SERIES_MAX_U: f64 = 1.0;

fn zeta_even(s: usize) -> f64 {
    if s == 2 {
        return PI * PI / 6.0;
    }
    // Direct sum plus Euler–Maclaurin tail.
    const K: usize = 64;
    let sf = s as f64;
    let mut sum = 0.0;
    for k in (1..=K).rev() {
        sum += (k as f64).powf(-sf);
    }
    let kf = K as f64;
    let tail = kf.powf(1.0 - sf) / (sf - 1.0) - 0.5 * kf.powf(-sf) + sf / 12.0 * kf.powf(-sf - 1.0)
        - sf * (sf + 1.0) * (sf + 2.0) / 720.0 * kf.powf(-sf - 3.0);
    sum + tail
}

fn q_series() -> &'static [f64; Q_SERIES_LEN] {
    static COEFFS: OnceLock<[f64; Q_SERIES_LEN]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut c = [0.0; Q_SERIES_LEN];
        for (j, cj) in c.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let p = (2 * j + 2) as i32;
            *cj = 2.0 * sign * zeta_even(2 * j + 2) / PI.powi(p);
        }
        c
    })
}

fn q_value(u: f64) -> f64 {
    if u <= Q_SERIES_MAX_U {
        let c = q_series();
        let mut acc = 0.0;
        for &cj in c.iter().rev() {
            acc = acc * u + cj;
        }
        acc
    } else {
        let y = u.sqrt();
        // coth y = 1 + 2e^{-2y}/(1 − e^{-2y})
        let e = (-2.0 * y).exp();
        let coth = 1.0 + 2.0 * e / (1.0 - e);
        (y * coth - 1.0) / u
    }
}

fn q_jet(u: &Jet) -> Jet {
    if u.value() <= Q_SERIES_MAX_U {
        u.polynomial(q_series())
    } else {
        let y = u.sqrt();
        let e = (&y * -2.0).exp();
        let coth = 1.0 + (&e * 2.0) / (1.0 - &e);
        (&y * &coth - 1.0) / u
    }
}

/// Subtracted single-oscillator width F(s) for squared frequency s ≥ 0.
pub fn subtracted_width(beta: f64, s: f64) -> f64 {
    beta / 4.0 * q_value(beta * beta * s / 4.0)
}

const DD_JET_ORDER: usize = 18;
const DD_TAYLOR_RATIO: f64 = 0.1;

/// Divided differences (F[s+, s−], (sF)[s+, s−]).
fn width_divided_differences(beta: f64, s_plus: f64, s_minus: f64) -> (f64, f64) {
    let k = beta * beta / 4.0;
    let u_p = k * s_plus;
    let u_m = k * s_minus;
    let mid = 0.5 * (u_p + u_m);
    let half = 0.5 * (u_p - u_m);
    if half.abs() <= DD_TAYLOR_RATIO * (mid + PI * PI) {
        // Odd Taylor coefficients about the midpoint give the divided difference.
        let u = Jet::variable(mid, DD_JET_ORDER);
        let q = q_jet(&u);
        let uq = &u * &q;
        let h2 = half * half;
        let mut dd_q = 0.0;
        let mut dd_uq = 0.0;
        let mut k_odd = DD_JET_ORDER - (1 - DD_JET_ORDER % 2);
        loop {
            dd_q = dd_q * h2 + q.coeff(k_odd);
            dd_uq = dd_uq * h2 + uq.coeff(k_odd);
            if k_odd == 1 {
                break;
            }
            k_odd -= 2;
        }
        // F = (β/4) q(ku): dF/ds-type factor k; sF = (1/β) u q(u).
        (beta / 4.0 * k * dd_q, beta / 4.0 * dd_uq)
    } else {
        let f_p = subtracted_width(beta, s_plus);
        let f_m = subtracted_width(beta, s_minus);
        let ds = s_plus - s_minus;
        ((f_p - f_m) / ds, (s_plus * f_p - s_minus * f_m) / ds)
    }
}

/// Equal-time widths a⊥², a∥², b⊥² at finite temperature.
///
/// b⊥² is the position–momentum correlator entering the W⁽¹⁾ term
/// (ω_c − Ω⊥1) b⊥². It is combined from the equal-time derivative Green
/// function K = (sF)[s+, s−] and a⊥² as b⊥² = Ω⊥1 K − Ω⊥1 a⊥² / 2, which
/// equals ∂(−ln Z / β)/∂Ω⊥1.
pub fn fluctuation_widths(state: &ThermoState, omega: &FrequencyTriple) -> FluctuationWidths {
    let w = widths_raw(state.beta, omega.omega_perp1, omega.omega_perp2, omega.omega_par);
    assert!(
        w.a_perp_sq.is_finite() && w.a_par_sq.is_finite() && w.b_perp_sq.is_finite(),
        "non-finite fluctuation widths for beta = {}, omega = {:?}",
        state.beta,
        omega
    );
    w
}

pub(crate) fn widths_raw(beta: f64, o1: f64, o2: f64, op: f64) -> FluctuationWidths {
    let d = derived_raw(o1, o2);
    let s_plus = d.omega_plus * d.omega_plus;
    let s_minus = d.omega_minus * d.omega_minus;
    let (dd_f, dd_sf) = width_divided_differences(beta, s_plus, s_minus);
    let a_perp_sq = dd_sf - d.omega_sq * dd_f;
    let b_perp_sq = o1 * dd_sf - 0.5 * o1 * a_perp_sq;
    FluctuationWidths { a_perp_sq, a_par_sq: subtracted_width(beta, op * op), b_perp_sq }
}

/// Brute-force Matsubara sums for the three widths, truncated at `m_max`
/// and completed by the leading 1/ω_m² tail.
pub fn matsubara_oracle_widths(
    state: &ThermoState,
    omega: &FrequencyTriple,
    m_max: usize,
) -> FluctuationWidths {
    assert!(m_max >= 1, "m_max must be at least 1");
    let beta = state.beta;
    let o1 = omega.omega_perp1;
    let d = derived_frequencies(omega);
    let s_plus = d.omega_plus * d.omega_plus;
    let s_minus = d.omega_minus * d.omega_minus;
    let op2 = omega.omega_par * omega.omega_par;
    let c = 2.0 * PI / beta;

    let (mut sum_a, mut sum_par, mut sum_b) = (0.0, 0.0, 0.0);
    // Smallest terms first.
    for m in (1..=m_max).rev() {
        let w2 = (c * m as f64).powi(2);
        let den = (w2 + s_plus) * (w2 + s_minus);
        sum_a += (w2 + d.omega_sq) / den;
        sum_b += (w2 - d.omega_sq) / den;
        sum_par += 1.0 / (w2 + op2);
    }
    let tail = 1.0 / (c * c * (m_max as f64 + 0.5));
    FluctuationWidths {
        a_perp_sq: 2.0 / beta * (sum_a + tail),
        a_par_sq: 2.0 / beta * (sum_par + tail),
        b_perp_sq: o1 / beta * (sum_b + tail),
    }
}

/// Bound on |closed form − matsubara_oracle_widths| for each width.
pub fn matsubara_tail_bound(state: &ThermoState, omega: &FrequencyTriple, m_max: usize) -> FluctuationWidths {
    let beta = state.beta;
    let o1 = omega.omega_perp1;
    let d = derived_frequencies(omega);
    let m = m_max as f64;
    let c2 = (2.0 * PI / beta).powi(2);
    let leading = 1.0 / (c2 * 8.0 * m.powi(3));
    let quartic = 1.0 / (c2 * c2 * 3.0 * m.powi(3));
    let sextic = 1.0 / (c2 * c2 * c2 * 5.0 * m.powi(5));
    let w4 = d.omega_sq * d.omega_sq;
    let o1sq = o1 * o1;
    let op2 = omega.omega_par * omega.omega_par;
    FluctuationWidths {
        a_perp_sq: 2.0 / beta * (leading + (d.omega_sq + o1sq).abs() * quartic + w4 * sextic),
        a_par_sq: 2.0 / beta * (leading + op2 * quartic),
        b_perp_sq: o1.abs() / beta * (leading + (3.0 * d.omega_sq + o1sq).abs() * quartic + w4 * sextic),
    }
}

/// β → ∞ limit of the equal-time widths.
///
/// At Ω⊥1 = Ω⊥2 the limit is not uniform; the one-sided value from
/// Ω⊥1 < Ω⊥2 is returned.
pub fn zero_temperature_widths(omega: &FrequencyTriple) -> Result<FluctuationWidths> {
    if !(omega.omega_par > 0.0) {
        return Err(VptError::Domain(format!(
            "zero-temperature longitudinal width needs omega_par > 0, got {}",
            omega.omega_par
        )));
    }
    if !(omega.omega_perp2 > 0.0) {
        return Err(VptError::Domain(format!(
            "zero-temperature transverse width needs omega_perp2 > 0, got {}",
            omega.omega_perp2
        )));
    }
    let o1 = omega.omega_perp1;
    let o2 = omega.omega_perp2;
    // Ω+ + Ω− = max(Ω⊥1, Ω⊥2); for Ω² > 0 the two terms combine to 1/(Ω+ + Ω−).
    let (a_perp_sq, b_perp_sq) = if o1 <= o2 { (1.0 / o2, 0.0) } else { (0.0, 0.5) };
    Ok(FluctuationWidths { a_perp_sq, a_par_sq: 1.0 / (2.0 * omega.omega_par), b_perp_sq })
}

fn check_nondegenerate(d: &DerivedFrequencies) -> Result<()> {
    if d.omega_minus > 0.0 && d.omega_sq != 0.0 && d.omega_plus != d.omega_minus {
        Ok(())
    } else {
        Err(VptError::Domain("time-dependent Green functions need Ω−, Ω² and Ω+ − Ω− nonzero".into()))
    }
}

fn check_times(beta: f64, tau: f64, tau_p: f64) -> Result<()> {
    if (0.0..=beta).contains(&tau) && (0.0..=beta).contains(&tau_p) {
        Ok(())
    } else {
        Err(VptError::Domain(format!("imaginary times must lie in [0, β], got {tau}, {tau_p}")))
    }
}

// cosh(w(Δ − β/2)) / (2w sinh(βw/2)) for 0 ≤ Δ ≤ β, without overflow.
fn oscillator_correlator(beta: f64, w: f64, delta: f64) -> f64 {
    let num = (-w * delta).exp() + (-w * (beta - delta)).exp();
    num / (2.0 * w * (-(-beta * w).exp_m1()))
}

/// G_xx(τ, τ′) = G_yy(τ, τ′) of the trial system, with the classical width
/// 1/(βΩ²) subtracted. Requires non-degenerate frequencies.
pub fn transverse_green(state: &ThermoState, omega: &FrequencyTriple, tau: f64, tau_p: f64) -> Result<f64> {
    check_times(state.beta, tau, tau_p)?;
    let d = derived_frequencies(omega);
    check_nondegenerate(&d)?;
    Ok(quantum_transverse_green(state.beta, &d, (tau - tau_p).abs()) - 1.0 / (state.beta * d.omega_sq))
}

/// Equal-time transverse correlator without the classical subtraction,
/// written with the cosh/sinh form of the two oscillator modes.
pub fn unsubtracted_transverse_width(state: &ThermoState, omega: &FrequencyTriple) -> Result<f64> {
    let d = derived_frequencies(omega);
    check_nondegenerate(&d)?;
    Ok(quantum_transverse_green(state.beta, &d, 0.0))
}

fn quantum_transverse_green(beta: f64, d: &DerivedFrequencies, delta: f64) -> f64 {
    let s_p = d.omega_plus * d.omega_plus;
    let s_m = d.omega_minus * d.omega_minus;
    let g_p = oscillator_correlator(beta, d.omega_plus, delta);
    let g_m = oscillator_correlator(beta, d.omega_minus, delta);
    ((s_p - d.omega_sq) * g_p - (s_m - d.omega_sq) * g_m) / (s_p - s_m)
}

/// Imaginary part of the mixed correlator G_xy(τ, τ′); the real part vanishes.
///
/// Uses the symmetric step function Θ(0) = 1/2, so equal times give exactly 0.
pub fn mixed_green(state: &ThermoState, omega: &FrequencyTriple, tau: f64, tau_p: f64) -> Result<f64> {
    let beta = state.beta;
    check_times(beta, tau, tau_p)?;
    let o1 = omega.omega_perp1;
    if o1 == 0.0 {
        return Ok(0.0);
    }
    let d = derived_frequencies(omega);
    check_nondegenerate(&d)?;
    let g = |w: f64, t: f64, tp: f64| (w * (t - tp - beta / 2.0)).sinh() / (beta * w / 2.0).sinh();
    let bracket = |t: f64, tp: f64| g(d.omega_plus, t, tp) - g(d.omega_minus, t, tp);
    let theta = |x: f64| {
        if x > 0.0 {
            1.0
        } else if x == 0.0 {
            0.5
        } else {
            0.0
        }
    };
    let r = theta(tau - tau_p) * bracket(tau, tau_p) - theta(tau_p - tau) * bracket(tau_p, tau);
    let s_diff = d.omega_plus * d.omega_plus - d.omega_minus * d.omega_minus;
    // (ω/2i) R / (Ω+² − Ω−²) = −i (ω/2) R / (Ω+² − Ω−²)
    Ok(-0.5 * o1 * r / s_diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn triple(a: f64, b: f64, c: f64) -> FrequencyTriple {
        FrequencyTriple::new(a, b, c).unwrap()
    }

    fn state(beta: f64, b: f64) -> ThermoState {
        ThermoState::new(beta, b).unwrap()
    }

    #[test]
    fn derived_frequency_examples() {
        let d = derived_frequencies(&triple(1.0, 3.0, 0.0));
        assert_eq!((d.omega_plus, d.omega_minus, d.omega_sq), (2.0, 1.0, 2.0));
        let d = derived_frequencies(&triple(0.7, 0.7, 0.0));
        assert_eq!((d.omega_plus, d.omega_minus), (0.7, 0.0));
        let d = derived_frequencies(&triple(0.0, 1.4, 0.0));
        assert_eq!((d.omega_plus, d.omega_minus), (0.7, 0.7));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(ThermoState::new(0.0, 1.0).is_err());
        assert!(ThermoState::new(-1.0, 1.0).is_err());
        assert!(ThermoState::new(1.0, -1.0).is_err());
        assert!(FrequencyTriple::new(-1.0, 1.0, 1.0).is_err());
        assert!(FrequencyTriple::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn log_partition_examples() {
        assert_eq!(trial_log_partition(&state(3.0, 0.0), &triple(0.0, 0.0, 0.0)), 0.0);
        let v = trial_log_partition(&state(1.0, 2.0), &triple(2.0, 2.0, 0.0));
        assert_relative_eq!(v, -(1.0_f64.sinh().ln()), epsilon = 1e-15);
        // Far beyond sinh overflow.
        let v = trial_log_partition(&state(1e4, 0.0), &triple(1.0, 3.0, 2.0));
        let y: [f64; 3] = [1e4, 0.5e4, 1e4];
        let expect: f64 = y.iter().map(|y| y.ln() - y + std::f64::consts::LN_2).sum();
        assert_relative_eq!(v, expect, max_relative = 1e-15);
    }

    #[test]
    fn log_x_over_sinh_is_smooth_at_switch() {
        let below = log_x_over_sinh(1.0 - 1e-12);
        let above = log_x_over_sinh(1.0 + 1e-12);
        let slope = 1.0 - 1.0 / 1.0_f64.tanh();
        assert!((above - below - 2e-12 * slope).abs() < 1e-15);
        assert_relative_eq!(log_x_over_sinh(1e-4), -1e-8 / 6.0, max_relative = 1e-8);
        assert_relative_eq!(log_x_over_sinh(2.0), (2.0 / 2.0_f64.sinh()).ln(), epsilon = 1e-15);
    }

    #[test]
    fn q_series_matches_closed_form_at_switch() {
        let u = Q_SERIES_MAX_U;
        let y = u.sqrt();
        let closed = (y / y.tanh() - 1.0) / u;
        assert_relative_eq!(q_value(u), closed, max_relative = 1e-15);
        assert_relative_eq!(q_value(0.0), 1.0 / 3.0, epsilon = 1e-16);
        assert_relative_eq!(q_series()[1], -1.0 / 45.0, max_relative = 1e-15);
        assert_relative_eq!(q_series()[2], 2.0 / 945.0, max_relative = 1e-15);
    }

    #[test]
    fn longitudinal_width_limits() {
        assert_relative_eq!(subtracted_width(1.0, 0.0), 1.0 / 12.0, epsilon = 1e-16);
        let w = fluctuation_widths(&state(1.0, 0.0), &triple(0.0, 0.0, 0.0));
        assert_relative_eq!(w.a_par_sq, 1.0 / 12.0, epsilon = 1e-16);
        assert_relative_eq!(w.a_perp_sq, 1.0 / 12.0, epsilon = 1e-16);
        assert_eq!(w.b_perp_sq, 0.0);
    }

    #[test]
    fn pure_oscillator_reduction() {
        // Ω⊥1 = 0: transverse oscillator with frequency Ω⊥2/2.
        for &(beta, o2) in &[(0.3, 0.2), (2.0, 3.0), (50.0, 1.5)] {
            let w = fluctuation_widths(&state(beta, 1.0), &triple(0.0, o2, 1.0));
            let om: f64 = o2 / 2.0;
            let x = beta * om / 2.0;
            let expect = (x / x.tanh() - 1.0) / (beta * om * om);
            // the oracle itself loses ~ε/x² at small x
            assert_relative_eq!(w.a_perp_sq, expect, max_relative = 1e-11);
            assert_eq!(w.b_perp_sq, 0.0);
        }
    }

    #[test]
    fn matsubara_example_point() {
        let s = state(2.0, 0.0);
        let om = triple(1.0, 2.0, 1.5);
        let w = fluctuation_widths(&s, &om);
        let o = matsubara_oracle_widths(&s, &om, 1_000_000);
        let bound = matsubara_tail_bound(&s, &om, 1_000_000);
        assert!((w.a_perp_sq - o.a_perp_sq).abs() <= bound.a_perp_sq + 1e-14);
        assert!((w.a_par_sq - o.a_par_sq).abs() <= bound.a_par_sq + 1e-14);
        assert!((w.b_perp_sq - o.b_perp_sq).abs() <= bound.b_perp_sq + 1e-14);
    }

    #[test]
    fn matsubara_partial_sums_increase() {
        let s = state(2.0, 0.0);
        let om = triple(1.0, 2.0, 1.5);
        let beta = s.beta();
        let d = derived_frequencies(&om);
        let (sp, sm) = (d.omega_plus.powi(2), d.omega_minus.powi(2));
        let mut partial = 0.0;
        let mut last = 0.0;
        for m in 1..=2000 {
            let w2 = (2.0 * PI * m as f64 / beta).powi(2);
            partial += 2.0 / beta * (w2 + d.omega_sq) / ((w2 + sp) * (w2 + sm));
            assert!(partial > last);
            last = partial;
        }
        assert!(partial < fluctuation_widths(&s, &om).a_perp_sq);
    }

    #[test]
    fn oracle_b_vanishes_without_perp1() {
        let o = matsubara_oracle_widths(&state(1.0, 0.0), &triple(0.0, 2.0, 1.0), 100);
        assert_eq!(o.b_perp_sq, 0.0);
    }

    #[test]
    fn zero_temperature_examples() {
        let w = zero_temperature_widths(&triple(0.0, 2.0, 2.0)).unwrap();
        // Transverse oscillator frequency Ω⊥2/2 = 1: ground-state width 1/(2·1).
        assert_relative_eq!(w.a_perp_sq, 0.5);
        assert_relative_eq!(w.a_par_sq, 0.25);
        assert!(zero_temperature_widths(&triple(0.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn zero_temperature_limit_is_approached_at_order_inverse_beta() {
        // The classical subtraction makes the finite-β widths differ by −1/(βΩ²).
        let om = triple(0.5, 1.9, 0.75);
        let beta = 1e4;
        let t0 = zero_temperature_widths(&om).unwrap();
        let w = fluctuation_widths(&state(beta, 0.0), &om);
        let d = derived_frequencies(&om);
        assert_relative_eq!(w.a_perp_sq, t0.a_perp_sq - 1.0 / (beta * d.omega_sq), max_relative = 1e-12);
        assert_relative_eq!(w.a_par_sq, t0.a_par_sq - 1.0 / (beta * 0.75 * 0.75), max_relative = 1e-12);
    }

    #[test]
    fn hellmann_feynman_identities() {
        // ∂(−lnZ/β)/∂Ω⊥1 = b⊥², ∂/∂Ω⊥2 = Ω⊥2 a⊥²/2, ∂/∂Ω∥ = Ω∥ a∥².
        let beta = 2.0;
        let free = |o: [f64; 3]| -log_partition_raw(beta, o[0], o[1], o[2]) / beta;
        for o in [[1.0, 2.0, 1.5], [0.3, 0.31, 0.1], [2.5, 0.7, 4.0], [0.0, 1.0, 0.0]] {
            let w = widths_raw(beta, o[0], o[1], o[2]);
            let grad = |i: usize| {
                let h = 1e-5;
                let mut p = o;
                let mut m = o;
                p[i] += h;
                m[i] -= h;
                (free(p) - free(m)) / (2.0 * h)
            };
            assert_relative_eq!(grad(0), w.b_perp_sq, epsilon = 1e-9);
            assert_relative_eq!(grad(1), o[1] * w.a_perp_sq / 2.0, epsilon = 1e-9);
            assert_relative_eq!(grad(2), o[2] * w.a_par_sq, epsilon = 1e-9);
        }
    }

    #[test]
    fn green_function_reproduces_equal_time_width() {
        let s = state(1.7, 0.0);
        let om = triple(0.8, 2.3, 1.0);
        let w = fluctuation_widths(&s, &om);
        let g = transverse_green(&s, &om, 0.4, 0.4).unwrap();
        assert_relative_eq!(g, w.a_perp_sq, max_relative = 1e-13);
    }

    #[test]
    fn degenerate_green_function_is_an_error() {
        let s = state(1.0, 0.0);
        assert!(transverse_green(&s, &triple(1.0, 1.0, 1.0), 0.1, 0.2).is_err());
        assert!(transverse_green(&s, &triple(0.5, 1.0, 1.0), 0.1, 2.0).is_err());
    }

    #[test]
    fn mixed_green_vanishes_at_equal_times() {
        let s = state(3.0, 0.0);
        let om = triple(0.9, 1.6, 1.0);
        for t in [0.0, 0.7, 1.5, 3.0] {
            assert_eq!(mixed_green(&s, &om, t, t).unwrap(), 0.0);
        }
    }

    fn widths_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn classical_subtraction(beta in 0.1f64..10.0, o1 in 0.05f64..5.0, o2 in 0.05f64..5.0) {
            prop_assume!((o1 - o2).abs() > 1e-2);
            let s = state(beta, 0.0);
            let om = triple(o1, o2, 1.0);
            let d = derived_frequencies(&om);
            let w = fluctuation_widths(&s, &om);
            let full = unsubtracted_transverse_width(&s, &om).unwrap();
            let restored = w.a_perp_sq + 1.0 / (beta * d.omega_sq);
            prop_assert!((restored - full).abs() <= 1e-10 * full.abs().max(1.0 / (beta * d.omega_sq.abs())));
        }

        #[test]
        fn continuity_at_degeneracies(beta in 0.1f64..20.0, o in 0.01f64..5.0, op in 0.01f64..5.0) {
            let s = state(beta, 0.0);
            let at = fluctuation_widths(&s, &triple(o, o, 0.0));
            for eps in [1e-4, 1e-6, 1e-8] {
                let near = fluctuation_widths(&s, &triple(o, o * (1.0 + eps), eps));
                let tol = 10.0 * eps * (1.0 + beta * o) + 1e-13;
                prop_assert!(widths_close(near.a_perp_sq, at.a_perp_sq, tol));
                prop_assert!(widths_close(near.a_par_sq, at.a_par_sq, tol));
                prop_assert!((near.b_perp_sq - at.b_perp_sq).abs() <= tol * (at.b_perp_sq.abs() + at.a_perp_sq * o));
            }
            let small_par = fluctuation_widths(&s, &triple(o, 2.0 * o, op * 1e-9));
            prop_assert!(widths_close(small_par.a_par_sq, beta / 12.0, 1e-12));
        }

        #[test]
        fn divided_difference_switch_is_seamless(beta in 0.1f64..10.0, mid in 0.0f64..50.0) {
            // Just inside and just outside the Taylor window.
            let k = beta * beta / 4.0;
            let umid = k * mid;
            let h_in = 0.0999 * (umid + PI * PI);
            let h_out = 0.1001 * (umid + PI * PI);
            prop_assume!(umid - h_out >= 0.0);
            let a = width_divided_differences(beta, (umid + h_in) / k, (umid - h_in) / k);
            let b = width_divided_differences(beta, (umid + h_out) / k, (umid - h_out) / k);
            prop_assert!(widths_close(a.0, b.0, 5e-3));
            prop_assert!(widths_close(a.1, b.1, 5e-3));
        }

        #[test]
        fn log_partition_decreases(beta in 0.1f64..20.0, o1 in 0.0f64..5.0, o2 in 0.0f64..5.0, op in 0.0f64..5.0, dh in 0.01f64..1.0) {
            let s = state(beta, 0.0);
            let base = trial_log_partition(&s, &triple(o1, o2, op));
            prop_assert!(trial_log_partition(&s, &triple(o1, o2, op + dh)) < base);
            // Ω⊥1 and Ω⊥2 enter through Ω±; the larger of the two drives the decrease.
            prop_assert!(trial_log_partition(&s, &triple(o1 + dh, o2 + dh, op)) < base);
        }

        #[test]
        fn widths_positive_and_finite(beta in 0.01f64..1e4, o1 in 0.0f64..50.0, o2 in 0.0f64..50.0, op in 0.0f64..50.0) {
            let w = fluctuation_widths(&state(beta, 0.0), &triple(o1, o2, op));
            prop_assert!(w.a_par_sq > 0.0);
            prop_assert!(w.a_perp_sq > 0.0);
            prop_assert!(w.b_perp_sq.is_finite());
        }

        #[test]
        fn green_symmetry_and_periodicity(beta in 0.2f64..5.0, o1 in 0.1f64..3.0, o2 in 0.1f64..3.0, t in 0.0f64..1.0, tp in 0.0f64..1.0) {
            prop_assume!((o1 - o2).abs() > 1e-2);
            let s = state(beta, 0.0);
            let om = triple(o1, o2, 1.0);
            let (t, tp) = (t * beta, tp * beta);
            let gxx = transverse_green(&s, &om, t, tp).unwrap();
            prop_assert!((gxx - transverse_green(&s, &om, tp, t).unwrap()).abs() < 1e-12 * gxx.abs().max(1.0));
            let gxy = mixed_green(&s, &om, t, tp).unwrap();
            prop_assert!((gxy + mixed_green(&s, &om, tp, t).unwrap()).abs() < 1e-12 * gxy.abs().max(1.0));
            let g0 = transverse_green(&s, &om, 0.0, tp).unwrap();
            let gb = transverse_green(&s, &om, beta, tp).unwrap();
            prop_assert!((g0 - gb).abs() < 1e-12 * g0.abs().max(1.0));
            let m0 = mixed_green(&s, &om, 0.0, tp).unwrap();
            let mb = mixed_green(&s, &om, beta, tp).unwrap();
            prop_assert!((m0 - mb).abs() < 1e-10 * m0.abs().max(1.0));
        }
    }
}
