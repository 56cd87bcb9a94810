//! The acceptance suite, shared by the `acceptance` test target and `vpt verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

use crate::effective_potential::{potential_curve, w1_asymptote, CurveAxis};
use crate::error::Result;
use crate::exact_field::{exact_log_partition_per_area, exact_veff, phase_space_partition_per_area};
use crate::greens::{fluctuation_widths, matsubara_oracle_widths, matsubara_tail_bound, FrequencyTriple, ThermoState};
use crate::optimizer::{binding_energy, minimize_ground_state, OptimizerConfig};
use crate::smearing::{coulomb_expectation, coulomb_expectation_zero_t, smear_potential, Position};
use crate::strong_field::asymptotic_binding_energy;
use crate::weak_field::{series_residual, solve_series};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub group: &'static str,
    pub passed: bool,
    pub measured: String,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub group: &'static str,
    pub budget_seconds: Option<f64>,
    check: fn() -> Result<Outcome>,
}

struct Outcome {
    passed: bool,
    measured: String,
}

impl Criterion {
    /// `--only` filter: criterion number, group or name.
    pub fn matches(&self, key: &str) -> bool {
        let key = key.trim().to_ascii_lowercase();
        key == self.id.to_string() || key == self.group || key == self.name
    }

    pub fn run(&self) -> CriterionReport {
        let start = Instant::now();
        let outcome = (self.check)();
        let seconds = start.elapsed().as_secs_f64();
        let (mut passed, mut measured) = match outcome {
            Ok(o) => (o.passed, o.measured),
            Err(e) => (false, format!("error: {e}")),
        };
        if let Some(b) = self.budget_seconds {
            if seconds > b {
                passed = false;
                measured.push_str(&format!("; over time budget ({seconds:.1} s > {b} s)"));
            }
        }
        CriterionReport {
            id: self.id,
            name: self.name,
            group: self.group,
            passed,
            measured,
            seconds,
            budget_seconds: self.budget_seconds,
        }
    }
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.measured
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, group, budget, check| Criterion { id, name, group, budget_seconds: budget, check };
    vec![
        c(1, "series-coefficients", "weak-field", Some(5.0), series_coefficients as fn() -> Result<Outcome>),
        c(2, "zero-field-ground-state", "optimizer", Some(1.0), zero_field_ground_state),
        c(3, "strong-field-value", "optimizer", Some(10.0), strong_field_value),
        c(4, "asymptotic-breakdown", "strong-field", Some(1.0), asymptotic_breakdown),
        c(5, "landau-level-limit", "optimizer", Some(2.0), landau_level_limit),
        c(6, "green-function-oracle", "greens", Some(30.0), green_function_oracle),
        c(7, "smearing-oracle", "smearing", Some(60.0), smearing_oracle),
        c(8, "zero-temperature-limit", "smearing", None, zero_temperature_limit),
        c(9, "weak-field-scaling", "weak-field", None, weak_field_scaling),
        c(10, "potential-curve-structure", "effective-potential", Some(120.0), potential_curve_structure),
        c(11, "exact-field-equivalence", "exact-field", None, exact_field_equivalence),
    ]
}

/// Runs every criterion matching `only` (all when `None`).
pub fn run(only: Option<&str>) -> Vec<CriterionReport> {
    criteria().iter().filter(|c| only.map_or(true, |k| c.matches(k))).map(Criterion::run).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn series_coefficients() -> Result<Outcome> {
    let p = PI;
    let expect = [
        (1.0, 32.0 / (9.0 * p), -4.0 / (3.0 * p)),
        (-405.0 * p.powi(2) / 7168.0, 99.0 * p / 224.0, 9.0 * p / 128.0),
        (16_828_965.0 * p.powi(4) / 1_258_815_488.0, -1_293_975.0 * p.powi(3) / 19_668_992.0, -8019.0 * p.powi(3) / 1_835_008.0),
        (
            -3_886_999_332_075.0 * p.powi(6) / 884_272_562_962_432.0,
            524_431_667_187.0 * p.powi(5) / 27_633_517_592_576.0,
            256_449_807.0 * p.powi(5) / 322_256_764_928.0,
        ),
    ];
    let got = solve_series(3)?;
    let mut worst: f64 = 0.0;
    for (c, e) in got.iter().zip(expect.iter()) {
        worst = worst.max(rel(c.eta, e.0)).max(rel(c.omega, e.1)).max(rel(c.eps, e.2));
    }
    Ok(Outcome { passed: worst < 1e-6, measured: format!("max relative deviation {worst:.2e} over 12 coefficients") })
}

fn zero_field_ground_state() -> Result<Outcome> {
    let r = minimize_ground_state(0.0, &OptimizerConfig::default())?;
    let err = (r.value + 4.0 / (3.0 * PI)).abs();
    Ok(Outcome { passed: r.converged && err <= 1e-8, measured: format!("E = {:.12}, |E + 4/(3π)| = {err:.2e}", r.value) })
}

fn strong_field_value() -> Result<Outcome> {
    let e = binding_energy(1e5, &OptimizerConfig::default())?;
    Ok(Outcome { passed: (20.55..=20.65).contains(&e), measured: format!("ε(1e5) = {e:.6}") })
}

fn asymptotic_breakdown() -> Result<Outcome> {
    let t = asymptotic_binding_energy(1e5)?;
    let table = [42.1912, -35.8181, 7.6019, 4.8173, 3.3098, 0.7632];
    let worst = t.terms.iter().zip(table.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let passed = worst <= 1e-3
        && (t.six_term_sum - 22.87).abs() <= 0.01
        && (t.correction + 2.29).abs() <= 0.01
        && (t.total - 20.58).abs() <= 0.01;
    Ok(Outcome {
        passed,
        measured: format!(
            "max term deviation {worst:.1e}, sum {:.4}, correction {:.4}, total {:.4}",
            t.six_term_sum, t.correction, t.total
        ),
    })
}

fn landau_level_limit() -> Result<Outcome> {
    let cfg = OptimizerConfig { coulomb: false, ..Default::default() };
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for b in [0.1, 1.0, 10.0, 1e3] {
        let r = minimize_ground_state(b, &cfg)?;
        ok &= r.converged && r.omega_opt.omega_par() == 0.0;
        worst = worst.max((r.value - b / 2.0).abs());
    }
    Ok(Outcome { passed: ok && worst <= 1e-8, measured: format!("max |E − ω_c/2| = {worst:.2e}") })
}

fn green_function_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m_max = 1_000_000;
    let mut worst_rel: f64 = 0.0;
    let mut within = true;
    for _ in 0..50 {
        let mut draw = || rng.gen_range(0.1..10.0);
        let state = ThermoState::new(draw(), 1.0)?;
        let omega = FrequencyTriple::new(draw(), draw(), draw())?;
        let w = fluctuation_widths(&state, &omega);
        let o = matsubara_oracle_widths(&state, &omega, m_max);
        let bound = matsubara_tail_bound(&state, &omega, m_max);
        for (a, b, e) in [
            (w.a_perp_sq, o.a_perp_sq, bound.a_perp_sq),
            (w.a_par_sq, o.a_par_sq, bound.a_par_sq),
            (w.b_perp_sq, o.b_perp_sq, bound.b_perp_sq),
        ] {
            // summation round-off of 10⁶ terms on top of the analytic tail bound
            within &= (a - b).abs() <= e + 1e-13 * b.abs().max(1e-300);
            worst_rel = worst_rel.max(rel(a, b));
        }
    }
    Ok(Outcome {
        passed: within && worst_rel < 1e-4,
        measured: format!("max relative error {worst_rel:.2e}, all within tail bound: {within}"),
    })
}

fn smearing_oracle() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let ap: f64 = 10f64.powf(rng.gen_range(-1.5..0.5));
        let az: f64 = 10f64.powf(rng.gen_range(-1.5..0.5));
        let x0 = Position::new(rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0))?;
        let w = crate::greens::FluctuationWidths { a_perp_sq: ap, a_par_sq: az, b_perp_sq: 0.0 };
        let one_d = coulomb_expectation(&w, &x0)?.value;
        let three_d = smear_potential(&w, &x0, |p| -1.0 / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())?.value;
        worst = worst.max(rel(one_d, three_d));
    }
    Ok(Outcome { passed: worst < 1e-6, measured: format!("max relative error {worst:.2e} over 20 cases") })
}

fn zero_temperature_limit() -> Result<Outcome> {
    let beta = 1e4;
    let state = ThermoState::new(beta, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let o2: f64 = rng.gen_range(0.2..5.0);
        // c = 2Ω∥/Ω⊥2 − 1 below, near and above zero
        let c = match i % 3 {
            0 => rng.gen_range(-0.95..-0.3),
            1 => rng.gen_range(-0.3..0.3),
            _ => rng.gen_range(0.3..5.0),
        };
        let op = o2 * (1.0 + c) / 2.0;
        let zero_t = coulomb_expectation_zero_t(o2, op)?;
        let widths = fluctuation_widths(&state, &FrequencyTriple::new(0.0, o2, op)?);
        let finite = coulomb_expectation(&widths, &Position::origin())?.value;
        worst = worst.max(rel(finite, zero_t));
    }
    let mut jump: f64 = 0.0;
    for o2 in [0.5, 1.0, 3.0] {
        let mid = coulomb_expectation_zero_t(o2, o2 / 2.0)?;
        for s in [-1.0, 1.0] {
            let v = coulomb_expectation_zero_t(o2, o2 / 2.0 * (1.0 + s * 1e-9))?;
            jump = jump.max(rel(v, mid));
        }
    }
    Ok(Outcome {
        passed: worst < 1e-6 && jump < 1e-6,
        measured: format!("max relative error at β = 1e4: {worst:.2e}; continuity at 2Ω∥ = Ω⊥2: {jump:.2e}"),
    })
}

fn weak_field_scaling() -> Result<Outcome> {
    let cfg = OptimizerConfig::default();
    let coeffs = solve_series(3)?;
    let fields = [0.01, 0.02, 0.05];
    let mut pts = Vec::new();
    for b in fields {
        let r = series_residual(b, &coeffs, &cfg)?;
        pts.push((b.ln(), r.abs().ln(), r / b.powi(8)));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let cs: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.2)).collect();
    Ok(Outcome {
        passed: (slope - 8.0).abs() <= 0.5,
        measured: format!("log-log slope {slope:.3}, residual/B⁸ = [{}]", cs.join(", ")),
    })
}

fn potential_curve_structure() -> Result<Outcome> {
    let state = ThermoState::new(100.0, 2.0)?;
    let cfg = OptimizerConfig::default();
    let grid: Vec<f64> = (0..161).map(|i| 8.0 * i as f64 / 160.0).collect();
    let t = potential_curve(&state, CurveAxis::Transverse, &grid, &cfg)?;
    let l = potential_curve(&state, CurveAxis::Longitudinal, &grid, &cfg)?;
    let converged = t.iter().chain(l.iter()).all(|s| s.converged);
    let argmin = |c: &[crate::effective_potential::PotentialSample]| {
        (0..c.len()).min_by(|&i, &j| c[i].w1.total_cmp(&c[j].w1)).unwrap_or(0)
    };
    let min_at_origin = argmin(&t) == 0 && argmin(&l) == 0;
    let ordered = grid.iter().zip(t.iter().zip(l.iter())).filter(|(r, _)| **r > 0.0 && **r <= 2.0).all(|(_, (a, b))| a.w1 >= b.w1);

    // Far-field check at eight times the largest fluctuation width of the origin optimum.
    let w0 = fluctuation_widths(&state, &t[0].omega_opt);
    let r_far = 8.0 * w0.a_perp_sq.max(w0.a_par_sq).sqrt();
    let asym = w1_asymptote(&state);
    let mut far_dev: f64 = 0.0;
    for axis in [CurveAxis::Transverse, CurveAxis::Longitudinal] {
        let s = potential_curve(&state, axis, &[r_far], &cfg)?;
        far_dev = far_dev.max((s[0].w1 - asym).abs());
    }
    Ok(Outcome {
        passed: converged && min_at_origin && ordered && far_dev <= 1e-3,
        measured: format!(
            "converged {converged}, minimum at r = 0: {min_at_origin}, transverse ≥ longitudinal on (0, 2]: {ordered}, \
             |W − asymptote| at r = {r_far:.3}: {far_dev:.3e}"
        ),
    })
}

fn exact_field_equivalence() -> Result<Outcome> {
    let mut identical = true;
    for &(beta, b) in &[(0.1, 0.5), (1.0, 2.0), (100.0, 2.0), (1e3, 1e-3)] {
        let s = ThermoState::new(beta, b)?;
        identical &= exact_veff(&s).to_bits() == w1_asymptote(&s).to_bits();
    }
    let s = ThermoState::new(1.0, 2.0)?;
    let (z, err) = phase_space_partition_per_area(&s, 1.0, 1e-8)?;
    let exact = exact_log_partition_per_area(&s).exp();
    let dev = rel(z, exact);
    Ok(Outcome {
        passed: identical && dev <= 1e-6,
        measured: format!("bitwise equal: {identical}; phase-space Z·λ²/A = {z:.12} vs {exact:.12} (rel {dev:.1e}, est. error {err:.1e})"),
    })
}
