//! Subcommand drivers: validate, compute, assemble a table, write it.

use rayon::prelude::*;
use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use vpt_core::acceptance;
use vpt_core::effective_potential::CurveAxis;
use vpt_core::exact_field::exact_field;
use vpt_core::greens::{FrequencyTriple, ThermoState};
use vpt_core::optimizer::{minimize_ground_state, minimize_w1, minimize_w1_from, OptimizationResult, OptimizerConfig};
use vpt_core::strong_field::{asymptotic_binding_energy, iterate_omega_par, landau_estimate};
use vpt_core::weak_field::{solve_series, EXACT_EPS};
use vpt_core::VptError;

use crate::error::CliError;
use crate::table::{to_json, write_csv, Cell, Kind, Table, SCHEMA};
use crate::{AxisArg, Command, Format, GlobalArgs};

/// Status when some records did not converge and --allow-partial is absent.
const EXIT_UNCONVERGED: u8 = 3;
/// Status when `verify` has a failing criterion.
const EXIT_VERIFY_FAILED: u8 = 1;

/// Ω∥ iteration count reported by `strong-field`.
const STRONG_FIELD_ITERATIONS: usize = 3;

#[derive(Serialize)]
struct RunConfig<'a> {
    version: &'static str,
    command: &'a Command,
    #[serde(flatten)]
    global: &'a GlobalArgs,
    optimizer: OptimizerConfig,
}

/// A computed table plus the number of records flagged as unconverged.
struct Output {
    table: Table,
    unconverged: usize,
}

fn optimizer_config(g: &GlobalArgs) -> Result<OptimizerConfig, CliError> {
    let cfg = OptimizerConfig {
        tol_grad: g.tol_grad,
        max_iter: g.max_iter,
        n_multistart: g.multistart,
        seed: g.seed,
        // points already run concurrently; nested parallel starts gain nothing
        parallel: false,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(command: &Command, g: &GlobalArgs) -> Result<ExitCode, CliError> {
    let cfg = optimizer_config(g)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build()?;
    let config = RunConfig { version: env!("CARGO_PKG_VERSION"), command, global: g, optimizer: cfg };

    if let Command::Verify { only, json } = command {
        return pool.install(|| verify(only.as_deref(), *json, &config, g));
    }

    let out = pool.install(|| match command {
        Command::Potential { beta, b, axis, rmin, rmax, points } => {
            potential(*beta, b, *axis, *rmin, *rmax, *points, &cfg, g)
        }
        Command::Binding { b_min, b_max, points, log, b } => {
            let fields = match b {
                Some(list) => list.clone(),
                None => field_grid(*b_min, *b_max, *points, *log)?,
            };
            binding(&fields, &cfg, g)
        }
        Command::WeakField { order } => weak_field(*order),
        Command::StrongField { b } => strong_field(b, &cfg, g),
        Command::ExactField { beta, b } => exact(*beta, *b),
        Command::Verify { .. } => unreachable!(),
    })?;

    let table = if g.si { out.table.to_si() } else { out.table };
    emit(&table, &config, g)?;
    if out.unconverged > 0 {
        eprintln!("vpt: {} record(s) did not converge", out.unconverged);
        if !g.allow_partial {
            return Ok(ExitCode::from(EXIT_UNCONVERGED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sink(g: &GlobalArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &g.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(table: &Table, config: &RunConfig, g: &GlobalArgs) -> Result<(), CliError> {
    let mut w = sink(g)?;
    match g.format {
        Format::Csv => write_csv(table, &mut w)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &to_json(table, config)?)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn field_grid(lo: f64, hi: f64, n: usize, log: bool) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
        return Err(CliError::Usage(format!("need 0 <= Bmin <= Bmax, got {lo}, {hi}")));
    }
    if !log {
        return Ok(linear_grid(lo, hi, n));
    }
    if lo <= 0.0 {
        return Err(CliError::Usage("--log needs Bmin > 0".into()));
    }
    // decades land exactly on powers of ten
    Ok(linear_grid(lo.log10(), hi.log10(), n)
        .into_iter()
        .enumerate()
        .map(|(i, x)| if i == 0 { lo } else if i + 1 == n { hi } else { 10f64.powf(x) })
        .collect())
}

fn check_fields(fields: &[f64]) -> Result<(), CliError> {
    if fields.is_empty() {
        return Err(CliError::Usage("no field values given".into()));
    }
    for &b in fields {
        ThermoState::new(1.0, b)?;
    }
    Ok(())
}

fn with_timing(mut cols: Vec<(&'static str, Kind)>, g: &GlobalArgs) -> Table {
    if g.timing {
        cols.push(("wall_time_s", Kind::Plain));
    }
    Table::new(&cols)
}

fn push_timed(table: &mut Table, mut row: Vec<Cell>, seconds: f64, g: &GlobalArgs) {
    if g.timing {
        row.push(seconds.into());
    }
    table.push(row);
}

fn axes(axis: AxisArg) -> Vec<CurveAxis> {
    match axis {
        AxisArg::T => vec![CurveAxis::Transverse],
        AxisArg::L => vec![CurveAxis::Longitudinal],
        AxisArg::Both => vec![CurveAxis::Transverse, CurveAxis::Longitudinal],
    }
}

fn axis_name(a: CurveAxis) -> &'static str {
    match a {
        CurveAxis::Transverse => "transverse",
        CurveAxis::Longitudinal => "longitudinal",
    }
}

/// Columns: beta, B, r, axis, w1, omega_perp1, omega_perp2, omega_par,
/// converged, grad_norm[, wall_time_s]. Rows grouped by B, then axis, then r.
#[allow(clippy::too_many_arguments)]
fn potential(
    beta: f64,
    fields: &[f64],
    axis: AxisArg,
    rmin: f64,
    rmax: f64,
    points: usize,
    cfg: &OptimizerConfig,
    g: &GlobalArgs,
) -> Result<Output, CliError> {
    check_fields(fields)?;
    let states = fields.iter().map(|&b| ThermoState::new(beta, b)).collect::<Result<Vec<_>, _>>()?;
    if points == 0 || !(rmin.is_finite() && rmax.is_finite() && rmin >= 0.0 && rmax >= rmin) {
        return Err(CliError::Usage(format!("need 0 <= rmin <= rmax and points >= 1, got {rmin}, {rmax}, {points}")));
    }
    let grid = linear_grid(rmin, rmax, points);

    let mut table = with_timing(
        vec![
            ("beta", Kind::InverseTemperature),
            ("B", Kind::Field),
            ("r", Kind::Plain),
            ("axis", Kind::Plain),
            ("w1", Kind::Energy),
            ("omega_perp1", Kind::Energy),
            ("omega_perp2", Kind::Energy),
            ("omega_par", Kind::Energy),
            ("converged", Kind::Plain),
            ("grad_norm", Kind::Plain),
        ],
        g,
    );
    let mut unconverged = 0;
    for state in &states {
        for ax in axes(axis) {
            for (r, (res, secs)) in grid.iter().zip(curve(state, ax, &grid, cfg, g.jobs > 1)?) {
                unconverged += usize::from(!res.converged);
                let o = res.omega_opt;
                let row = vec![
                    beta.into(),
                    state.field().into(),
                    (*r).into(),
                    axis_name(ax).into(),
                    res.value.into(),
                    o.omega_perp1().into(),
                    o.omega_perp2().into(),
                    o.omega_par().into(),
                    res.converged.into(),
                    res.grad_norm.into(),
                ];
                push_timed(&mut table, row, secs, g);
            }
        }
    }
    Ok(Output { table, unconverged })
}

/// Serial: each point warm-started from the previous one. Parallel: independent multi-start.
fn curve(
    state: &ThermoState,
    axis: CurveAxis,
    grid: &[f64],
    cfg: &OptimizerConfig,
    parallel: bool,
) -> Result<Vec<(OptimizationResult, f64)>, VptError> {
    let point = |r: f64, warm: Option<&FrequencyTriple>| {
        let t = Instant::now();
        let x0 = axis.position(r)?;
        let res = match warm {
            Some(w) => minimize_w1_from(state, &x0, cfg, Some(w))?,
            None => minimize_w1(state, &x0, cfg)?,
        };
        Ok((res, t.elapsed().as_secs_f64()))
    };
    if parallel {
        return grid.par_iter().map(|&r| point(r, None)).collect();
    }
    let mut out: Vec<(OptimizationResult, f64)> = Vec::with_capacity(grid.len());
    for &r in grid {
        let warm = out.last().map(|(res, _)| res.omega_opt);
        out.push(point(r, warm.as_ref())?);
    }
    Ok(out)
}

/// Columns: B, eps, E, omega_perp2, omega_par, landau_estimate, converged,
/// grad_norm[, wall_time_s]. landau_estimate is empty for B <= 1.
fn binding(fields: &[f64], cfg: &OptimizerConfig, g: &GlobalArgs) -> Result<Output, CliError> {
    check_fields(fields)?;
    let one = |b: f64| -> Result<(OptimizationResult, f64), VptError> {
        let t = Instant::now();
        let res = minimize_ground_state(b, cfg)?;
        Ok((res, t.elapsed().as_secs_f64()))
    };
    let results: Vec<_> = if g.jobs > 1 {
        fields.par_iter().map(|&b| one(b)).collect::<Result<_, _>>()?
    } else {
        fields.iter().map(|&b| one(b)).collect::<Result<_, _>>()?
    };

    let mut table = with_timing(
        vec![
            ("B", Kind::Field),
            ("eps", Kind::Energy),
            ("E", Kind::Energy),
            ("omega_perp2", Kind::Energy),
            ("omega_par", Kind::Energy),
            ("landau_estimate", Kind::Energy),
            ("converged", Kind::Plain),
            ("grad_norm", Kind::Plain),
        ],
        g,
    );
    let mut unconverged = 0;
    for (&b, (res, secs)) in fields.iter().zip(results) {
        unconverged += usize::from(!res.converged);
        let row = vec![
            b.into(),
            (b / 2.0 - res.value).into(),
            res.value.into(),
            res.omega_opt.omega_perp2().into(),
            res.omega_opt.omega_par().into(),
            landau_estimate(b).ok().into(),
            res.converged.into(),
            res.grad_norm.into(),
        ];
        push_timed(&mut table, row, secs, g);
    }
    Ok(Output { table, unconverged })
}

/// Columns: order, eta, omega, eps, eps_exact (empty where unknown).
fn weak_field(order: usize) -> Result<Output, CliError> {
    let coeffs = solve_series(order)?;
    let mut table = Table::new(&[
        ("order", Kind::Plain),
        ("eta", Kind::Plain),
        ("omega", Kind::Plain),
        ("eps", Kind::Plain),
        ("eps_exact", Kind::Plain),
    ]);
    for c in &coeffs {
        table.push(vec![
            c.order.into(),
            c.eta.into(),
            c.omega.into(),
            c.eps.into(),
            EXACT_EPS.get(c.order).copied().into(),
        ]);
    }
    Ok(Output { table, unconverged: 0 })
}

/// Columns: B, term_1..term_6, six_term_sum, correction, total,
/// omega_par_iterated, omega_par_opt, eps_opt, landau_estimate, converged
/// [, wall_time_s].
fn strong_field(fields: &[f64], cfg: &OptimizerConfig, g: &GlobalArgs) -> Result<Output, CliError> {
    check_fields(fields)?;
    // domain checks before the first optimization
    let breakdowns = fields.iter().map(|&b| asymptotic_binding_energy(b)).collect::<Result<Vec<_>, _>>()?;
    let one = |b: f64| -> Result<(OptimizationResult, f64), VptError> {
        let t = Instant::now();
        let res = minimize_ground_state(b, cfg)?;
        Ok((res, t.elapsed().as_secs_f64()))
    };
    let results: Vec<_> = if g.jobs > 1 {
        fields.par_iter().map(|&b| one(b)).collect::<Result<_, _>>()?
    } else {
        fields.iter().map(|&b| one(b)).collect::<Result<_, _>>()?
    };

    let mut cols = vec![("B", Kind::Field)];
    let names = ["term_1", "term_2", "term_3", "term_4", "term_5", "term_6"];
    cols.extend(names.iter().map(|n| (*n, Kind::Energy)));
    cols.extend([
        ("six_term_sum", Kind::Energy),
        ("correction", Kind::Energy),
        ("total", Kind::Energy),
        ("omega_par_iterated", Kind::Energy),
        ("omega_par_opt", Kind::Energy),
        ("eps_opt", Kind::Energy),
        ("landau_estimate", Kind::Energy),
        ("converged", Kind::Plain),
    ]);
    let mut table = with_timing(cols, g);
    let mut unconverged = 0;
    for ((&b, br), (res, secs)) in fields.iter().zip(&breakdowns).zip(results) {
        unconverged += usize::from(!res.converged);
        let mut row: Vec<Cell> = vec![b.into()];
        row.extend(br.terms.iter().map(|&t| Cell::from(t)));
        row.extend([
            br.six_term_sum.into(),
            br.correction.into(),
            br.total.into(),
            iterate_omega_par(b, STRONG_FIELD_ITERATIONS)?.into(),
            res.omega_opt.omega_par().into(),
            (b / 2.0 - res.value).into(),
            landau_estimate(b)?.into(),
            res.converged.into(),
        ]);
        push_timed(&mut table, row, secs, g);
    }
    Ok(Output { table, unconverged })
}

/// Columns: beta, B, v_eff, log_z_per_area.
fn exact(beta: f64, b: f64) -> Result<Output, CliError> {
    let state = ThermoState::new(beta, b)?;
    let r = exact_field(&state);
    let mut table = Table::new(&[
        ("beta", Kind::InverseTemperature),
        ("B", Kind::Field),
        ("v_eff", Kind::Energy),
        ("log_z_per_area", Kind::Plain),
    ]);
    table.push(vec![beta.into(), b.into(), r.v_eff.into(), r.log_z_per_area.into()]);
    Ok(Output { table, unconverged: 0 })
}

fn verify(only: Option<&str>, json: bool, config: &RunConfig, g: &GlobalArgs) -> Result<ExitCode, CliError> {
    if let Some(key) = only {
        if !acceptance::criteria().iter().any(|c| c.matches(key)) {
            return Err(CliError::Usage(format!("no criterion matches {key:?}")));
        }
    }
    let mut w = sink(g)?;
    let mut reports = Vec::new();
    for c in acceptance::criteria().iter().filter(|c| only.map_or(true, |k| c.matches(k))) {
        let rep = c.run();
        if !json {
            writeln!(w, "{}", rep.line())?;
            w.flush()?;
        }
        reports.push(rep);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if json {
        let doc = serde_json::json!({ "schema": SCHEMA, "config": config, "records": reports });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
    } else {
        writeln!(w, "{} passed, {} failed", reports.len() - failed, failed)?;
    }
    w.flush()?;
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VERIFY_FAILED) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linear_grid(0.0, 8.0, 161)[160], 8.0);
        assert_eq!(linear_grid(0.0, 8.0, 161)[20], 1.0);
        assert_eq!(linear_grid(2.0, 5.0, 1), vec![2.0]);
        let g = field_grid(0.01, 1e5, 8, true).unwrap();
        assert_eq!((g[0], g[7]), (0.01, 1e5));
        assert_eq!(g[1], 0.1);
        assert!(field_grid(0.0, 1.0, 3, true).is_err());
        assert!(field_grid(2.0, 1.0, 3, false).is_err());
    }
}
