use std::sync::Arc;

use serde::Serialize;

use confinement_core::branch::{default_lambdas, find_mass_pair, mass_sup_scan, sweep, SweepOptions};
use confinement_core::dynamics::{collocation, evolve, perturb, EvolutionConfig, Perturbation};
use confinement_core::field::write_snapshot;
use confinement_core::ground_state::{solve_ground_state, GroundStateResult, SolverOptions, Start};
use confinement_core::limits::{shoot_1d, shoot_3d, soliton_1d};
use confinement_core::{Discretization, ModelParams, Resolution};

use crate::output::{CliError, CliResult, OutputDir};
use crate::{Cli, Command, EvolveArgs, LimitsArgs, PairArgs, SolveArgs, SweepArgs};

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut out = OutputDir::create(&cli.out)?;
    match &cli.command {
        Command::Solve(a) => solve(cli, a, &mut out)?,
        Command::Sweep(a) => run_sweep(cli, a, &mut out)?,
        Command::Verify(a) => crate::verify::run(cli, a, &mut out)?,
        Command::Limits(a) => limits(a, &mut out)?,
        Command::Pair(a) => pair(cli, a, &mut out)?,
        Command::Evolve(a) => run_evolve(cli, a, &mut out)?,
    }
    out.finish(cli)
}

pub fn solver(cli: &Cli) -> SolverOptions {
    SolverOptions { exec: cli.exec(), ..SolverOptions::default() }
}

pub fn sweep_options(cli: &Cli, resolution: Resolution, finite_differences: bool, eigenvalues: bool) -> SweepOptions {
    SweepOptions { resolution, solver: solver(cli), finite_differences, eigenvalues, exec: cli.exec(), ..SweepOptions::default() }
}

fn require_converged(r: GroundStateResult) -> CliResult<GroundStateResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(confinement_core::Error::NotConverged { iterations: r.iterations, residual: r.gradient_norm }.into())
    }
}

fn solve(cli: &Cli, a: &SolveArgs, out: &mut OutputDir) -> CliResult<()> {
    let params = ModelParams::new(a.p, a.lambda)?;
    let grid = Arc::new(Discretization::from_spec(a.grid.resolution().spec(&params))?);
    let start = match a.guess {
        Some(g) => Start::Guess(g.into()),
        None => Start::MultiStart,
    };
    let r = require_converged(solve_ground_state(&params, grid, start, &solver(cli))?)?;
    write_snapshot(&r.u, &params, out.path(), "u")?;
    out.record("u.json")?;
    out.record("u.bin")?;
    out.write_json("meta.json", &r.meta())?;
    println!("λ = {}  action = {:.10e}  mass = {:.10e}  |∇J| = {:.2e}", a.lambda, r.action, r.mass, r.gradient_norm);
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    p: f64,
    samples: usize,
    converged: usize,
    slopes_disagree: Vec<f64>,
    mass_scan: Option<confinement_core::branch::MassSupReport>,
}

fn run_sweep(cli: &Cli, a: &SweepArgs, out: &mut OutputDir) -> CliResult<()> {
    let lambdas = match &a.lambdas {
        Some(l) if l.is_empty() => return Err(CliError::Config("empty λ list".into())),
        Some(l) => l.clone(),
        None => default_lambdas(a.lambda_min, a.tau_min, a.per_decade),
    };
    let opts = sweep_options(cli, a.grid.resolution(), !a.no_fd, !a.no_eigs);
    let curve = sweep(a.p, &lambdas, &opts)?;
    curve.write_csv(&out.path().join("branch.csv"))?;
    out.record("branch.csv")?;
    let summary = SweepSummary {
        p: a.p,
        samples: curve.samples.len(),
        converged: curve.converged().count(),
        slopes_disagree: curve.samples.iter().filter(|s| s.slopes_agree() == Some(false)).map(|s| s.lambda).collect(),
        mass_scan: mass_sup_scan(&curve).ok(),
    };
    out.write_json("summary.json", &summary)?;
    println!("{} of {} samples converged", summary.converged, summary.samples);
    Ok(())
}

#[derive(Serialize)]
struct LimitsSummary {
    p: f64,
    soliton_1d_amplitude: f64,
    soliton_1d_width: f64,
    soliton_1d_mass: f64,
    shooting_1d: f64,
    shooting_3d: Option<f64>,
    mass_3d: Option<f64>,
}

fn limits(a: &LimitsArgs, out: &mut OutputDir) -> CliResult<()> {
    let sol = soliton_1d(a.p)?;
    let w = shoot_1d(a.p)?;
    w.write_csv(&out.path().join("w1d.csv"))?;
    out.record("w1d.csv")?;
    // the three-dimensional profile exists only below the Sobolev exponent
    let v = if a.p < 6.0 { Some(shoot_3d(a.p)?) } else { None };
    if let Some(v) = &v {
        v.write_csv(&out.path().join("v3d.csv"))?;
        out.record("v3d.csv")?;
    }
    let summary = LimitsSummary {
        p: a.p,
        soliton_1d_amplitude: sol.amplitude,
        soliton_1d_width: sol.width,
        soliton_1d_mass: sol.l2_norm_sq(),
        shooting_1d: w.shooting_value,
        shooting_3d: v.as_ref().map(|v| v.shooting_value),
        mass_3d: v.as_ref().map(|v| v.l2_norm_sq()),
    };
    out.write_json("limits.json", &summary)?;
    Ok(())
}

fn pair(cli: &Cli, a: &PairArgs, out: &mut OutputDir) -> CliResult<()> {
    let opts = sweep_options(cli, a.grid.resolution(), false, false);
    let pair = find_mass_pair(a.p, a.c, &opts)?;
    let s = pair.summary();
    println!("λ = {:.8} ({})  λ = {:.8} ({})", s.lambda_low, s.stability_low, s.lambda_high, s.stability_high);
    out.write_json("pair.json", &s)?;
    Ok(())
}

#[derive(Serialize)]
struct EvolveSummary {
    p: f64,
    lambda: f64,
    steps_recorded: usize,
    t_end: f64,
    mass_drift: f64,
    energy_drift: f64,
    max_distance: f64,
    stopped_early: bool,
}

fn run_evolve(cli: &Cli, a: &EvolveArgs, out: &mut OutputDir) -> CliResult<()> {
    let params = ModelParams::new(a.p, a.lambda)?;
    let cfg = EvolutionConfig {
        dt: a.dt,
        t_final: a.t_final,
        perturbation: Perturbation { amplitude: a.amplitude, shape: a.shape.into(), seed: a.seed },
        record_every: a.record_every,
        sector: a.sector.into(),
        metric: a.metric.into(),
        stop_above: a.stop_above,
    };
    cfg.validate()?;
    let grid = Arc::new(Discretization::from_spec(collocation(a.grid.resolution().spec(&params)))?);
    let u = require_converged(solve_ground_state(&params, grid, Start::MultiStart, &solver(cli))?)?.u;
    let psi0 = perturb(&u, &cfg.perturbation, cfg.sector, cfg.metric)?;
    let trace = evolve(&psi0, &u, &params, &cfg)?;
    trace.write_csv(&out.path().join("trace.csv"))?;
    out.record("trace.csv")?;
    let t_end = trace.points.last().map_or(0.0, |q| q.t);
    let summary = EvolveSummary {
        p: a.p,
        lambda: a.lambda,
        steps_recorded: trace.points.len(),
        t_end,
        mass_drift: trace.mass_drift(),
        energy_drift: trace.energy_drift(),
        max_distance: trace.max_distance(),
        stopped_early: t_end < a.t_final - 0.5 * a.dt,
    };
    println!("t = {t_end:.4}  max distance = {:.4e}  mass drift = {:.2e}", summary.max_distance, summary.mass_drift);
    out.write_json("summary.json", &summary)?;
    Ok(())
}
