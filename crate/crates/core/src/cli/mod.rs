//! Command-line front end.
//!
//! Exit codes: 0 every check passed, 1 some check did not pass, 2 usage or
//! configuration error, 3 runtime abort.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{load_config, parse_config, serialize_config};
pub use output::{svg_log_plot, OutputDir, RunManifest};

use crate::analytic::certify_barrier;
use crate::error::{Error, Result};
use crate::experiments::{
    convergence_initial_data, default_c1, run_convergence, run_eq2_diagnostics, run_lemma34, run_lemma35, uniform_times,
    Outcome, ScenarioConfig,
};
use crate::measure::mass;
use crate::potential::PotentialSpec;
use crate::solver::{mass_series, solve};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_ABORT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pmelab", version, about = "Porous medium equation experiments", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (INI sections [scenario], [solver], [grid], [potential], [output]).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, env = "PMELAB_OUT", default_value = "pmelab-out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the drift equation from the configured bump and record mass and snapshots.
    #[command(after_help = config::defaults_help())]
    Solve(Common),
    /// Mass-to-pointwise lower bound: `u(., t0 + a) >= a^k'` on `B_a(x0)`.
    #[command(after_help = config::defaults_help())]
    Lemma34(Common),
    /// Sink-equation diagnostics: containment, mass balance, lower-bound chain, domination.
    #[command(after_help = config::defaults_help())]
    Eq2(Common),
    /// Small-mass decay scan over `c0_scan`.
    #[command(after_help = config::defaults_help())]
    Lemma35(Common),
    /// Free-boundary convergence to equilibrium with exponential rate fits.
    #[command(after_help = config::defaults_help())]
    Converge(Common),
    /// Residual refinement study certifying the drained Barenblatt barrier.
    BarrierCheck(BarrierArgs),
    /// Run the built-in scenario suite in parallel.
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Args)]
struct BarrierArgs {
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    a: f64,
    /// Number of grid refinements.
    #[arg(long, default_value_t = 3)]
    refine: usize,
    /// Drift constant; defaults to the C^2 norm of |x|^2/2 on the unit ball.
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long, env = "PMELAB_OUT", default_value = "pmelab-out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, env = "PMELAB_OUT", default_value = "pmelab-out")]
    out: PathBuf,
}

#[derive(Debug, Clone)]
enum Task {
    Solve(ScenarioConfig),
    Lemma34(ScenarioConfig),
    Eq2(ScenarioConfig),
    Lemma35(ScenarioConfig),
    Converge(ScenarioConfig),
    Barrier { m: f64, dim: usize, a: f64, c1: f64, refine: usize },
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Solve(_) => "solve",
            Task::Lemma34(_) => "lemma34",
            Task::Eq2(_) => "eq2",
            Task::Lemma35(_) => "lemma35",
            Task::Converge(_) => "converge",
            Task::Barrier { .. } => "barrier-check",
        }
    }

    fn config_json(&self) -> serde_json::Value {
        match self {
            Task::Solve(c) | Task::Lemma34(c) | Task::Eq2(c) | Task::Lemma35(c) | Task::Converge(c) => {
                serde_json::to_value(c).unwrap_or(serde_json::Value::Null)
            }
            Task::Barrier { m, dim, a, c1, refine } => {
                serde_json::json!({ "m": m, "dim": dim, "a": a, "c1": c1, "refine": refine })
            }
        }
    }
}

/// Exit code for an error: configuration problems are usage errors, the rest are aborts.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Regime(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) => {
            EXIT_USAGE
        }
        _ => EXIT_ABORT,
    }
}

fn outcome_code(o: Outcome) -> i32 {
    if o == Outcome::Pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

#[derive(Debug, Serialize)]
struct SolveReport {
    outcome: Outcome,
    steps: usize,
    final_time: f64,
    initial_mass: f64,
    final_mass: f64,
    mass_relative_drift: f64,
    clamped_mass_total: f64,
    global_min: f64,
    global_max: f64,
    min_dt: f64,
    max_dt: f64,
}

const MASS_DRIFT_TOL: f64 = 1e-10;

fn write_config(out: &mut OutputDir, cfg: &ScenarioConfig) -> Result<()> {
    out.write_text("config.ini", &serialize_config(cfg))
}

/// Runs one task into `out`, returning the per-check outcomes.
fn run_task(task: &Task, out: &mut OutputDir, watch: &mut output::Stopwatch) -> Result<BTreeMap<String, Outcome>> {
    let mut outcomes = BTreeMap::new();
    match task {
        Task::Solve(cfg) => {
            write_config(out, cfg)?;
            let initial = convergence_initial_data(cfg)?;
            let scfg = cfg.solver_config(cfg.m, cfg.end_time).with_snapshots(uniform_times(cfg.end_time, cfg.snapshots));
            let traj = watch.time("solve", || solve(&initial, &scfg, Some(&cfg.potential), None))?;
            let m0 = mass(&initial);
            let m1 = mass(traj.last());
            let drift = if m0 > 0.0 { ((m1 - m0) / m0).abs() } else { m1.abs() };
            let d = &traj.diagnostics;
            let outcome = Outcome::from_bool(drift <= MASS_DRIFT_TOL && d.global_min >= 0.0);
            let report = SolveReport {
                outcome,
                steps: d.steps,
                final_time: traj.last().time(),
                initial_mass: m0,
                final_mass: m1,
                mass_relative_drift: drift,
                clamped_mass_total: d.clamped_mass_total,
                global_min: d.global_min,
                global_max: d.global_max,
                min_dt: d.min_dt,
                max_dt: d.max_dt,
            };
            let mut csv = String::from("t,mass\n");
            csv.push_str(&format!("{},{}\n", initial.time(), m0));
            for (t, mm) in mass_series(&traj) {
                csv.push_str(&format!("{t},{mm}\n"));
            }
            out.write_text("mass.csv", &csv)?;
            out.write_text("final.csv", &traj.last().to_csv())?;
            if cfg.output.snapshots_csv {
                for (i, s) in traj.snapshots.iter().enumerate() {
                    out.write_text(&format!("snapshots/snap_{i:04}.csv"), &s.to_csv())?;
                }
            }
            out.write_json("report.json", &report)?;
            outcomes.insert("mass_conservation".into(), outcome);
        }
        Task::Lemma34(cfg) => {
            cfg.check_lemma34_regime()?;
            write_config(out, cfg)?;
            let r = watch.time("lemma34", || run_lemma34(cfg))?;
            out.write_json("report.json", &r)?;
            outcomes.insert("lower_bound".into(), r.outcome);
        }
        Task::Eq2(cfg) => {
            cfg.check_lemma34_regime()?;
            write_config(out, cfg)?;
            let r = watch.time("eq2", || run_eq2_diagnostics(cfg))?;
            let mut csv = String::from("t,mass\n");
            for (t, mm) in r.times.iter().zip(&r.masses) {
                csv.push_str(&format!("{t},{mm}\n"));
            }
            out.write_text("mass.csv", &csv)?;
            out.write_json("report.json", &r)?;
            outcomes.insert("containment".into(), Outcome::from_bool(r.containment.pass));
            outcomes.insert("mass_balance".into(), Outcome::from_bool(r.mass_balance.pass));
            outcomes.insert(
                "lower_bound_chain".into(),
                if r.lower_bound.applicable { Outcome::from_bool(r.lower_bound.pass) } else { Outcome::HypothesisNotMet },
            );
            outcomes.insert("domination".into(), Outcome::from_bool(r.domination.pass));
        }
        Task::Lemma35(cfg) => {
            write_config(out, cfg)?;
            let r = watch.time("lemma35", || run_lemma35(cfg))?;
            let mut csv = String::from("c0,t2,max_b1,max_ball_mass,hypothesis_held\n");
            for row in &r.rows {
                csv.push_str(&format!("{},{},{},{},{}\n", row.c0, row.t2, row.max_b1, row.max_ball_mass, row.hypothesis_held));
            }
            out.write_text("scan.csv", &csv)?;
            out.write_json("report.json", &r)?;
            outcomes.insert("decay_slope".into(), r.outcome);
        }
        Task::Converge(cfg) => {
            write_config(out, cfg)?;
            let r = watch.time("converge", || run_convergence(cfg))?;
            out.write_text("distances.csv", &r.to_csv())?;
            if cfg.output.svg {
                let pos: Vec<(f64, f64)> = r.times.iter().copied().zip(r.d_pos.iter().copied()).collect();
                let gam: Vec<(f64, f64)> = r.times.iter().copied().zip(r.d_gamma.iter().copied()).collect();
                let title = format!("free boundary distance, m = {}", r.m);
                out.write_text("distances.svg", &svg_log_plot(&title, "t", "distance", &[("d_pos", pos), ("d_gamma", gam)]))?;
            }
            out.write_json("report.json", &r)?;
            outcomes.insert("d_pos_rate".into(), Outcome::from_bool(r.fit_pos.pass));
            if r.fit_gamma.asserted {
                outcomes.insert("d_gamma_rate".into(), Outcome::from_bool(r.fit_gamma.pass));
            }
        }
        Task::Barrier { m, dim, a, c1, refine } => {
            let cert = watch.time("barrier", || certify_barrier(*m, *dim, *a, *c1, *refine))?;
            let mut csv = String::from("h,dt,exact_error,tol,barrier_max,pass\n");
            for r in &cert.rows {
                csv.push_str(&format!("{},{},{},{},{},{}\n", r.h, r.dt, r.exact_error, r.tol, r.barrier_max, r.pass));
            }
            out.write_text("refinement.csv", &csv)?;
            out.write_json("report.json", &cert)?;
            outcomes.insert("barrier".into(), Outcome::from_bool(cert.pass));
        }
    }
    Ok(outcomes)
}

/// Runs a task with manifest bookkeeping; returns the exit code and its file list.
fn execute(task: &Task, root: &Path) -> (i32, Vec<String>) {
    let mut out = match OutputDir::create(root) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory {}: {e}", root.display());
            return (EXIT_ABORT, Vec::new());
        }
    };
    let mut watch = output::Stopwatch::default();
    let mut manifest = RunManifest::new(task.name(), task.config_json());
    let result = run_task(task, &mut out, &mut watch);
    manifest.wall_clock_seconds = watch.into_map();
    let code = match result {
        Ok(outcomes) => {
            let overall = if outcomes.values().all(|o| *o == Outcome::Pass) {
                Outcome::Pass
            } else if outcomes.values().any(|o| *o == Outcome::Fail) {
                Outcome::Fail
            } else {
                Outcome::HypothesisNotMet
            };
            manifest.outcomes = outcomes.into_iter().map(|(k, v)| (k, v.as_str().to_string())).collect();
            manifest.overall = overall.as_str().into();
            println!("{}: {}", task.name(), overall.as_str());
            outcome_code(overall)
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.error = Some(e.to_string());
            exit_code_for(&e)
        }
    };
    if let Err(e) = manifest.write(&mut out) {
        eprintln!("error: cannot write manifest: {e}");
        return (EXIT_ABORT, out.files().to_vec());
    }
    (code, out.files().to_vec())
}

fn quadratic_c1(dim: usize) -> f64 {
    default_c1(&PotentialSpec::quadratic(dim), [0.0, 0.0])
}

/// Scenarios run by `suite`, keyed by subdirectory name.
pub fn suite_scenarios() -> Vec<(String, String)> {
    suite_tasks().into_iter().map(|(k, t)| (k, t.name().to_string())).collect()
}

fn suite_tasks() -> Vec<(String, Task)> {
    let quad = |m: f64| ScenarioConfig::with_defaults(m, 1, PotentialSpec::quadratic(1));
    let mut tasks = Vec::new();
    for a in [0.05, 0.1] {
        let mut c = quad(1.5);
        c.a = a;
        c.c2 = crate::experiments::default_c2(c.m, c.c1, a);
        tasks.push((format!("lemma34_a{a}"), Task::Lemma34(c)));
    }
    let mut eq2 = quad(1.5);
    eq2.a = 0.001;
    eq2.c2 = crate::experiments::default_c2(eq2.m, eq2.c1, eq2.a);
    tasks.push(("eq2_m1.5".into(), Task::Eq2(eq2)));
    tasks.push(("lemma35_m2".into(), Task::Lemma35(quad(2.0))));
    tasks.push(("converge_m1.5".into(), Task::Converge(quad(1.5))));
    tasks.push(("converge_m3".into(), Task::Converge(quad(3.0))));
    tasks.push(("solve_m2".into(), Task::Solve(quad(2.0))));
    tasks.push(("barrier_m1.5".into(), Task::Barrier { m: 1.5, dim: 1, a: 0.1, c1: quadratic_c1(1), refine: 3 }));
    tasks
}

fn run_suite(args: &SuiteArgs) -> i32 {
    let tasks = suite_tasks();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ABORT;
        }
    };
    let results: Vec<(String, &'static str, i32, Vec<String>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(name, task)| {
                let (code, files) = execute(task, &args.out.join(name));
                (name.clone(), task.name(), code, files)
            })
            .collect()
    });
    let mut out = match OutputDir::create(&args.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ABORT;
        }
    };
    #[derive(Serialize)]
    struct Entry {
        subcommand: &'static str,
        exit_code: i32,
    }
    let mut summary = BTreeMap::new();
    for (name, sub, code, files) in &results {
        out.adopt(name, files);
        summary.insert(name.clone(), Entry { subcommand: sub, exit_code: *code });
    }
    let worst = results.iter().map(|r| r.2).max().unwrap_or(EXIT_PASS);
    let mut manifest = RunManifest::new("suite", serde_json::json!({ "jobs": args.jobs }));
    let status = |c: i32| match c {
        EXIT_PASS => "PASS",
        EXIT_FAIL => "FAIL",
        _ => "ERROR",
    };
    manifest.outcomes = results.iter().map(|r| (r.0.clone(), status(r.2).to_string())).collect();
    manifest.overall = status(worst).into();
    if out.write_json("summary.json", &summary).and_then(|_| manifest.write(&mut out)).is_err() {
        return EXIT_ABORT;
    }
    println!("suite: {}", status(worst));
    worst
}

fn load_task(common: &Common, make: fn(ScenarioConfig) -> Task) -> std::result::Result<(Task, PathBuf), i32> {
    match load_config(&common.config) {
        Ok(cfg) => Ok((make(cfg), common.out.clone())),
        Err(e) => {
            eprintln!("error: {}: {e}", common.config.display());
            Err(EXIT_USAGE)
        }
    }
}

/// Parses `argv` (including the program name), runs the subcommand and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let loaded = match cli.command {
        Command::Solve(c) => load_task(&c, Task::Solve),
        Command::Lemma34(c) => load_task(&c, Task::Lemma34),
        Command::Eq2(c) => load_task(&c, Task::Eq2),
        Command::Lemma35(c) => load_task(&c, Task::Lemma35),
        Command::Converge(c) => load_task(&c, Task::Converge),
        Command::BarrierCheck(b) => {
            let c1 = b.c1.unwrap_or_else(|| quadratic_c1(b.dim));
            Ok((Task::Barrier { m: b.m, dim: b.dim, a: b.a, c1, refine: b.refine }, b.out))
        }
        Command::Suite(s) => return run_suite(&s),
    };
    match loaded {
        Ok((task, out)) => execute(&task, &out).0,
        Err(code) => code,
    }
}
