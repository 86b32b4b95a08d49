//! Shared oracles for the integration and acceptance tests.
#![allow(dead_code)]

use pmelab::analytic::{barenblatt_pressure, lambda_exponent, BarenblattParams};
use pmelab::solver::{solve, SolverConfig};
use pmelab::transforms::{density_value, lemma35_rescale, parabolic_rescale, pressure_trajectory, TransformParams};
use pmelab::{FieldKind, Grid, Point, ScalarField, Trajectory};

const SUBCELLS: usize = 64;

/// Cell averages of `f` on a 1D grid (midpoint rule on sub-cells).
pub fn cell_average_1d(g: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = g.spacing();
    (0..g.len())
        .map(|i| {
            let left = g.center(i)[0] - 0.5 * h;
            (0..SUBCELLS).map(|j| f(left + (j as f64 + 0.5) * h / SUBCELLS as f64)).sum::<f64>() / SUBCELLS as f64
        })
        .collect()
}

/// Barenblatt profile whose front sits at `|x| = 2` at `t = 0.5`.
pub fn aligned_barenblatt(m: f64) -> BarenblattParams {
    let lambda = lambda_exponent(m, 1);
    let c = lambda / 2.0 * (2.0 / 1.5f64.powf(lambda)).powi(2);
    BarenblattParams::new(c, lambda, [0.0, 0.0]).unwrap()
}

pub fn barenblatt_density(p: &BarenblattParams, m: f64, x: Point, t: f64) -> f64 {
    density_value(barenblatt_pressure(p, x, t), m)
}

/// Cell-averaged Barenblatt density on `g` at time `t`.
pub fn barenblatt_field(p: &BarenblattParams, m: f64, g: &Grid, t: f64) -> ScalarField {
    let v = cell_average_1d(g, |x| barenblatt_density(p, m, [x, 0.0], t));
    ScalarField::new(*g, v, FieldKind::Density, t).unwrap()
}

/// L1 error of the drift-free solve at `t = 0.5` from exact Barenblatt data.
pub fn barenblatt_error(m: f64, cells: usize) -> f64 {
    let p = aligned_barenblatt(m);
    let g = Grid::new(1, -4.0, 4.0, cells).unwrap();
    let traj = solve(&barenblatt_field(&p, m, &g, 0.0), &SolverConfig::new(m, 0.5), None, None).unwrap();
    traj.last().l1_distance(&barenblatt_field(&p, m, &g, 0.5)).unwrap()
}

fn l1_against(f: &ScalarField, exact: impl Fn(Point) -> f64) -> f64 {
    let g = f.grid();
    f.values().iter().enumerate().map(|(i, v)| (v - exact(g.center(i))).abs()).sum::<f64>() * g.cell_volume()
}

/// Gap between "rescale then compare" and "solve the rescaled problem", with
/// the truncation errors of both routes against the exact rescaled profile.
#[derive(Debug, Clone, Copy)]
pub struct CommuteMeasurement {
    pub gap: f64,
    pub e_source: f64,
    pub e_target: f64,
}

impl CommuteMeasurement {
    pub fn within(&self, factor: f64) -> bool {
        self.gap <= factor * self.e_source.max(self.e_target)
    }
}

/// Sum over the snapshots of `a` of the L1 distance to `b` at the same time.
fn sum_l1(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots.iter().map(|x| x.l1_distance(b.at_time(x.time(), 1e-12).unwrap()).unwrap()).sum()
}

/// Parabolic pressure rescaling `u(a (x - x0), a^2 t)` against a direct solve, m = 2.
pub fn parabolic_commute(cells: usize) -> CommuteMeasurement {
    let m = 2.0;
    let (a, x0) = (0.5, [0.25, 0.0]);
    let p = aligned_barenblatt(m);
    let source_grid = Grid::new(1, -4.0, 4.0, cells).unwrap();
    let target_grid = Grid::new(1, -6.0, 6.0, cells * 3 / 2).unwrap();
    let target_times = [0.5, 1.0, 2.0];
    let source_times: Vec<f64> = target_times.iter().map(|t| a * a * t).collect();

    let src = solve(
        &barenblatt_field(&p, m, &source_grid, 0.0),
        &SolverConfig::new(m, 0.5).with_snapshots(source_times),
        None,
        None,
    )
    .unwrap();
    let params = TransformParams { a, x0, t0: 0.0, c1: 0.0, m };
    let rescaled = parabolic_rescale(&pressure_trajectory(&src, m).unwrap(), &params, &target_grid, &target_times).unwrap();

    let exact_u = move |x: Point, t: f64| barenblatt_pressure(&p, [a * (x[0] - x0[0]), 0.0], a * a * t);
    let init = ScalarField::new(
        target_grid,
        cell_average_1d(&target_grid, |x| density_value(exact_u([x, 0.0], 0.0), m)),
        FieldKind::Density,
        0.0,
    )
    .unwrap();
    let direct = solve(&init, &SolverConfig::new(m, 2.0).with_snapshots(target_times.to_vec()), None, None).unwrap();
    let direct_u = pressure_trajectory(&direct, m).unwrap();

    let err = |tr: &Trajectory| -> f64 {
        tr.snapshots.iter().filter(|s| s.time() > 0.0).map(|s| l1_against(s, |x| exact_u(x, s.time()))).sum()
    };
    CommuteMeasurement { gap: sum_l1(&rescaled, &direct_u), e_source: err(&rescaled), e_target: err(&direct_u) }
}

/// Small-mass density rescaling `a^-1 rho(a^(m/2) x, a t)` against a direct solve, m = 2.
pub fn lemma35_commute(cells: usize) -> CommuteMeasurement {
    let m = 2.0;
    let a: f64 = 0.5;
    let s = a.powf(m / 2.0);
    let p = aligned_barenblatt(m);
    let source_grid = Grid::new(1, -4.0, 4.0, cells).unwrap();
    let target_grid = Grid::new(1, -6.0, 6.0, cells * 3 / 2).unwrap();
    let target_times = [0.25, 0.5, 1.0];
    let source_times: Vec<f64> = target_times.iter().map(|t| a * t).collect();

    let src = solve(
        &barenblatt_field(&p, m, &source_grid, 0.0),
        &SolverConfig::new(m, 0.5).with_snapshots(source_times),
        None,
        None,
    )
    .unwrap();
    let rescaled = lemma35_rescale(&src, a, m, &target_grid, &target_times).unwrap();

    let exact = move |x: Point, t: f64| barenblatt_density(&p, m, [s * x[0], 0.0], a * t) / a;
    let init =
        ScalarField::new(target_grid, cell_average_1d(&target_grid, |x| exact([x, 0.0], 0.0)), FieldKind::Density, 0.0)
            .unwrap();
    let direct = solve(&init, &SolverConfig::new(m, 1.0).with_snapshots(target_times.to_vec()), None, None).unwrap();

    let err = |tr: &Trajectory| -> f64 {
        tr.snapshots.iter().filter(|f| f.time() > 0.0).map(|f| l1_against(f, |x| exact(x, f.time()))).sum()
    };
    CommuteMeasurement { gap: sum_l1(&rescaled, &direct), e_source: err(&rescaled), e_target: err(&direct) }
}

/// Random ordered pair `(lo, hi)` of fields; `signed` allows negative values.
pub fn random_ordered_pair(rng: &mut impl rand::Rng, g: &Grid, signed: bool) -> (ScalarField, ScalarField) {
    let bump = |rng: &mut dyn rand::RngCore| {
        let c = [rand::Rng::gen_range(rng, -1.5..1.5), rand::Rng::gen_range(rng, -1.5..1.5)];
        let r: f64 = rand::Rng::gen_range(rng, 0.3..1.2);
        let h: f64 = rand::Rng::gen_range(rng, 0.05..0.8);
        move |p: Point| {
            let d2 = (0..g.dim()).map(|k| (p[k] - c[k]).powi(2)).sum::<f64>();
            h * (1.0 - d2 / (r * r)).max(0.0)
        }
    };
    let (b1, b2, b3) = (bump(rng), bump(rng), bump(rng));
    let kind = if signed { FieldKind::Signed } else { FieldKind::Density };
    let neg = |p: Point| if signed { b3(p) } else { 0.0 };
    let lo = ScalarField::from_fn(*g, kind, 0.0, |p| b1(p) - neg(p)).unwrap();
    let hi = ScalarField::from_fn(*g, kind, 0.0, |p| b1(p) + b2(p) - neg(p)).unwrap();
    (lo, hi)
}

/// Largest `lo - hi` over all cells of all snapshots.
pub fn max_order_violation(lo: &Trajectory, hi: &Trajectory) -> f64 {
    lo.snapshots
        .iter()
        .zip(&hi.snapshots)
        .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect::<Vec<_>>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Runs the CLI binary; returns the exit code and captured stdout + stderr.
pub fn run_cli(args: &[&str]) -> (i32, String) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_pmelab"))
        .args(args)
        .env_remove("PMELAB_OUT")
        .output()
        .expect("binary runs");
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap_or(-1), text)
}

/// All files under `dir` except the manifest, with their bytes, sorted by path.
pub fn data_files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else if p.file_name().unwrap() != "manifest.json" {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut v = Vec::new();
    walk(dir, dir, &mut v);
    v.sort();
    v
}

/// One exit-code expectation of the CLI contract.
pub struct ExitCase {
    pub subcommand: &'static str,
    pub label: &'static str,
    /// Config file body, or `None` for flag-driven subcommands.
    pub config: Option<&'static str>,
    pub extra: &'static [&'static str],
    pub expected: i32,
}

/// Passing, failing, malformed and aborting inputs for every subcommand.
pub fn exit_matrix() -> Vec<ExitCase> {
    let case = |subcommand, label, config, expected| ExitCase { subcommand, label, config: Some(config), extra: &[], expected };
    vec![
        case("solve", "pass", "[scenario]\nm = 1.5\nend_time = 1\n", 0),
        case("solve", "fail", "[scenario]\nm = 1.5\nend_time = 1\n[solver]\npositivity_floor = 1e-12\n", 1),
        case("solve", "malformed", "[scenario]\nm = 1.5\nm = 1.6\n", 2),
        case("solve", "abort", "[scenario]\nm = 1.5\ninitial_radius = 3.99\n", 3),
        case("lemma34", "pass", "[scenario]\nm = 1.5\n", 0),
        case("lemma34", "fail", "[scenario]\nm = 1.5\nk_prime = 0.01\n", 1),
        case("lemma34", "malformed", "[scenario]\nm = 2.5\n", 2),
        case("eq2", "pass", "[scenario]\nm = 1.5\na = 0.001\n", 0),
        case("eq2", "fail", "[scenario]\nm = 1.5\na = 0.001\ncontainment_radius = 1.0\n", 1),
        case("eq2", "malformed", "[scenario]\nm = 1.5\n[grid]\ncels = 10\n", 2),
        case("lemma35", "pass", "[scenario]\nm = 2\n", 0),
        case("lemma35", "fail", "[scenario]\nm = 2\nslope_slack = -0.5\n", 1),
        case("lemma35", "malformed", "[scenario]\nm = 2\nc0_scan = 0.01, big\n", 2),
        case("converge", "pass", "[scenario]\nm = 1.5\n", 0),
        case("converge", "fail", "[scenario]\nm = 1.5\nend_time = 0.3\nsnapshots = 2\n", 1),
        case("converge", "malformed", "[potential]\nform = quadratic\n", 2),
        ExitCase { subcommand: "barrier-check", label: "pass", config: None, extra: &["--m", "1.5", "--dim", "1", "--a", "0.1", "--refine", "3"], expected: 0 },
        ExitCase { subcommand: "barrier-check", label: "fail", config: None, extra: &["--m", "1.5", "--dim", "1", "--a", "0.9", "--refine", "3"], expected: 1 },
        ExitCase { subcommand: "barrier-check", label: "malformed", config: None, extra: &["--m", "1.5", "--a", "fast"], expected: 2 },
        ExitCase { subcommand: "suite", label: "malformed", config: None, extra: &["--jobs", "many"], expected: 2 },
        ExitCase { subcommand: "frobnicate", label: "unknown", config: None, extra: &[], expected: 2 },
    ]
}

/// Runs one case inside `dir`; returns the observed exit code.
pub fn run_exit_case(c: &ExitCase, dir: &std::path::Path) -> i32 {
    let out = dir.join(format!("{}_{}", c.subcommand, c.label));
    let out_s = out.display().to_string();
    let mut args: Vec<String> = vec![c.subcommand.to_string()];
    if let Some(body) = c.config {
        let path = dir.join(format!("{}_{}.cfg", c.subcommand, c.label));
        std::fs::write(&path, body).unwrap();
        args.extend(["--config".to_string(), path.display().to_string()]);
    }
    args.extend(c.extra.iter().map(|s| s.to_string()));
    if c.subcommand != "frobnicate" {
        args.extend(["--out".to_string(), out_s]);
    }
    let refs: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_cli(&refs).0
}
