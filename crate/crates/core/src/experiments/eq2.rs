use serde::Serialize;

use super::{ball_extrema, dyadic_radii, estimate_holder, uniform_times, Outcome, ScenarioConfig};
use crate::error::Result;
use crate::field::{FieldKind, ScalarField};
use crate::grid::RegionBall;
use crate::measure::{mass, support};
use crate::solver::{solve, solve_lockstep, SourceTerm};
use crate::transforms::{density_of_pressure, density_value, pressure_value};

/// Final time of the sink equation in the rescaled frame.
const EQ2_END: f64 = 0.5;
const EQ2_SNAPSHOTS: usize = 20;
const DOMINATION_SLACK: f64 = 1e-12;
const MASS_SLOPE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ContainmentCheck {
    pub radius: f64,
    pub worst_excess: f64,
    /// Largest distance from `x0` of a positive cell, over all snapshots.
    pub max_extent: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MassBalanceCheck {
    pub sink_rate: f64,
    pub ball_volume: f64,
    pub expected_slope: f64,
    pub measured_slope: f64,
    pub relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundCheck {
    /// `int w(., 0) >= a^k / 2`; when false the chain is not tested.
    pub applicable: bool,
    pub initial_mass: f64,
    pub mass_half: f64,
    pub mass_threshold: f64,
    pub x_star: [f64; 2],
    pub max_half: f64,
    /// Measured `max w(., 1/2) / a^k`.
    pub c4: f64,
    pub ball_radius: f64,
    pub ball_min: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderCheck {
    pub gamma_assumed: f64,
    pub times: Vec<f64>,
    /// Estimated exponent per time, or the reason it could not be estimated.
    pub estimates: Vec<std::result::Result<f64, String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationCheck {
    /// `max (w - rho_bar)` over cells and snapshots.
    pub excess_over_rhobar: f64,
    /// `max (w - v)`, `v` the sink-free run from the same data.
    pub excess_over_pme: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Eq2Report {
    pub outcome: Outcome,
    pub m: f64,
    pub mtilde: f64,
    pub c1a: f64,
    pub c2a: f64,
    pub cell_width: f64,
    pub times: Vec<f64>,
    pub masses: Vec<f64>,
    pub containment: ContainmentCheck,
    pub mass_balance: MassBalanceCheck,
    pub lower_bound: LowerBoundCheck,
    pub holder: HolderCheck,
    pub domination: DominationCheck,
    pub steps: usize,
}

/// Largest admissible rescaled pressure, `u~ = chi_{B_1(x0)}` (the standing bound `u <= 1`).
pub fn eq2_initial_data(cfg: &ScenarioConfig) -> Result<ScalarField> {
    let ball = RegionBall::new(cfg.x0, 1.0)?;
    ScalarField::from_fn(cfg.grid()?, FieldKind::Pressure, 0.0, |p| if ball.contains(p) { 1.0 } else { 0.0 })
}

pub fn run_eq2_diagnostics(cfg: &ScenarioConfig) -> Result<Eq2Report> {
    run_eq2_with(cfg, &eq2_initial_data(cfg)?)
}

/// Runs the sink equation from `w(.,0) = rho_bar(.,0) chi_{B_1(x0)}`, where
/// `rho_bar` is built from the rescaled pressure `utilde0`, and checks the
/// step-2 claims.
pub fn run_eq2_with(cfg: &ScenarioConfig, utilde0: &ScalarField) -> Result<Eq2Report> {
    let mt = cfg.check_lemma34_regime()?;
    let c1a = cfg.c1a();
    let c2a = cfg.c2 * cfg.a;
    let grid = cfg.grid()?;
    let h = grid.spacing();
    let dim = grid.dim();
    let unit = RegionBall::new(cfg.x0, 1.0)?;
    let sink_ball = RegionBall::new(cfg.x0, 2.0)?;

    let rhobar_of = |rho_tilde: &ScalarField| -> Result<ScalarField> {
        rho_tilde.map(FieldKind::Density, |r| density_value((1.0 - c1a) * pressure_value(r, cfg.m), mt))
    };
    let rho_tilde0 = density_of_pressure(utilde0, cfg.m)?;
    let rhobar0 = rhobar_of(&rho_tilde0)?;
    let w0 = ScalarField::new(
        grid,
        rhobar0
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| if unit.contains(grid.center(i)) { *v } else { 0.0 })
            .collect(),
        FieldKind::Signed,
        0.0,
    )?;

    let times = uniform_times(EQ2_END, EQ2_SNAPSHOTS);
    let sink = SourceTerm::new(sink_ball, -c2a)?;
    let scfg = cfg.solver_config(mt, EQ2_END).with_snapshots(times.clone());
    let runs = solve_lockstep(&[w0.clone(), w0.clone()], &scfg, None, &[Some(&sink), None])?;
    let (w, free) = (&runs[0], &runs[1]);
    let rescaled_drift = cfg.potential.rescaled(cfg.a, cfg.x0);
    let dcfg = cfg.solver_config(cfg.m, EQ2_END).with_snapshots(times.clone());
    let rho_tilde = solve(&rho_tilde0, &dcfg, Some(&rescaled_drift), None)?;

    // (i) containment
    let threshold = cfg.solver.support_threshold * w0.max_abs();
    let contain_ball = RegionBall::new(cfg.x0, cfg.containment_radius)?;
    let mut worst_excess: f64 = 0.0;
    let mut max_extent: f64 = 0.0;
    for snap in &w.snapshots {
        let s = support(snap, threshold);
        worst_excess = worst_excess.max(s.excess_outside(&contain_ball));
        for i in s.indices() {
            max_extent = max_extent.max(crate::grid::distance(grid.center(i), cfg.x0));
        }
    }
    let containment = ContainmentCheck {
        radius: cfg.containment_radius,
        worst_excess,
        max_extent,
        tolerance: h,
        pass: worst_excess <= h,
    };

    // (ii) mass balance
    let ts = w.times();
    let masses: Vec<f64> = w.snapshots.iter().map(mass).collect();
    let measured_slope = linear_slope(&ts, &masses);
    let ball_volume = sink_ball.volume(dim);
    let expected_slope = -ball_volume * c2a;
    let relative_error = if expected_slope == 0.0 {
        measured_slope.abs()
    } else {
        ((measured_slope - expected_slope) / expected_slope).abs()
    };
    let mass_balance = MassBalanceCheck {
        sink_rate: c2a,
        ball_volume,
        expected_slope,
        measured_slope,
        relative_error,
        pass: relative_error <= MASS_SLOPE_TOL,
    };

    // (iii) lower-bound chain at t = 1/2
    let ak = cfg.a.powf(cfg.k);
    let half = w.last();
    let initial_mass = masses[0];
    let x_star = grid.center(half.argmax());
    let max_half = half.max();
    let ball_radius = cfg.a.powf(cfg.k / cfg.gamma).max(0.5 * h);
    let star_ball = RegionBall::new(x_star, ball_radius)?;
    let ball_min = ball_extrema(half, &star_ball)?.0;
    let applicable = initial_mass >= 0.5 * ak;
    let mass_half = *masses.last().unwrap_or(&0.0);
    let lower_bound = LowerBoundCheck {
        applicable,
        initial_mass,
        mass_half,
        mass_threshold: 0.25 * ak,
        x_star,
        max_half,
        c4: max_half / ak,
        ball_radius,
        ball_min,
        pass: !applicable || (mass_half >= 0.25 * ak && ball_min >= 0.5 * max_half && max_half > 0.0),
    };

    // Hoelder regularity on B_2(x0)
    let radii = dyadic_radii(h, 1.0);
    let holder_times = vec![0.25, 0.5];
    let estimates = holder_times
        .iter()
        .map(|t| match w.at_time(*t, 1e-9) {
            Some(f) => estimate_holder(f, &sink_ball, &radii).map_err(|e| e.to_string()),
            None => Err(format!("no snapshot at t={t}")),
        })
        .collect();
    let holder = HolderCheck { gamma_assumed: cfg.gamma, times: holder_times, estimates };

    // (iv) domination
    let mut excess_over_rhobar = f64::NEG_INFINITY;
    let mut excess_over_pme = f64::NEG_INFINITY;
    for ((ws, vs), rs) in w.snapshots.iter().zip(&free.snapshots).zip(&rho_tilde.snapshots) {
        let rb = rhobar_of(rs)?;
        for ((a, b), c) in ws.values().iter().zip(vs.values()).zip(rb.values()) {
            excess_over_pme = excess_over_pme.max(a - b);
            excess_over_rhobar = excess_over_rhobar.max(a - c);
        }
    }
    let domination = DominationCheck {
        excess_over_rhobar,
        excess_over_pme,
        slack: DOMINATION_SLACK,
        pass: excess_over_rhobar <= DOMINATION_SLACK && excess_over_pme <= DOMINATION_SLACK,
    };

    let outcome =
        Outcome::from_bool(containment.pass && mass_balance.pass && lower_bound.pass && domination.pass);
    Ok(Eq2Report {
        outcome,
        m: cfg.m,
        mtilde: mt,
        c1a,
        c2a,
        cell_width: h,
        times: ts,
        masses,
        containment,
        mass_balance,
        lower_bound,
        holder,
        domination,
        steps: w.diagnostics.steps,
    })
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
