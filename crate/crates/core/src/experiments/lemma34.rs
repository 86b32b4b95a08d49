use serde::Serialize;

use super::{ball_extrema, Outcome, ScenarioConfig};
use crate::error::Result;
use crate::field::{FieldKind, ScalarField};
use crate::grid::RegionBall;
use crate::measure::ball_average;
use crate::solver::solve;
use crate::transforms::pressure_of_density;

#[derive(Debug, Clone, Serialize)]
pub struct Lemma34Report {
    pub outcome: Outcome,
    pub m: f64,
    pub mtilde: f64,
    pub a: f64,
    pub a0: f64,
    /// `a^-n int_{B_a(x0)} rho(., t0)`.
    pub hypothesis_value: f64,
    /// `a^k`.
    pub hypothesis_threshold: f64,
    pub hypothesis_met: bool,
    pub final_time: f64,
    /// `min_{B_a(x0)} u(., t0 + a)`.
    pub min_pressure: Option<f64>,
    /// `a^k'`.
    pub conclusion_threshold: f64,
    pub margin: Option<f64>,
    pub steps: usize,
    pub max_pressure_initial: f64,
}

/// Plateau on `B_a(x0)` whose height makes `a^-n int_{B_a} rho` equal `a^k` exactly.
pub fn lemma34_initial_data(cfg: &ScenarioConfig) -> Result<ScalarField> {
    let grid = cfg.grid()?;
    let ball = RegionBall::new(cfg.x0, cfg.a)?;
    let indicator = ScalarField::from_fn(grid, FieldKind::Density, cfg.t0, |p| f64::from(u8::from(ball.contains(p))))?;
    let level = cfg.a.powf(cfg.k) / ball_average(&indicator, &ball)?;
    indicator.map(FieldKind::Density, |v| v * level)
}

pub fn run_lemma34(cfg: &ScenarioConfig) -> Result<Lemma34Report> {
    cfg.check_lemma34_regime()?;
    run_lemma34_with(cfg, &lemma34_initial_data(cfg)?)
}

/// Evolves the drift equation from `t0` to `t0 + a` and checks `u >= a^k'` on `B_a(x0)`.
pub fn run_lemma34_with(cfg: &ScenarioConfig, initial: &ScalarField) -> Result<Lemma34Report> {
    let mtilde = cfg.check_lemma34_regime()?;
    let ball = RegionBall::new(cfg.x0, cfg.a)?;
    let initial = initial.clone().with_time(cfg.t0);
    let hypothesis_value = ball_average(&initial, &ball)?;
    let hypothesis_threshold = cfg.a.powf(cfg.k);
    let hypothesis_met = hypothesis_value >= hypothesis_threshold * (1.0 - 1e-12);
    let conclusion_threshold = cfg.a.powf(cfg.k_prime);
    let max_pressure_initial = pressure_of_density(&initial, cfg.m)?.max();
    let mut report = Lemma34Report {
        outcome: Outcome::HypothesisNotMet,
        m: cfg.m,
        mtilde,
        a: cfg.a,
        a0: (2.0 - cfg.m) / cfg.c1,
        hypothesis_value,
        hypothesis_threshold,
        hypothesis_met,
        final_time: cfg.t0 + cfg.a,
        min_pressure: None,
        conclusion_threshold,
        margin: None,
        steps: 0,
        max_pressure_initial,
    };
    if !hypothesis_met {
        return Ok(report);
    }
    let scfg = cfg.solver_config(cfg.m, cfg.a).with_snapshots(vec![cfg.a]);
    let traj = solve(&initial, &scfg, Some(&cfg.potential), None)?;
    let u = pressure_of_density(traj.last(), cfg.m)?;
    let (min_u, _) = ball_extrema(&u, &ball)?;
    report.min_pressure = Some(min_u);
    report.margin = Some(min_u - conclusion_threshold);
    report.steps = traj.diagnostics.steps;
    report.outcome = Outcome::from_bool(min_u >= conclusion_threshold);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialSpec;

    fn cfg() -> ScenarioConfig {
        let mut c = ScenarioConfig::with_defaults(1.5, 1, PotentialSpec::quadratic(1));
        c.grid.lower = -1.0;
        c.grid.upper = 1.0;
        c.grid.cells = 400;
        c
    }

    #[test]
    fn small_case_passes() {
        let r = run_lemma34(&cfg()).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{r:?}");
        assert!((r.hypothesis_value - r.hypothesis_threshold).abs() < 1e-12);
    }

    #[test]
    fn zero_data_does_not_test_conclusion() {
        let c = cfg();
        let zero = ScalarField::zeros(c.grid().unwrap(), FieldKind::Density, 0.0);
        let r = run_lemma34_with(&c, &zero).unwrap();
        assert_eq!(r.outcome, Outcome::HypothesisNotMet);
        assert!(r.min_pressure.is_none());
    }

    #[test]
    fn enlarging_data_keeps_pass() {
        let c = cfg();
        let base = lemma34_initial_data(&c).unwrap();
        let bigger = base.map(FieldKind::Density, |v| v * 1.3).unwrap();
        let wider = ScalarField::from_fn(*base.grid(), FieldKind::Density, 0.0, |p| {
            if p[0].abs() < 2.0 * c.a { c.a.powf(c.k) } else { 0.0 }
        })
        .unwrap();
        assert_eq!(run_lemma34_with(&c, &base).unwrap().outcome, Outcome::Pass);
        for data in [bigger, wider] {
            assert_eq!(run_lemma34_with(&c, &data).unwrap().outcome, Outcome::Pass);
        }
    }

    #[test]
    fn rejects_m_above_two_before_solving() {
        let mut c = cfg();
        c.m = 2.5;
        assert!(run_lemma34(&c).unwrap_err().to_string().contains("requires 1<m<2"));
    }
}
