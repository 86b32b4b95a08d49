//! Exact algebraic and scaling maps between pressure, density and rescaled variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldKind, ScalarField};
use crate::grid::{Grid, Point};
use crate::solver::Trajectory;

/// `u = m/(m-1) rho^(m-1)`.
pub fn pressure_of_density(rho: &ScalarField, m: f64) -> Result<ScalarField> {
    check_m(m)?;
    if rho.kind() != FieldKind::Density {
        return Err(Error::InvalidField("expected a density field".into()));
    }
    let k = m / (m - 1.0);
    rho.map(FieldKind::Pressure, |r| k * r.powf(m - 1.0))
}

/// `rho = ((m-1)/m u)^(1/(m-1))`.
pub fn density_of_pressure(u: &ScalarField, m: f64) -> Result<ScalarField> {
    check_m(m)?;
    if u.kind() != FieldKind::Pressure {
        return Err(Error::InvalidField("expected a pressure field".into()));
    }
    Ok(u.map(FieldKind::Density, |v| density_value(v, m))?)
}

pub fn density_value(u: f64, m: f64) -> f64 {
    ((m - 1.0) / m * u).powf(1.0 / (m - 1.0))
}

pub fn pressure_value(rho: f64, m: f64) -> f64 {
    m / (m - 1.0) * rho.powf(m - 1.0)
}

fn check_m(m: f64) -> Result<()> {
    if !(m > 1.0) {
        return Err(Error::InvalidParameter(format!("exponent m must exceed 1, got {m}")));
    }
    Ok(())
}

/// Effective exponent `(m-1)/(1-C1a) + 1` of the scaled pressure.
///
/// With `require_below_two`, values `>= 2` are rejected.
pub fn mtilde(m: f64, c1a: f64, require_below_two: bool) -> Result<f64> {
    check_m(m)?;
    if !(0.0..1.0).contains(&c1a) {
        return Err(Error::InvalidParameter(format!("C1*a must lie in [0, 1), got {c1a}")));
    }
    let mt = (m - 1.0) / (1.0 - c1a) + 1.0;
    debug_assert!(c1a == 0.0 || mt > m);
    if require_below_two && mt >= 2.0 {
        return Err(Error::Regime(format!(
            "m~ = {mt} must stay below 2 (needs C1*a < 2 - m = {}), requires 1<m<2",
            2.0 - m
        )));
    }
    Ok(mt)
}

/// `u_bar = (1 - C1a) u`.
pub fn ubar_transform(u: &ScalarField, c1a: f64) -> Result<ScalarField> {
    if !(0.0..1.0).contains(&c1a) {
        return Err(Error::InvalidParameter(format!("C1*a must lie in [0, 1), got {c1a}")));
    }
    u.map(u.kind(), |v| (1.0 - c1a) * v)
}

/// Decay exponent `2 / (m (n+1))` of the small-mass bound.
pub fn lemma35_exponent(m: f64, n: usize) -> f64 {
    assert!(m > 1.0 && n >= 1);
    2.0 / (m * (n as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub a: f64,
    pub x0: Point,
    pub t0: f64,
    pub c1: f64,
    pub m: f64,
}

impl TransformParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) {
            return Err(Error::InvalidParameter(format!("scale a must be positive, got {}", self.a)));
        }
        if !(self.c1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("C1 must be nonnegative, got {}", self.c1)));
        }
        check_m(self.m)
    }

    pub fn c1a(&self) -> f64 {
        self.c1 * self.a
    }
}

/// Resamples `traj` on `target_grid` at `target_times`, with the value at `(x, t)` taken
/// from the source point `map(x, t)` and multiplied by `amplitude`.
fn resample(
    traj: &Trajectory,
    target_grid: &Grid,
    target_times: &[f64],
    kind: FieldKind,
    amplitude: f64,
    map: impl Fn(Point, f64) -> (Point, f64),
) -> Result<Trajectory> {
    let mut snaps = Vec::with_capacity(target_times.len());
    for &t in target_times {
        let mut values = Vec::with_capacity(target_grid.len());
        for x in target_grid.centers() {
            let (y, s) = map(x, t);
            let v = traj.sample(y, s).ok_or(Error::OutOfDomain { point: y, time: s })?;
            values.push(amplitude * v);
        }
        snaps.push(ScalarField::new(*target_grid, values, kind, t)?);
    }
    let mut cfg = traj.config.clone();
    cfg.snapshot_times = target_times.to_vec();
    Trajectory::from_snapshots(snaps, cfg)
}

/// Parabolic rescaling `u~(x, t) = u(a (x - x0), a^2 (t - t0))` of a pressure trajectory.
pub fn parabolic_rescale(
    traj: &Trajectory,
    p: &TransformParams,
    target_grid: &Grid,
    target_times: &[f64],
) -> Result<Trajectory> {
    p.validate()?;
    if traj.first().kind() != FieldKind::Pressure {
        return Err(Error::InvalidField("parabolic_rescale expects a pressure trajectory".into()));
    }
    let (a, x0, t0) = (p.a, p.x0, p.t0);
    resample(traj, target_grid, target_times, FieldKind::Pressure, 1.0, |x, t| {
        ([a * (x[0] - x0[0]), a * (x[1] - x0[1])], a * a * (t - t0))
    })
}

/// Small-mass rescaling `rho~(x, t) = a^-1 rho(a^(m/2) x, a t)` of a density trajectory.
pub fn lemma35_rescale(
    traj: &Trajectory,
    a: f64,
    m: f64,
    target_grid: &Grid,
    target_times: &[f64],
) -> Result<Trajectory> {
    check_m(m)?;
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("scale a must be positive, got {a}")));
    }
    if traj.first().kind() != FieldKind::Density {
        return Err(Error::InvalidField("lemma35_rescale expects a density trajectory".into()));
    }
    let s = a.powf(m / 2.0);
    resample(traj, target_grid, target_times, FieldKind::Density, 1.0 / a, |x, t| ([s * x[0], s * x[1]], a * t))
}

/// Converts every snapshot of a density trajectory to pressure.
pub fn pressure_trajectory(traj: &Trajectory, m: f64) -> Result<Trajectory> {
    let snaps = traj.snapshots.iter().map(|s| pressure_of_density(s, m)).collect::<Result<Vec<_>>>()?;
    let mut out = Trajectory::from_snapshots(snaps, traj.config.clone())?;
    out.drift = traj.drift.clone();
    out.diagnostics = traj.diagnostics.clone();
    Ok(out)
}

/// Converts every snapshot of a pressure trajectory to density.
pub fn density_trajectory(traj: &Trajectory, m: f64) -> Result<Trajectory> {
    let snaps = traj.snapshots.iter().map(|s| density_of_pressure(s, m)).collect::<Result<Vec<_>>>()?;
    Trajectory::from_snapshots(snaps, traj.config.clone())
}
