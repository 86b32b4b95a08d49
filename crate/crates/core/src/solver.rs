//! Monotone explicit finite-volume steppers.
//!
//! Two equations share one conservative face-flux loop:
//!
//! * density form with drift, `rho_t = lap(rho^m) + div(rho grad Phi)`;
//! * signed form with a sink, `w_t = lap(w |w|^(m-1)) + s * chi_R`.
//!
//! Diffusion uses centered differences of the Kirchhoff transform across each face,
//! drift uses first-order upwinding on `rho`. Boundaries are zero-flux.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldKind, ScalarField};
use crate::grid::{Grid, RegionBall};
use crate::measure::{mass, DEFAULT_SUPPORT_THRESHOLD};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub m: f64,
    pub cfl_fraction: f64,
    pub end_time: f64,
    /// Times (relative to the initial field) at which snapshots are stored.
    pub snapshot_times: Vec<f64>,
    /// Minimum distance, in cells, between the support and the box edge.
    pub support_guard_cells: f64,
    pub positivity_floor: f64,
    /// Relative threshold (times `max |f|`) defining the support for the guard.
    pub support_threshold: f64,
    /// Keep one diagnostic record per time step.
    pub record_steps: bool,
}

impl SolverConfig {
    pub fn new(m: f64, end_time: f64) -> Self {
        Self {
            m,
            cfl_fraction: 0.45,
            end_time,
            snapshot_times: Vec::new(),
            support_guard_cells: 4.0,
            positivity_floor: 0.0,
            support_threshold: DEFAULT_SUPPORT_THRESHOLD,
            record_steps: false,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// `count` equally spaced snapshots on `(0, end_time]`.
    pub fn with_uniform_snapshots(self, count: usize) -> Self {
        let t = self.end_time;
        self.with_snapshots((1..=count).map(|k| t * k as f64 / count as f64).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) {
            return Err(Error::InvalidParameter(format!("exponent m must exceed 1, got {}", self.m)));
        }
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!("cfl_fraction must lie in (0,1], got {}", self.cfl_fraction)));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::InvalidParameter(format!("end_time must be nonnegative, got {}", self.end_time)));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.end_time)) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, {}]", self.end_time)));
        }
        Ok(())
    }
}

/// Constant-rate source on a ball; negative strength is a sink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    pub region: RegionBall,
    pub strength: f64,
    pub active: bool,
}

impl SourceTerm {
    pub fn new(region: RegionBall, strength: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(Error::InvalidParameter("source strength must be finite".into()));
        }
        Ok(Self { region, strength, active: true })
    }

    fn rate(&self) -> f64 {
        if self.active {
            self.strength
        } else {
            0.0
        }
    }

    /// Fraction of each cell covered by the region (exact overlap).
    pub fn cell_weights(&self, grid: &Grid) -> Vec<f64> {
        let vol = grid.cell_volume();
        (0..grid.len()).map(|i| self.region.overlap_volume(grid, i) / vol).collect()
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub time: f64,
    pub dt: f64,
    pub clamped_mass: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub min_dt: f64,
    pub max_dt: f64,
    pub clamped_mass_total: f64,
    pub global_min: f64,
    pub global_max: f64,
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<ScalarField>,
    pub config: SolverConfig,
    pub drift: Option<PotentialSpec>,
    pub source: Option<SourceTerm>,
    pub diagnostics: RunDiagnostics,
}

impl Trajectory {
    /// Builds a trajectory from already computed snapshots (post-processing results).
    pub fn from_snapshots(snapshots: Vec<ScalarField>, config: SolverConfig) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidParameter("trajectory needs at least one snapshot".into()));
        }
        let grid = *snapshots[0].grid();
        if snapshots.iter().any(|s| *s.grid() != grid) {
            return Err(Error::InvalidParameter("snapshots must share one grid".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].time() > w[0].time())) {
            return Err(Error::InvalidParameter("snapshot times must be strictly increasing".into()));
        }
        Ok(Self { snapshots, config, drift: None, source: None, diagnostics: RunDiagnostics::default() })
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn first(&self) -> &ScalarField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ScalarField {
        self.snapshots.last().unwrap()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time()).collect()
    }

    /// Snapshot whose time stamp is within `tol` of `t`.
    pub fn at_time(&self, t: f64, tol: f64) -> Option<&ScalarField> {
        self.snapshots.iter().find(|s| (s.time() - t).abs() <= tol)
    }

    /// Linear-in-time, multilinear-in-space sample; `None` outside the sampled range.
    pub fn sample(&self, p: [f64; 2], t: f64) -> Option<f64> {
        let eps = 1e-12 * (1.0 + t.abs());
        let first = self.first().time();
        let last = self.last().time();
        if t < first - eps || t > last + eps {
            return None;
        }
        let t = t.clamp(first, last);
        let k = self.snapshots.partition_point(|s| s.time() <= t);
        if k == 0 {
            return self.snapshots[0].interpolate(p);
        }
        if k == self.snapshots.len() {
            return self.last().interpolate(p);
        }
        let (a, b) = (&self.snapshots[k - 1], &self.snapshots[k]);
        let theta = (t - a.time()) / (b.time() - a.time());
        let va = a.interpolate(p)?;
        if theta == 0.0 {
            return Some(va);
        }
        Some((1.0 - theta) * va + theta * b.interpolate(p)?)
    }
}

fn kirchhoff(v: f64, m: f64) -> f64 {
    v * v.abs().powf(m - 1.0)
}

/// Face fluxes and CFL bound for one equation on one grid; reusable across steps.
#[derive(Debug, Clone)]
struct FluxOperator {
    grid: Grid,
    m: f64,
    /// `(left, right, velocity)`; velocity `-dPhi/dnu` at the face midpoint.
    faces: Vec<(usize, usize, f64)>,
    /// Largest total outflow speed of any cell.
    max_outflow: f64,
}

impl FluxOperator {
    fn new(grid: Grid, m: f64, drift: Option<&PotentialSpec>) -> Self {
        let mut outflow = vec![0.0f64; grid.len()];
        let faces: Vec<(usize, usize, f64)> = grid
            .faces()
            .into_iter()
            .map(|(l, r, axis)| {
                let v = drift.map_or(0.0, |pot| -pot.gradient(grid.face_midpoint(l, axis))[axis]);
                if v > 0.0 {
                    outflow[l] += v;
                } else {
                    outflow[r] -= v;
                }
                (l, r, v)
            })
            .collect();
        let max_outflow = outflow.into_iter().fold(0.0, f64::max);
        Self { grid, m, faces, max_outflow }
    }

    /// Largest stable step for amplitude `amp`: the explicit update is monotone
    /// when `dt * (2d m amp^(m-1) / h^2 + outflow / h) <= 1`.
    fn stability_limit(&self, amp: f64) -> f64 {
        let h = self.grid.spacing();
        let d = self.grid.dim() as f64;
        let rate = 2.0 * d * self.m * amp.powf(self.m - 1.0) / (h * h) + self.max_outflow / h;
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    }

    /// Conservative explicit update of `values` over `dt`.
    fn apply(&self, values: &[f64], dt: f64) -> Vec<f64> {
        let h = self.grid.spacing();
        let phi: Vec<f64> = values.iter().map(|v| kirchhoff(*v, self.m)).collect();
        let mut out = values.to_vec();
        let diff = dt / (h * h);
        let adv = dt / h;
        for &(l, r, v) in &self.faces {
            // Flux from l to r.
            let upwind = if v > 0.0 { v * values[l] } else { v * values[r] };
            let q = diff * (phi[l] - phi[r]) + adv * upwind;
            out[l] -= q;
            out[r] += q;
        }
        out
    }
}

/// Stable time step for the given field.
///
/// `dt = cfl_fraction / (2 d m max|f|^(m-1) / h^2 + max_outflow / h)`, capped at
/// `remaining`. A zero field without drift or source returns `remaining`.
pub fn cfl_dt(
    f: &ScalarField,
    m: f64,
    cfl_fraction: f64,
    drift: Option<&PotentialSpec>,
    remaining: f64,
) -> f64 {
    let op = FluxOperator::new(*f.grid(), m, drift);
    (cfl_fraction * op.stability_limit(f.max_abs())).min(remaining)
}

fn check_finite(values: &[f64], time: f64) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time });
    }
    Ok(())
}

fn check_dt(op: &FluxOperator, amp: f64, dt: f64) -> Result<()> {
    let limit = op.stability_limit(amp);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

/// Guard band check: no support cell closer than `guard` to the box edge.
fn check_guard(grid: &Grid, values: &[f64], guard: f64, rel_threshold: f64, time: f64) -> Result<()> {
    let amp = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amp == 0.0 {
        return Ok(());
    }
    let threshold = rel_threshold * amp;
    let touches = values
        .iter()
        .enumerate()
        .any(|(i, v)| v.abs() > threshold && grid.distance_to_edge(i) < guard);
    if touches {
        return Err(Error::DomainTooSmall { time });
    }
    Ok(())
}

/// One explicit step of the density form with drift. Returns the new field and
/// the mass added by clamping at `floor`.
pub fn step_density(
    rho: &ScalarField,
    drift: Option<&PotentialSpec>,
    m: f64,
    dt: f64,
    floor: f64,
) -> Result<(ScalarField, f64)> {
    if rho.kind() != FieldKind::Density {
        return Err(Error::InvalidField("step_density expects a density field".into()));
    }
    let op = FluxOperator::new(*rho.grid(), m, drift);
    density_step_with(&op, rho, dt, floor)
}

fn density_step_with(op: &FluxOperator, rho: &ScalarField, dt: f64, floor: f64) -> Result<(ScalarField, f64)> {
    check_dt(op, rho.max_abs(), dt)?;
    let mut values = op.apply(rho.values(), dt);
    let time = rho.time() + dt;
    check_finite(&values, time)?;
    let mut clamped = 0.0;
    for v in values.iter_mut() {
        if *v < floor {
            clamped += floor - *v;
            *v = floor;
        }
    }
    let clamped = clamped * rho.grid().cell_volume();
    Ok((ScalarField::from_parts_unchecked(*rho.grid(), values, FieldKind::Density, time), clamped))
}

/// One explicit step of the signed equation with source. No clamping is applied.
pub fn step_signed(w: &ScalarField, m: f64, source: Option<&SourceTerm>, dt: f64) -> Result<ScalarField> {
    let op = FluxOperator::new(*w.grid(), m, None);
    let weights = source.map(|s| s.cell_weights(w.grid()));
    signed_step_with(&op, w, source, weights.as_deref(), dt)
}

fn signed_step_with(
    op: &FluxOperator,
    w: &ScalarField,
    source: Option<&SourceTerm>,
    weights: Option<&[f64]>,
    dt: f64,
) -> Result<ScalarField> {
    check_dt(op, w.max_abs(), dt)?;
    let mut values = op.apply(w.values(), dt);
    if let (Some(src), Some(weights)) = (source, weights) {
        let inc = src.rate() * dt;
        if inc != 0.0 {
            for (v, wt) in values.iter_mut().zip(weights) {
                *v += inc * wt;
            }
        }
    }
    let time = w.time() + dt;
    check_finite(&values, time)?;
    Ok(ScalarField::from_parts_unchecked(*w.grid(), values, FieldKind::Signed, time))
}

/// Integrates one field; see [`solve_lockstep`].
pub fn solve(
    initial: &ScalarField,
    cfg: &SolverConfig,
    drift: Option<&PotentialSpec>,
    source: Option<&SourceTerm>,
) -> Result<Trajectory> {
    Ok(solve_lockstep(std::slice::from_ref(initial), cfg, drift, &[source])?.remove(0))
}

/// Integrates several fields on the same grid with a common time step (the
/// smallest admissible step over all of them), so that the runs can be compared
/// cellwise. Density fields use the drift equation, signed fields the source equation.
///
/// `sources` is either empty (no source anywhere), a single entry shared by all
/// fields, or one entry per field.
pub fn solve_lockstep(
    initials: &[ScalarField],
    cfg: &SolverConfig,
    drift: Option<&PotentialSpec>,
    sources: &[Option<&SourceTerm>],
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let first = initials
        .first()
        .ok_or_else(|| Error::InvalidParameter("nothing to solve".into()))?;
    let grid = *first.grid();
    let kind = first.kind();
    if initials.iter().any(|f| *f.grid() != grid || f.kind() != kind) {
        return Err(Error::InvalidParameter("lockstep fields must share grid and kind".into()));
    }
    if kind == FieldKind::Pressure {
        return Err(Error::InvalidField("solve expects a density or signed field".into()));
    }
    let signed = kind == FieldKind::Signed;
    let sources: Vec<Option<&SourceTerm>> = match sources.len() {
        0 => vec![None; initials.len()],
        1 => vec![sources[0]; initials.len()],
        n if n == initials.len() => sources.to_vec(),
        n => return Err(Error::InvalidParameter(format!("{n} sources for {} fields", initials.len()))),
    };
    if !signed && sources.iter().any(|s| s.is_some()) {
        return Err(Error::InvalidParameter("sources apply to signed fields only".into()));
    }
    let op = FluxOperator::new(grid, cfg.m, if signed { None } else { drift });
    let weights: Vec<Option<Vec<f64>>> = sources.iter().map(|s| s.map(|s| s.cell_weights(&grid))).collect();
    let source_rate = sources.iter().flatten().map(|s| s.rate().abs()).fold(0.0, f64::max);
    let guard = cfg.support_guard_cells * grid.spacing();

    let t_start = first.time();
    let mut targets: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|t| *t > 0.0).collect();
    targets.push(cfg.end_time);
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

    let mut current: Vec<ScalarField> = initials.iter().map(|f| f.clone().with_time(t_start)).collect();
    for f in &current {
        check_guard(&grid, f.values(), guard, cfg.support_threshold, t_start)?;
    }
    let mut snapshots: Vec<Vec<ScalarField>> = current.iter().map(|f| vec![f.clone()]).collect();
    let mut diags = vec![
        RunDiagnostics { min_dt: f64::INFINITY, global_min: f64::INFINITY, global_max: f64::NEG_INFINITY, ..Default::default() };
        initials.len()
    ];

    let mut elapsed = 0.0f64;
    for &target in &targets {
        while elapsed < target {
            let remaining = target - elapsed;
            let mut amp = current.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
            if signed {
                // Bound on |w| over the rest of the run, so that a pure-source start stays resolved.
                amp += source_rate * (cfg.end_time - elapsed);
            }
            let mut dt = (cfg.cfl_fraction * op.stability_limit(amp)).min(remaining);
            // Land exactly on the target when the remainder is within rounding.
            if remaining - dt <= 1e-12 * remaining.max(1e-300) {
                dt = remaining;
            }
            let step_time = t_start + elapsed + dt;
            for (k, f) in current.iter_mut().enumerate() {
                let (next, clamped) = if signed {
                    (signed_step_with(&op, f, sources[k], weights[k].as_deref(), dt)?, 0.0)
                } else {
                    density_step_with(&op, f, dt, cfg.positivity_floor)?
                };
                let next = next.with_time(step_time);
                check_guard(&grid, next.values(), guard, cfg.support_threshold, step_time)?;
                let d = &mut diags[k];
                d.steps += 1;
                d.min_dt = d.min_dt.min(dt);
                d.max_dt = d.max_dt.max(dt);
                d.clamped_mass_total += clamped;
                let (lo, hi) = (next.min(), next.max());
                d.global_min = d.global_min.min(lo);
                d.global_max = d.global_max.max(hi);
                if cfg.record_steps {
                    d.records.push(StepRecord { time: step_time, dt, clamped_mass: clamped, min: lo, max: hi });
                }
                *f = next;
            }
            elapsed = if dt == remaining { target } else { elapsed + dt };
        }
        for (k, f) in current.iter().enumerate() {
            snapshots[k].push(f.clone().with_time(t_start + target));
        }
    }

    Ok(snapshots
        .into_iter()
        .zip(diags)
        .zip(sources)
        .map(|((snaps, mut diagnostics), source)| {
            if diagnostics.steps == 0 {
                diagnostics.min_dt = 0.0;
                diagnostics.global_min = snaps[0].min();
                diagnostics.global_max = snaps[0].max();
            }
            // Drop the duplicate terminal snapshot when end_time is zero.
            let mut snaps = snaps;
            snaps.dedup_by(|a, b| a.time() == b.time());
            Trajectory {
                snapshots: snaps,
                config: cfg.clone(),
                drift: drift.cloned(),
                source: source.copied(),
                diagnostics,
            }
        })
        .collect())
}

/// Mass of every snapshot.
pub fn mass_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.snapshots.iter().map(|s| (s.time(), mass(s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::measure::mass;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid1(cells: usize) -> Grid {
        Grid::new(1, -4.0, 4.0, cells).unwrap()
    }

    #[test]
    fn cfl_examples() {
        let g = Grid::new(1, 0.0, 1.0, 100).unwrap();
        let zero = ScalarField::zeros(g, FieldKind::Density, 0.0);
        assert_eq!(cfl_dt(&zero, 2.0, 0.45, None, 0.7), 0.7);
        let one = ScalarField::from_fn(g, FieldKind::Density, 0.0, |_| 1.0).unwrap();
        let dt = cfl_dt(&one, 2.0, 0.45, None, 1.0);
        assert!((dt - 1.125e-5).abs() < 1e-18);
        let two = ScalarField::from_fn(g, FieldKind::Density, 0.0, |_| 2.0).unwrap();
        assert!((cfl_dt(&two, 2.0, 0.45, None, 1.0) - dt / 2.0).abs() < 1e-18);
    }

    #[test]
    fn zero_density_stays_zero() {
        let g = grid1(64);
        let pot = PotentialSpec::quadratic(1);
        let z = ScalarField::zeros(g, FieldKind::Density, 0.0);
        let (next, clamped) = step_density(&z, Some(&pot), 2.0, 1e-3, 0.0).unwrap();
        assert!(next.values().iter().all(|v| *v == 0.0));
        assert_eq!(clamped, 0.0);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = grid1(64);
        let one = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (1.0 - p[0] * p[0]).max(0.0)).unwrap();
        let limit = cfl_dt(&one, 2.0, 1.0, None, 1.0);
        assert!(matches!(step_density(&one, None, 2.0, 2.0 * limit, 0.0), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn signed_pure_source() {
        let g = grid1(80);
        let w = ScalarField::zeros(g, FieldKind::Signed, 0.0);
        let region = RegionBall::new([0.0, 0.0], 2.0).unwrap();
        let src = SourceTerm::new(region, -0.3).unwrap();
        let dt = 0.01;
        let next = step_signed(&w, 1.5, Some(&src), dt).unwrap();
        for (i, v) in next.values().iter().enumerate() {
            let expect = if region.contains(g.center(i)) { -0.3 * dt } else { 0.0 };
            assert!((v - expect).abs() < 1e-15);
        }
        let inactive = SourceTerm { active: false, ..src };
        let same = step_signed(&w, 1.5, Some(&inactive), dt).unwrap();
        assert!(same.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn end_time_zero_returns_initial() {
        let g = grid1(64);
        let f = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (1.0 - p[0] * p[0]).max(0.0)).unwrap();
        let traj = solve(&f, &SolverConfig::new(2.0, 0.0), None, None).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.snapshots[0], f);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let g = grid1(64);
        let f = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (1.0 - p[0] * p[0]).max(0.0)).unwrap();
        let cfg = SolverConfig::new(2.0, 0.3).with_snapshots(vec![0.1, 0.2]);
        let traj = solve(&f, &cfg, None, None).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.2, 0.3]);
    }

    #[test]
    fn drift_free_run_conserves_mass() {
        let g = grid1(128);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..g.len())
            .map(|i| if g.center(i)[0].abs() < 1.5 { rng.gen_range(0.0..1.0) } else { 0.0 })
            .collect();
        let f = ScalarField::new(g, vals, FieldKind::Density, 0.0).unwrap();
        let traj = solve(&f, &SolverConfig::new(2.0, 0.2), None, None).unwrap();
        let (m0, m1) = (mass(traj.first()), mass(traj.last()));
        assert!(((m1 - m0) / m0).abs() < 1e-10);
        assert!(traj.last().min() >= -1e-15);
    }

    #[test]
    fn guard_aborts_when_support_nears_edge() {
        let g = Grid::new(1, -1.0, 1.0, 64).unwrap();
        let f = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (0.8 - p[0].abs()).max(0.0)).unwrap();
        let err = solve(&f, &SolverConfig::new(2.0, 5.0), None, None).unwrap_err();
        match err {
            Error::DomainTooSmall { time } => assert!(time > 0.0 && time < 5.0),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn stationary_profile_barely_moves() {
        let g = grid1(256);
        let h = g.spacing();
        let pot = PotentialSpec::quadratic(1);
        let cbar = 0.5;
        let rho = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (cbar - pot.value(p)).max(0.0) / 2.0).unwrap();
        let dt = cfl_dt(&rho, 2.0, 0.45, Some(&pot), 1.0);
        let (next, _) = step_density(&rho, Some(&pot), 2.0, dt, 0.0).unwrap();
        let change = next.values().iter().zip(rho.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(change <= h, "one-step change {change}");
        let traj = solve(&rho, &SolverConfig::new(2.0, 1.0), Some(&pot), None).unwrap();
        let drift = traj.last().values().iter().zip(rho.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(drift <= 20.0 * h, "unit-time drift {drift}");
    }

    #[test]
    fn supersolution_dominates_sink_solution() {
        let g = grid1(160);
        let w0 = ScalarField::from_fn(g, FieldKind::Signed, 0.0, |p| (p[0].abs() <= 1.0) as u8 as f64 * 0.8).unwrap();
        let rho0 = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (p[0].abs() <= 1.0) as u8 as f64 * 0.9).unwrap();
        let src = SourceTerm::new(RegionBall::new([0.0, 0.0], 2.0).unwrap(), -0.05).unwrap();
        let cfg = SolverConfig::new(1.6, 0.5).with_uniform_snapshots(5);
        let rho0_signed = rho0.map(FieldKind::Signed, |v| v).unwrap();
        let runs = solve_lockstep(&[w0.clone(), w0, rho0_signed], &cfg, None, &[Some(&src), None, None]).unwrap();
        // Sink solution <= source-free run from the same data <= run from larger data.
        for (s, (a, b)) in runs[0].snapshots.iter().zip(runs[1].snapshots.iter().zip(&runs[2].snapshots)) {
            for ((ws, wa), wb) in s.values().iter().zip(a.values()).zip(b.values()) {
                assert!(*ws <= wa + 1e-12);
                assert!(*wa <= wb + 1e-12);
            }
        }
    }
}
