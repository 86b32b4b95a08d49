//! Barenblatt pressure profiles, the drained barrier and residual certification
//! of the pressure operator with drift remainder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{distance, Grid, Point};

/// Self-similar exponent `1 / ((m-1) d + 2)`.
pub fn lambda_exponent(m: f64, d: usize) -> f64 {
    assert!(m > 1.0 && (d == 1 || d == 2), "lambda_exponent needs m > 1 and d in {{1,2}}");
    let lambda = 1.0 / ((m - 1.0) * d as f64 + 2.0);
    debug_assert!(lambda < 0.5);
    lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarenblattParams {
    pub c: f64,
    pub lambda: f64,
    pub center: Point,
    /// Shift of the time argument; the profile is evaluated at `t + time_offset`.
    pub time_offset: f64,
}

impl BarenblattParams {
    pub fn new(c: f64, lambda: f64, center: Point) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("Barenblatt height must be positive, got {c}")));
        }
        if !(lambda > 0.0 && lambda < 0.5) {
            return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1/2), got {lambda}")));
        }
        Ok(Self { c, lambda, center, time_offset: 1.0 })
    }

    /// Free-boundary radius `sqrt(2C/lambda) (t+1)^lambda`.
    pub fn support_radius(&self, t: f64) -> f64 {
        (2.0 * self.c / self.lambda).sqrt() * (t + self.time_offset).powf(self.lambda)
    }

    /// Peak value `C (t+1)^(2 lambda - 1)`.
    pub fn peak(&self, t: f64) -> f64 {
        self.c * (t + self.time_offset).powf(2.0 * self.lambda - 1.0)
    }

    /// `|DU|` at `x` (zero outside the support).
    pub fn gradient_norm(&self, x: Point, t: f64) -> f64 {
        if barenblatt_pressure(self, x, t) > 0.0 {
            self.lambda * distance(x, self.center) / (t + self.time_offset)
        } else {
            0.0
        }
    }
}

/// `(C (t+1)^(2 lambda) - lambda/2 |x - x*|^2)_+ / (t+1)`.
pub fn barenblatt_pressure(p: &BarenblattParams, x: Point, t: f64) -> f64 {
    let tau = t + p.time_offset;
    let r2 = distance(x, p.center).powi(2);
    (p.c * tau.powf(2.0 * p.lambda) - 0.5 * p.lambda * r2).max(0.0) / tau
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub base: BarenblattParams,
    pub c1: f64,
    pub a: f64,
}

impl BarrierParams {
    pub fn new(base: BarenblattParams, c1: f64, a: f64) -> Result<Self> {
        if !(c1 * a >= 0.0) {
            return Err(Error::InvalidParameter(format!("C1*a must be nonnegative, got {}", c1 * a)));
        }
        Ok(Self { base, c1, a })
    }
}

/// Growth envelope `sqrt(C) (t+1)^(lambda-1)`.
pub fn growth_bound(p: &BarenblattParams, t: f64) -> f64 {
    p.c.sqrt() * (t + p.time_offset).powf(p.lambda - 1.0)
}

/// Closed form of `2 C1 a int_0^t c(s) ds`.
pub fn drainage(bp: &BarrierParams, t: f64) -> f64 {
    let p = &bp.base;
    let off = p.time_offset;
    2.0 * bp.c1 * bp.a * p.c.sqrt() * ((t + off).powf(p.lambda) - off.powf(p.lambda)) / p.lambda
}

/// `(U(x, t) - drainage(t))_+`.
pub fn barrier_eval(bp: &BarrierParams, x: Point, t: f64) -> f64 {
    (barenblatt_pressure(&bp.base, x, t) - drainage(bp, t)).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoundReport {
    /// `max (a U - c(t))` over sampled points of the support.
    pub max_excess_amplitude: f64,
    /// `max (|DU| - c(t))` over sampled points of the support.
    pub max_excess_gradient: f64,
    pub slack: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Samples `a U` and `|DU|` against `c(t)` on `[0, t_max]` over the support of U.
pub fn gradient_bound_check(p: &BarenblattParams, a: f64, t_max: f64, grid: &Grid, time_samples: usize) -> GradientBoundReport {
    // closed-form evaluation: only rounding slack
    let slack = 1e-12;
    let mut amp: f64 = f64::NEG_INFINITY;
    let mut grad: f64 = f64::NEG_INFINITY;
    let mut samples = 0;
    let steps = time_samples.max(2);
    for k in 0..steps {
        let t = t_max * k as f64 / (steps - 1) as f64;
        let c = growth_bound(p, t);
        let mut check = |x: Point| {
            let u = barenblatt_pressure(p, x, t);
            if u > 0.0 {
                amp = amp.max(a * u - c);
                grad = grad.max(p.gradient_norm(x, t) - c);
                samples += 1;
            }
        };
        grid.centers().for_each(&mut check);
        // The gradient peaks at the free boundary itself; include it exactly.
        let r = p.support_radius(t) * (1.0 - 1e-12);
        let mut edge = p.center;
        edge[0] += r;
        check(edge);
    }
    GradientBoundReport {
        max_excess_amplitude: amp,
        max_excess_gradient: grad,
        slack,
        samples,
        pass: samples > 0 && amp <= slack && grad <= slack,
    }
}

/// Parameters of the pressure operator
/// `R = f_t - (m-1) f lap f - |Df|^2 + C1 a (|Df| + a f)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureOperator {
    pub m: f64,
    pub c1: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    /// Residual per time slice and cell; `None` where it was not evaluated.
    #[serde(skip)]
    pub values: Vec<Vec<Option<f64>>>,
    pub max_residual: f64,
    pub max_abs_residual: f64,
    /// Cells with `f > delta` whose stencil reaches the free boundary.
    pub boundary_layer: usize,
    pub evaluated: usize,
}

/// Evaluates `R` by central differences (spatial step `grid.spacing()`, temporal step
/// `dt`) at the cell centers of `grid` where `f > delta` and the whole stencil lies in
/// the positivity set.
pub fn residual_pressure_operator(
    field_fn: &dyn Fn(Point, f64) -> f64,
    op: PressureOperator,
    grid: &Grid,
    times: &[f64],
    dt: f64,
    delta: f64,
) -> Result<ResidualReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("positivity margin must be positive".into()));
    }
    let h = grid.spacing();
    let dim = grid.dim();
    let mut values = Vec::with_capacity(times.len());
    let mut max_r = f64::NEG_INFINITY;
    let mut max_abs: f64 = 0.0;
    let mut layer = 0;
    let mut evaluated = 0;
    for &t in times {
        if t - dt < 0.0 {
            return Err(Error::Precondition(format!("time stencil at t={t} reaches below 0")));
        }
        let mut slice = vec![None; grid.len()];
        for (idx, slot) in slice.iter_mut().enumerate() {
            let x = grid.center(idx);
            let f0 = field_fn(x, t);
            if f0 <= delta {
                continue;
            }
            let mut stencil = Vec::with_capacity(2 * dim);
            for axis in 0..dim {
                let mut xp = x;
                let mut xm = x;
                xp[axis] += h;
                xm[axis] -= h;
                if !grid.contains(xp) || !grid.contains(xm) {
                    return Err(Error::OutOfDomain { point: x, time: t });
                }
                stencil.push((field_fn(xp, t), field_fn(xm, t)));
            }
            let (fp_t, fm_t) = (field_fn(x, t + dt), field_fn(x, t - dt));
            let inside = stencil.iter().all(|(p, q)| *p > 0.0 && *q > 0.0) && fp_t > 0.0 && fm_t > 0.0;
            if !inside {
                layer += 1;
                continue;
            }
            let f_t = (fp_t - fm_t) / (2.0 * dt);
            let mut lap = 0.0;
            let mut grad2 = 0.0;
            for (p, q) in &stencil {
                lap += (p - 2.0 * f0 + q) / (h * h);
                grad2 += ((p - q) / (2.0 * h)).powi(2);
            }
            let r = f_t - (op.m - 1.0) * f0 * lap - grad2 + op.c1 * op.a * (grad2.sqrt() + op.a * f0);
            max_r = max_r.max(r);
            max_abs = max_abs.max(r.abs());
            evaluated += 1;
            *slot = Some(r);
        }
        values.push(slice);
    }
    Ok(ResidualReport {
        times: times.to_vec(),
        values,
        max_residual: max_r,
        max_abs_residual: max_abs,
        boundary_layer: layer,
        evaluated,
    })
}

/// One row of a residual refinement study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub dt: f64,
    /// `max |R|` for the exact (undrained) profile with no drift remainder.
    pub exact_error: f64,
    /// `tol(h, dt) = A (h + dt)`.
    pub tol: f64,
    /// `max R` for the drained barrier with the drift remainder.
    pub barrier_max: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierCertificate {
    pub m: f64,
    pub dim: usize,
    pub a: f64,
    pub c1: f64,
    pub lambda: f64,
    pub c: f64,
    pub t_max: f64,
    /// Calibration constant `A` of `tol(h, dt) = A (h + dt)`.
    pub calibration: f64,
    pub rows: Vec<RefinementRow>,
    /// Least-squares order of `exact_error` versus `h + dt`.
    pub order: f64,
    pub gradient: GradientBoundReport,
    pub pass: bool,
}

/// Safety factor on the exact-profile residual when calibrating the tolerance.
pub const TOL_SAFETY: f64 = 10.0;

/// Certifies the drained barrier as a subsolution of the pressure operator with drift
/// remainder over `levels` refinements, calibrating the tolerance on the exact profile.
pub fn certify_barrier(m: f64, dim: usize, a: f64, c1: f64, levels: usize) -> Result<BarrierCertificate> {
    if levels < 2 {
        return Err(Error::InvalidParameter("need at least two refinement levels".into()));
    }
    let lambda = lambda_exponent(m, dim);
    let c = a.powf(lambda / 2.0);
    let base = BarenblattParams::new(c, lambda, [0.0, 0.0])?;
    let bp = BarrierParams::new(base, c1, a)?;
    let t_max = 1.0 / a - 0.5;
    let reach = base.support_radius(t_max) * 1.1 + 0.1;

    let exact = |x: Point, t: f64| barenblatt_pressure(&base, x, t);
    let barrier = |x: Point, t: f64| barrier_eval(&bp, x, t);
    let free = PressureOperator { m, c1: 0.0, a };
    let drifted = PressureOperator { m, c1, a };

    let base_cells = if dim == 1 { 32 } else { 16 };
    let mut raw = Vec::new();
    for level in 0..levels {
        let cells = base_cells << level;
        let grid = Grid::new(dim, -reach, reach, cells)?;
        let h = grid.spacing();
        let dt = h;
        let n_times = 8;
        let times: Vec<f64> = (1..=n_times).map(|k| (t_max * k as f64 / n_times as f64 - dt).max(dt)).collect();
        let delta_exact = 1e-3 * base.peak(t_max);
        let e = residual_pressure_operator(&exact, free, &grid, &times, dt, delta_exact)?;
        let delta_barrier = 1e-3 * base.peak(0.0);
        let b = residual_pressure_operator(&barrier, drifted, &grid, &times, dt, delta_barrier)?;
        raw.push((h, dt, e.max_abs_residual, b.max_residual));
    }
    // Calibrate on the coarsest level; tolerance scales linearly with h + dt.
    let (h0, dt0, e0, _) = raw[0];
    let calibration = (TOL_SAFETY * e0 / (h0 + dt0)).max(1e-12);
    let rows: Vec<RefinementRow> = raw
        .iter()
        .map(|&(h, dt, exact_error, barrier_max)| {
            let tol = calibration * (h + dt);
            RefinementRow { h, dt, exact_error, tol, barrier_max, pass: barrier_max <= tol }
        })
        .collect();
    let order = fitted_order(
        &rows.iter().map(|r| r.h + r.dt).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.exact_error.max(1e-300)).collect::<Vec<_>>(),
    );
    let gradient = gradient_bound_check(&base, a, 1.0 / a, &Grid::new(dim, -reach, reach, 256.min(base_cells << (levels - 1)))?, 64);
    let pass = rows.iter().all(|r| r.pass) && order >= 0.8 && gradient.pass;
    Ok(BarrierCertificate { m, dim, a, c1, lambda, c, t_max, calibration, rows, order, gradient, pass })
}

/// Least-squares slope of `log err` against `log scale`.
pub fn fitted_order(scale: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = scale.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
