use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldKind, ScalarField};
use crate::grid::Grid;
use crate::measure::mass;
use crate::potential::PotentialSpec;
use crate::transforms::density_value;

/// Mass-matched stationary profile `u_inf = (Cbar - Phi)_+`.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumProfile {
    #[serde(skip)]
    pub pressure: ScalarField,
    pub cbar: f64,
    pub mass_target: f64,
}

impl EquilibriumProfile {
    pub fn density(&self, m: f64) -> Result<ScalarField> {
        crate::transforms::density_of_pressure(&self.pressure, m)
    }
}

fn profile_mass(phi: &[f64], cbar: f64, m: f64, vol: f64) -> f64 {
    phi.iter().map(|p| density_value((cbar - p).max(0.0), m)).sum::<f64>() * vol
}

/// Bisection on `Cbar` between `min Phi` and `max Phi` on the box.
pub fn compute_equilibrium(potential: &PotentialSpec, mass_target: f64, grid: &Grid, m: f64) -> Result<EquilibriumProfile> {
    if !(mass_target > 0.0 && mass_target.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass target must be positive, got {mass_target}")));
    }
    if !(m > 1.0) {
        return Err(Error::InvalidParameter(format!("exponent m must exceed 1, got {m}")));
    }
    let phi: Vec<f64> = grid.centers().map(|p| potential.value(p)).collect();
    let vol = grid.cell_volume();
    let mut lo = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = profile_mass(&phi, hi, m, vol);
    if top < mass_target {
        return Err(Error::Bracket(format!(
            "mass {mass_target} unreachable on the box: largest admissible level gives {top}"
        )));
    }
    let mut cbar = hi;
    for _ in 0..300 {
        cbar = 0.5 * (lo + hi);
        let mm = profile_mass(&phi, cbar, m, vol);
        if (mm - mass_target).abs() <= 1e-12 * mass_target || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        if mm < mass_target {
            lo = cbar;
        } else {
            hi = cbar;
        }
    }
    let pressure = ScalarField::new(
        *grid,
        phi.iter().map(|p| (cbar - p).max(0.0)).collect(),
        FieldKind::Pressure,
        0.0,
    )?;
    let profile = EquilibriumProfile { pressure, cbar, mass_target };
    let got = mass(&profile.density(m)?);
    if (got - mass_target).abs() > 1e-8 * mass_target {
        return Err(Error::Bracket(format!("bisection stalled at mass {got}, target {mass_target}")));
    }
    Ok(profile)
}
