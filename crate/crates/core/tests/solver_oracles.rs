mod common;

use common::{barenblatt_error, max_order_violation, random_ordered_pair};
use pmelab::measure::mass;
use pmelab::solver::{solve, solve_lockstep, SolverConfig, SourceTerm};
use pmelab::{FieldKind, Grid, PotentialSpec, RegionBall, ScalarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn barenblatt_error_halves_with_h() {
    let errs: Vec<f64> = [200, 400, 800].iter().map(|n| barenblatt_error(2.0, *n)).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 1.7, "{errs:?}");
    }
}

#[test]
fn drift_run_conserves_mass_in_2d() {
    let g = Grid::new(2, -3.0, 3.0, 48).unwrap();
    let rho = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (1.0 - p[0] * p[0] - 0.5 * p[1] * p[1]).max(0.0)).unwrap();
    let traj = solve(&rho, &SolverConfig::new(1.5, 0.5).with_uniform_snapshots(5), Some(&PotentialSpec::quadratic(2)), None)
        .unwrap();
    let m0 = mass(&rho);
    for s in &traj.snapshots {
        assert!((mass(s) - m0).abs() <= 1e-12 * m0);
        assert!(s.min() >= 0.0);
    }
}

#[test]
fn ordered_data_stay_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let drift = PotentialSpec::quadratic(1);
    let g = Grid::new(1, -4.0, 4.0, 160).unwrap();
    let sink = SourceTerm::new(RegionBall::new([0.0, 0.0], 2.0).unwrap(), -0.05).unwrap();
    for signed in [false, true] {
        for _ in 0..5 {
            let (lo, hi) = random_ordered_pair(&mut rng, &g, signed);
            let cfg = SolverConfig::new(if signed { 1.7 } else { 2.0 }, 0.2).with_uniform_snapshots(4);
            let src = if signed { vec![Some(&sink)] } else { vec![] };
            let runs = solve_lockstep(&[lo, hi], &cfg, Some(&drift), &src).unwrap();
            assert!(max_order_violation(&runs[0], &runs[1]) <= 1e-12);
        }
    }
}
