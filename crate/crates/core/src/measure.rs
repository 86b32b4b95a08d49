//! Integrals, ball averages, supports and set distances on grid fields.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{distance, Grid, RegionBall};

/// Relative support threshold applied to `max |f|` when none is given.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-8;

/// Midpoint-rule integral `h^d * sum(values)`.
pub fn mass(f: &ScalarField) -> f64 {
    f.values().iter().sum::<f64>() * f.grid().cell_volume()
}

/// `radius^-d` times the integral of `f` over cells whose center lies in `ball`.
pub fn ball_average(f: &ScalarField, ball: &RegionBall) -> Result<f64> {
    let grid = f.grid();
    let mut sum = 0.0;
    let mut hit = false;
    for (idx, v) in f.values().iter().enumerate() {
        if ball.contains(grid.center(idx)) {
            sum += v;
            hit = true;
        }
    }
    if !hit {
        return Err(Error::UnderResolvedBall { center: ball.center, radius: ball.radius });
    }
    Ok(sum * grid.cell_volume() / ball.radius.powi(grid.dim() as i32))
}

/// Set of grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMask {
    grid: Grid,
    members: Vec<bool>,
}

impl CellMask {
    pub fn new(grid: Grid, members: Vec<bool>) -> Self {
        assert_eq!(members.len(), grid.len());
        Self { grid, members }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize) -> bool) -> Self {
        Self { grid, members: (0..grid.len()).map(f).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|m| *m)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i)
    }

    pub fn is_subset_of(&self, other: &CellMask) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| !a || *b)
    }

    pub fn difference(&self, other: &CellMask) -> CellMask {
        CellMask::from_fn(self.grid, |i| self.members[i] && !other.members[i])
    }

    /// Whether every member cell center lies in `ball`.
    pub fn is_contained_in(&self, ball: &RegionBall) -> bool {
        self.indices().all(|i| ball.contains(self.grid.center(i)))
    }

    /// Largest distance by which a member cell center lies outside `ball` (0 if contained).
    pub fn excess_outside(&self, ball: &RegionBall) -> f64 {
        self.indices()
            .map(|i| (distance(self.grid.center(i), ball.center) - ball.radius).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Members with a face neighbor outside the mask; box-edge cells count as such.
    pub fn boundary_cells(&self) -> CellMask {
        CellMask::from_fn(self.grid, |i| {
            self.members[i]
                && (self.grid.is_edge_cell(i) || self.grid.neighbors(i).any(|j| !self.members[j]))
        })
    }

    /// Member cells whose centers are within `radius` of some member of `self`.
    pub fn dilate(&self, radius: f64) -> CellMask {
        let idx: Vec<usize> = self.indices().collect();
        CellMask::from_fn(self.grid, |i| {
            let c = self.grid.center(i);
            idx.iter().any(|&j| distance(c, self.grid.center(j)) <= radius)
        })
    }

    /// CSV listing the coordinates of member cells.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.grid.dim() == 1 { "x\n" } else { "x,y\n" });
        for i in self.indices() {
            let c = self.grid.center(i);
            match self.grid.dim() {
                1 => writeln!(out, "{}", c[0]).unwrap(),
                _ => writeln!(out, "{},{}", c[0], c[1]).unwrap(),
            }
        }
        out
    }
}

/// Cells where `f > threshold`.
pub fn support(f: &ScalarField, threshold: f64) -> CellMask {
    CellMask::from_fn(*f.grid(), |i| f.values()[i] > threshold)
}

/// Support with the default relative threshold `1e-8 * max |f|`.
pub fn default_support(f: &ScalarField) -> CellMask {
    support(f, DEFAULT_SUPPORT_THRESHOLD * f.max_abs())
}

/// `sup_{a in A} dist(a, B)` over cell centers; `+inf` when `B` is empty and 0 when `A` is.
pub fn one_sided_distance(a: &CellMask, b: &CellMask) -> f64 {
    let grid = a.grid;
    let targets: Vec<[f64; 2]> = b.indices().map(|j| grid.center(j)).collect();
    if a.is_empty() {
        return 0.0;
    }
    if targets.is_empty() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for i in a.indices() {
        let c = grid.center(i);
        let mut best = f64::INFINITY;
        for t in &targets {
            let d = distance(c, *t);
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between two cell sets.
pub fn hausdorff(a: &CellMask, b: &CellMask) -> f64 {
    one_sided_distance(a, b).max(one_sided_distance(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldKind;
    use proptest::prelude::*;

    fn grid1() -> Grid {
        Grid::new(1, -2.0, 2.0, 400).unwrap()
    }

    #[test]
    fn mass_of_constants_and_zero() {
        let g = grid1();
        assert_eq!(mass(&ScalarField::zeros(g, FieldKind::Density, 0.0)), 0.0);
        let one = ScalarField::from_fn(g, FieldKind::Density, 0.0, |_| 1.0).unwrap();
        assert!((mass(&one) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn mass_of_equilibrium_profile() {
        let g = grid1();
        let f = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| (0.5 - p[0] * p[0] / 2.0).max(0.0) / 2.0)
            .unwrap();
        let h = g.spacing();
        assert!((mass(&f) - 1.0 / 3.0).abs() < 2.0 * h * h);
    }

    #[test]
    fn ball_average_examples() {
        let g = grid1();
        let ball = RegionBall::new([0.1, 0.0], 0.5).unwrap();
        let c = ScalarField::from_fn(g, FieldKind::Density, 0.0, |_| 3.0).unwrap();
        let inside = (0..g.len()).filter(|i| ball.contains(g.center(*i))).count() as f64;
        let expect = 3.0 * inside * g.spacing() / 0.5;
        assert!((ball_average(&c, &ball).unwrap() - expect).abs() < 1e-12);
        let chi = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| ball.contains(p) as u8 as f64).unwrap();
        assert!((ball_average(&chi, &ball).unwrap() - 2.0).abs() < 2.0 * g.spacing() / 0.5);
        let z = ScalarField::zeros(g, FieldKind::Density, 0.0);
        assert_eq!(ball_average(&z, &ball).unwrap(), 0.0);
        let tiny = RegionBall::new([0.0, 0.0], 1e-6).unwrap();
        assert!(matches!(ball_average(&z, &tiny), Err(Error::UnderResolvedBall { .. })));
    }

    #[test]
    fn ball_average_of_disk_indicator_2d() {
        let g = Grid::new(2, -2.0, 2.0, 200).unwrap();
        let ball = RegionBall::new([0.0, 0.0], 1.0).unwrap();
        let chi = ScalarField::from_fn(g, FieldKind::Density, 0.0, |p| ball.contains(p) as u8 as f64).unwrap();
        let v = ball_average(&chi, &ball).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 10.0 * g.spacing());
    }

    #[test]
    fn support_examples() {
        let g = grid1();
        assert!(support(&ScalarField::zeros(g, FieldKind::Density, 0.0), 0.0).is_empty());
        let pos = ScalarField::from_fn(g, FieldKind::Density, 0.0, |_| 1.0).unwrap();
        let full = support(&pos, 0.0);
        assert_eq!(full.count(), g.len());
        let b: Vec<usize> = full.boundary_cells().indices().collect();
        assert_eq!(b, vec![0, g.len() - 1]);
    }

    #[test]
    fn support_of_barenblatt_pressure() {
        let g = Grid::new(1, -4.0, 4.0, 800).unwrap();
        let (c, lambda) = (1.0f64, 0.4f64);
        let u = ScalarField::from_fn(g, FieldKind::Pressure, 0.0, |p| (c - lambda / 2.0 * p[0] * p[0]).max(0.0))
            .unwrap();
        let mask = support(&u, 0.0);
        let r = (2.0 * c / lambda).sqrt();
        for i in 0..g.len() {
            let x = g.center(i)[0].abs();
            if x < r - g.spacing() {
                assert!(mask.contains(i));
            }
            if x > r + g.spacing() {
                assert!(!mask.contains(i));
            }
        }
    }

    #[test]
    fn distance_examples() {
        let g = Grid::new(1, -1.0, 3.0, 400).unwrap();
        let h = g.spacing();
        let in_range = |lo: f64, hi: f64| CellMask::from_fn(g, move |i| (lo..=hi).contains(&g.center(i)[0]));
        let a01 = in_range(0.0, 1.0);
        let a02 = in_range(0.0, 2.0);
        assert_eq!(one_sided_distance(&a01, &a01), 0.0);
        assert!(one_sided_distance(&a01, &a02) <= h);
        assert!((one_sided_distance(&a02, &a01) - 1.0).abs() <= h);
        let empty = CellMask::from_fn(g, |_| false);
        assert!(one_sided_distance(&a01, &empty).is_infinite());
    }

    #[test]
    fn one_sided_distance_matches_brute_force() {
        let g = Grid::new(2, 0.0, 1.0, 12).unwrap();
        let a = CellMask::from_fn(g, |i| i % 7 == 0);
        let b = CellMask::from_fn(g, |i| i % 5 == 1);
        let brute = a
            .indices()
            .map(|i| b.indices().map(|j| distance(g.center(i), g.center(j))).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert_eq!(one_sided_distance(&a, &b), brute);
    }

    fn random_mask(g: Grid, bits: &[bool]) -> CellMask {
        let mut m: Vec<bool> = bits.to_vec();
        m.resize(g.len(), false);
        if !m.iter().any(|b| *b) {
            m[0] = true;
        }
        CellMask::new(g, m)
    }

    proptest! {
        #[test]
        fn mass_is_linear(vals in proptest::collection::vec(-5.0f64..5.0, 64), other in proptest::collection::vec(-5.0f64..5.0, 64), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let g = Grid::new(2, -1.0, 1.0, 8).unwrap();
            let f = ScalarField::new(g, vals, FieldKind::Signed, 0.0).unwrap();
            let h = ScalarField::new(g, other, FieldKind::Signed, 0.0).unwrap();
            let lhs = mass(&f.combine(alpha, &h, beta).unwrap());
            let rhs = alpha * mass(&f) + beta * mass(&h);
            let scale = (alpha.abs() * f.max_abs() + beta.abs() * h.max_abs()) * 4.0 + 1.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn support_is_monotone_in_threshold(vals in proptest::collection::vec(0.0f64..1.0, 16), t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let g = Grid::new(1, 0.0, 1.0, 16).unwrap();
            let f = ScalarField::new(g, vals, FieldKind::Density, 0.0).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            prop_assert!(support(&f, hi).is_subset_of(&support(&f, lo)));
        }

        #[test]
        fn zero_distance_iff_contained_in_dilation(a in proptest::collection::vec(any::<bool>(), 100), b in proptest::collection::vec(any::<bool>(), 100)) {
            let g = Grid::new(2, 0.0, 1.0, 10).unwrap();
            let (a, b) = (random_mask(g, &a), random_mask(g, &b));
            let h = g.spacing();
            let d = one_sided_distance(&a, &b);
            prop_assert_eq!(d == 0.0, a.is_subset_of(&b));
            prop_assert_eq!(d <= h + 1e-12, a.is_subset_of(&b.dilate(h + 1e-12)));
        }

        #[test]
        fn hausdorff_triangle_inequality(a in proptest::collection::vec(any::<bool>(), 100), b in proptest::collection::vec(any::<bool>(), 100), c in proptest::collection::vec(any::<bool>(), 100)) {
            let g = Grid::new(2, 0.0, 1.0, 10).unwrap();
            let (a, b, c) = (random_mask(g, &a), random_mask(g, &b), random_mask(g, &c));
            let h = g.spacing();
            prop_assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
            prop_assert!(hausdorff(&a, &c) <= hausdorff(&a, &b) + hausdorff(&b, &c) + 2.0 * h);
        }
    }
}
