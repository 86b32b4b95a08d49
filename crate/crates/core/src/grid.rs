//! Uniform box grids in one or two dimensions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane. One-dimensional grids keep the second coordinate at zero.
pub type Point = [f64; 2];

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Cell-centered uniform grid on the box `[lower, upper]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    lower: f64,
    upper: f64,
    cells: usize,
}

impl Grid {
    pub fn new(dim: usize, lower: f64, upper: f64, cells: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if cells < 8 {
            return Err(Error::InvalidGrid(format!("need at least 8 cells per axis, got {cells}")));
        }
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::InvalidGrid(format!("empty box [{lower}, {upper}]")));
        }
        Ok(Self { dim, lower, upper, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis cell indices of a flat index (x fastest).
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx % self.cells, idx / self.cells],
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        match self.dim {
            1 => ij[0],
            _ => ij[0] + ij[1] * self.cells,
        }
    }

    pub fn axis_center(&self, i: usize) -> f64 {
        self.lower + (i as f64 + 0.5) * self.spacing()
    }

    pub fn center(&self, idx: usize) -> Point {
        let ij = self.unflatten(idx);
        match self.dim {
            1 => [self.axis_center(ij[0]), 0.0],
            _ => [self.axis_center(ij[0]), self.axis_center(ij[1])],
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |i| self.center(i))
    }

    /// Face-adjacent neighbors of a cell.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let ij = self.unflatten(idx);
        let n = self.cells;
        let mut out = [usize::MAX; 4];
        let mut k = 0;
        for axis in 0..self.dim {
            if ij[axis] > 0 {
                let mut nb = ij;
                nb[axis] -= 1;
                out[k] = self.flatten(nb);
                k += 1;
            }
            if ij[axis] + 1 < n {
                let mut nb = ij;
                nb[axis] += 1;
                out[k] = self.flatten(nb);
                k += 1;
            }
        }
        out.into_iter().take(k)
    }

    /// Whether the cell touches the outer boundary of the box.
    pub fn is_edge_cell(&self, idx: usize) -> bool {
        let ij = self.unflatten(idx);
        (0..self.dim).any(|a| ij[a] == 0 || ij[a] + 1 == self.cells)
    }

    /// Distance from the cell center to the nearest box face.
    pub fn distance_to_edge(&self, idx: usize) -> f64 {
        let c = self.center(idx);
        (0..self.dim)
            .map(|a| (c[a] - self.lower).min(self.upper - c[a]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..self.dim).all(|a| p[a] >= self.lower && p[a] <= self.upper)
    }

    /// Interior faces as `(left, right, axis)` with `right` the upper neighbor of `left`.
    pub fn faces(&self) -> Vec<(usize, usize, usize)> {
        let n = self.cells;
        let mut faces = Vec::with_capacity(self.dim * self.len());
        for idx in 0..self.len() {
            let ij = self.unflatten(idx);
            for axis in 0..self.dim {
                if ij[axis] + 1 < n {
                    let mut nb = ij;
                    nb[axis] += 1;
                    faces.push((idx, self.flatten(nb), axis));
                }
            }
        }
        faces
    }

    /// Midpoint of the face between `left` and its upper neighbor along `axis`.
    pub fn face_midpoint(&self, left: usize, axis: usize) -> Point {
        let mut p = self.center(left);
        p[axis] += 0.5 * self.spacing();
        p
    }
}

/// Closed ball `{x : |x - center| <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBall {
    pub center: Point,
    pub radius: f64,
}

impl RegionBall {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: Point) -> bool {
        distance(p, self.center) <= self.radius
    }

    /// Volume of the ball in dimension `dim`.
    pub fn volume(&self, dim: usize) -> f64 {
        match dim {
            1 => 2.0 * self.radius,
            _ => std::f64::consts::PI * self.radius * self.radius,
        }
    }

    /// Exact volume of the intersection of the ball with cell `idx`.
    pub fn overlap_volume(&self, grid: &Grid, idx: usize) -> f64 {
        let h = grid.spacing();
        let c = grid.center(idx);
        match grid.dim() {
            1 => {
                let lo = (c[0] - 0.5 * h).max(self.center[0] - self.radius);
                let hi = (c[0] + 0.5 * h).min(self.center[0] + self.radius);
                (hi - lo).max(0.0)
            }
            _ => disk_rect_area(
                self.center,
                self.radius,
                [c[0] - 0.5 * h, c[0] + 0.5 * h],
                [c[1] - 0.5 * h, c[1] + 0.5 * h],
            ),
        }
    }
}

/// Area of the intersection of a disk with an axis-aligned rectangle.
///
/// Integrates the vertical chord length in closed form on each sub-interval where
/// the clipping pattern is fixed.
fn disk_rect_area(center: Point, r: f64, xs: [f64; 2], ys: [f64; 2]) -> f64 {
    let x0 = xs[0].max(center[0] - r);
    let x1 = xs[1].min(center[0] + r);
    if x1 <= x0 {
        return 0.0;
    }
    let y_lo = ys[0] - center[1];
    let y_hi = ys[1] - center[1];
    // Breakpoints where the half-chord crosses the rectangle's horizontal edges.
    let mut cuts = vec![x0, x1];
    for y in [y_lo, y_hi] {
        if y.abs() < r {
            let s = (r * r - y * y).sqrt();
            for x in [center[0] - s, center[0] + s] {
                if x > x0 && x < x1 {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let half_chord = |x: f64| (r * r - (x - center[0]).powi(2)).max(0.0).sqrt();
    // Antiderivative of the half-chord in the local coordinate u = x - cx.
    let prim = |x: f64| {
        let u = (x - center[0]).clamp(-r, r);
        0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
    };

    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let s = half_chord(0.5 * (a + b));
        let top_is_chord = s < y_hi;
        let bottom_is_chord = -s > y_lo;
        let top = if top_is_chord { s } else { y_hi };
        let bottom = if bottom_is_chord { -s } else { y_lo };
        if top <= bottom {
            continue;
        }
        let chord_integral = prim(b) - prim(a);
        let mut piece = 0.0;
        piece += if top_is_chord { chord_integral } else { y_hi * (b - a) };
        piece -= if bottom_is_chord { -chord_integral } else { y_lo * (b - a) };
        area += piece;
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 0.0, 1.0, 16).is_err());
        assert!(Grid::new(1, 0.0, 1.0, 4).is_err());
        assert!(Grid::new(1, 1.0, 1.0, 16).is_err());
    }

    #[test]
    fn flatten_roundtrip_and_neighbors() {
        let g = Grid::new(2, -1.0, 1.0, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flatten(g.unflatten(idx)), idx);
        }
        assert_eq!(g.neighbors(0).count(), 2);
        assert_eq!(g.neighbors(g.flatten([3, 3])).count(), 4);
        assert_eq!(g.faces().len(), 2 * 7 * 8);
    }

    #[test]
    fn disk_overlap_sums_to_disk_area() {
        let g = Grid::new(2, -4.0, 4.0, 64).unwrap();
        let ball = RegionBall::new([0.13, -0.4], 2.0).unwrap();
        let total: f64 = (0..g.len()).map(|i| ball.overlap_volume(&g, i)).sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn disk_overlap_of_inner_and_outer_cells() {
        let g = Grid::new(2, -4.0, 4.0, 16).unwrap();
        let ball = RegionBall::new([0.0, 0.0], 2.0).unwrap();
        let inner = g.flatten([8, 8]);
        assert!((ball.overlap_volume(&g, inner) - g.cell_volume()).abs() < 1e-14);
        assert_eq!(ball.overlap_volume(&g, 0), 0.0);
    }

    #[test]
    fn interval_overlap_1d() {
        let g = Grid::new(1, -4.0, 4.0, 80).unwrap();
        let ball = RegionBall::new([0.05, 0.0], 2.0).unwrap();
        let total: f64 = (0..g.len()).map(|i| ball.overlap_volume(&g, i)).sum();
        assert!((total - 4.0).abs() < 1e-13);
    }
}
