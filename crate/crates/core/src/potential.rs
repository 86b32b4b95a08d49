//! Closed-form drift potentials.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, Point, RegionBall};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PotentialForm {
    /// `|x|^2 / 2`
    Quadratic,
    /// `b |x|^2 / 2`
    ScaledQuadratic { b: f64 },
    /// `sum_i (1 - cos x_i)`
    CosineWell,
    /// Separable polynomial `sum_i sum_k c_k x_i^k`.
    Polynomial { coefficients: Vec<f64> },
}

/// Potential `Phi(x) = sum_i g(s (x_i - x0_i))` for a separable profile `g` given by `form`,
/// argument scale `s` and shift `x0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub form: PotentialForm,
    pub dim: usize,
    #[serde(default = "unit_scale")]
    pub arg_scale: f64,
    #[serde(default)]
    pub arg_shift: Point,
}

fn unit_scale() -> f64 {
    1.0
}

fn poly(coef: &[f64], x: f64, deriv: usize) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coef.iter().enumerate().skip(deriv) {
        let mut falling = 1.0;
        for j in 0..deriv {
            falling *= (k - j) as f64;
        }
        acc += c * falling * x.powi((k - deriv) as i32);
    }
    acc
}

fn half_square(x: f64, deriv: usize) -> f64 {
    match deriv {
        0 => 0.5 * x * x,
        1 => x,
        2 => 1.0,
        _ => 0.0,
    }
}

impl PotentialSpec {
    pub fn new(form: PotentialForm, dim: usize) -> Self {
        Self { form, dim, arg_scale: 1.0, arg_shift: [0.0, 0.0] }
    }

    /// `x -> Phi(s (x - x0))`, composed with any existing argument map.
    pub fn rescaled(&self, s: f64, x0: Point) -> Self {
        // Phi(s1 (s (x - x0) - x1)) = Phi(s1 s (x - (x0 + x1 / s)))
        let shift = [x0[0] + self.arg_shift[0] / s, x0[1] + self.arg_shift[1] / s];
        Self { form: self.form.clone(), dim: self.dim, arg_scale: self.arg_scale * s, arg_shift: shift }
    }

    pub fn quadratic(dim: usize) -> Self {
        Self::new(PotentialForm::Quadratic, dim)
    }

    /// Per-axis one-dimensional profile and its derivatives (all forms are separable).
    fn axis(&self, a: usize, x: f64, deriv: usize) -> f64 {
        let s = self.arg_scale;
        s.powi(deriv as i32) * self.profile(s * (x - self.arg_shift[a]), deriv)
    }

    fn profile(&self, x: f64, deriv: usize) -> f64 {
        match &self.form {
            PotentialForm::Quadratic => half_square(x, deriv),
            PotentialForm::ScaledQuadratic { b } => b * half_square(x, deriv),
            PotentialForm::CosineWell => match deriv {
                0 => 1.0 - x.cos(),
                d => match d % 4 {
                    1 => x.sin(),
                    2 => x.cos(),
                    3 => -x.sin(),
                    _ => -x.cos(),
                },
            },
            PotentialForm::Polynomial { coefficients } => poly(coefficients, x, deriv),
        }
    }

    pub fn value(&self, p: Point) -> f64 {
        (0..self.dim).map(|a| self.axis(a, p[a], 0)).sum()
    }

    pub fn gradient(&self, p: Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (a, ga) in g.iter_mut().enumerate().take(self.dim) {
            *ga = self.axis(a, p[a], 1);
        }
        g
    }

    pub fn laplacian(&self, p: Point) -> f64 {
        (0..self.dim).map(|a| self.axis(a, p[a], 2)).sum()
    }

    /// Hessian; diagonal because every form is separable.
    pub fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for a in 0..self.dim {
            h[a][a] = self.axis(a, p[a], 2);
        }
        h
    }

    /// Largest per-axis third and fourth derivative magnitudes over `region`,
    /// used to size finite-difference consistency tolerances.
    pub fn higher_derivative_bound(&self, region: &RegionBall) -> f64 {
        self.sample_ball(region)
            .map(|p| {
                (0..self.dim)
                    .map(|a| self.axis(a, p[a], 3).abs().max(self.axis(a, p[a], 4).abs()))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    fn pointwise_c2(&self, p: Point) -> f64 {
        let g = self.gradient(p);
        let hess = self.hessian(p);
        let hnorm = (0..self.dim).map(|a| hess[a][a].abs()).fold(0.0, f64::max);
        self.value(p).abs() + g[0].hypot(g[1]) + hnorm
    }

    fn sample_ball(&self, region: &RegionBall) -> impl Iterator<Item = Point> + '_ {
        const N: usize = 201;
        let c = region.center;
        let r = region.radius;
        let dim = self.dim;
        let ys = if dim == 1 { 1 } else { N };
        let region = *region;
        (0..ys)
            .flat_map(move |j| (0..N).map(move |i| (i, j)))
            .map(move |(i, j)| {
                let s = |k: usize| -1.0 + 2.0 * k as f64 / (N - 1) as f64;
                if dim == 1 {
                    [c[0] + r * s(i), 0.0]
                } else {
                    [c[0] + r * s(i), c[1] + r * s(j)]
                }
            })
            .filter(move |p| region.contains(*p) || dim == 1)
    }

    /// `sup_{region} |Phi| + |grad Phi| + |D^2 Phi|` (spectral norm of the Hessian).
    pub fn c2_norm_bound(&self, region: &RegionBall) -> f64 {
        match &self.form {
            PotentialForm::Quadratic | PotentialForm::ScaledQuadratic { .. } => {
                let b = match self.form {
                    PotentialForm::ScaledQuadratic { b } => b.abs(),
                    _ => 1.0,
                } * self.arg_scale * self.arg_scale;
                let centre = [region.center[0] - self.arg_shift[0], region.center[1] - self.arg_shift[1]];
                let reach = centre[0].hypot(centre[1]) + region.radius;
                b * (0.5 * reach * reach + reach + 1.0)
            }
            _ => self.sample_ball(region).map(|p| self.pointwise_c2(p)).fold(0.0, f64::max),
        }
    }

    pub fn min_on(&self, grid: &Grid) -> f64 {
        grid.centers().map(|p| self.value(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_on(&self, grid: &Grid) -> f64 {
        grid.centers().map(|p| self.value(p)).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn consistency(pot: &PotentialSpec, grid: &Grid) {
        let h = grid.spacing();
        let region = RegionBall::new([0.0, 0.0], grid.upper().abs().max(grid.lower().abs()) * 1.5).unwrap();
        let bound = pot.higher_derivative_bound(&region);
        for p in grid.centers() {
            let g = pot.gradient(p);
            let mut lap = 0.0;
            for a in 0..pot.dim {
                let mut pp = p;
                let mut pm = p;
                pp[a] += h;
                pm[a] -= h;
                let fd = (pot.value(pp) - pot.value(pm)) / (2.0 * h);
                assert!((fd - g[a]).abs() <= 10.0 * h * h * bound + 1e-10, "gradient mismatch at {p:?}");
                lap += (pot.value(pp) - 2.0 * pot.value(p) + pot.value(pm)) / (h * h);
            }
            assert!((lap - pot.laplacian(p)).abs() <= 10.0 * h * h * bound + 1e-7, "laplacian mismatch at {p:?}");
        }
    }

    #[test]
    fn evaluators_are_consistent() {
        let g1 = Grid::new(1, -2.0, 2.0, 64).unwrap();
        let g2 = Grid::new(2, -2.0, 2.0, 32).unwrap();
        for form in [
            PotentialForm::Quadratic,
            PotentialForm::ScaledQuadratic { b: 2.5 },
            PotentialForm::CosineWell,
            PotentialForm::Polynomial { coefficients: vec![0.0, 0.1, 0.5, 0.0, 0.05] },
        ] {
            consistency(&PotentialSpec::new(form.clone(), 1), &g1);
            consistency(&PotentialSpec::new(form, 2), &g2);
        }
    }

    #[test]
    fn rescaled_quadratic_matches_scaled_form() {
        let a = 0.3;
        let r = PotentialSpec::quadratic(2).rescaled(a, [0.5, -0.2]);
        let direct = PotentialSpec::new(PotentialForm::ScaledQuadratic { b: a * a }, 2);
        for p in [[0.1, 0.2], [1.5, -0.7]] {
            let q = [p[0] - 0.5, p[1] + 0.2];
            assert!((r.value(p) - direct.value(q)).abs() < 1e-14);
            assert!((r.gradient(p)[1] - direct.gradient(q)[1]).abs() < 1e-14);
            assert!((r.laplacian(p) - direct.laplacian(q)).abs() < 1e-14);
        }
        let twice = PotentialSpec::quadratic(1).rescaled(2.0, [1.0, 0.0]).rescaled(0.5, [3.0, 0.0]);
        // Phi(2 (0.5 (x - 3) - 1)) = Phi(x - 5)
        assert!((twice.value([5.5, 0.0]) - 0.125).abs() < 1e-14);
        let ball = RegionBall::new([1.0, 0.0], 1.0).unwrap();
        let sampled = twice.sample_ball(&ball).map(|p| twice.pointwise_c2(p)).fold(0.0, f64::max);
        assert!((twice.c2_norm_bound(&ball) - sampled).abs() < 1e-9);
    }

    #[test]
    fn quadratic_c2_norm_on_unit_ball() {
        let pot = PotentialSpec::quadratic(1);
        let b = RegionBall::new([0.0, 0.0], 1.0).unwrap();
        assert!((pot.c2_norm_bound(&b) - 2.5).abs() < 1e-15);
        // Sampling agrees with the closed form.
        let sampled = pot.sample_ball(&b).map(|p| pot.pointwise_c2(p)).fold(0.0, f64::max);
        assert!((sampled - 2.5).abs() < 1e-12);
    }
}
