use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::RegionBall;

/// Radii `r_max / 2^j` down to two cell widths.
pub fn dyadic_radii(h: f64, r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= 2.0 * h {
        out.push(r);
        r /= 2.0;
    }
    out.reverse();
    out
}

/// Empirical Hoelder exponent of `f` on `region`: slope of `ln osc(r)` against
/// `ln r`, where `osc(r)` is the largest increment between cells of the region
/// at distance at most `r`. Clamped to `(0, 1]`.
pub fn estimate_holder(f: &ScalarField, region: &RegionBall, radii: &[f64]) -> Result<f64> {
    let grid = f.grid();
    let h = grid.spacing();
    let n = grid.cells_per_axis() as i64;
    let dim = grid.dim();
    let vals = f.values();
    let cells: Vec<usize> = (0..grid.len()).filter(|&i| region.contains(grid.center(i))).collect();
    if cells.is_empty() {
        return Err(Error::Precondition("no cell center inside the region".into()));
    }
    let (lo, hi) = cells
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(vals[i]), hi.max(vals[i])));
    if hi - lo <= 0.0 {
        return Err(Error::Precondition("field is constant on the region".into()));
    }
    let inside: Vec<bool> = (0..grid.len()).map(|i| region.contains(grid.center(i))).collect();

    let mut pts = Vec::new();
    for &r in radii {
        if !(r >= h) {
            continue;
        }
        let reach = (r / h + 1e-9).floor() as i64;
        let offsets: Vec<(i64, i64)> = if dim == 1 {
            (1..=reach).map(|d| (d, 0)).collect()
        } else {
            let mut o = Vec::new();
            for dj in 0..=reach {
                for di in -reach..=reach {
                    if (dj == 0 && di <= 0) || ((di * di + dj * dj) as f64).sqrt() * h > r * (1.0 + 1e-12) {
                        continue;
                    }
                    o.push((di, dj));
                }
            }
            o
        };
        let mut osc: f64 = 0.0;
        for &c in &cells {
            let ij = grid.unflatten(c);
            for &(di, dj) in &offsets {
                let (i2, j2) = (ij[0] as i64 + di, ij[1] as i64 + dj);
                if i2 < 0 || i2 >= n || j2 < 0 || (dim == 2 && j2 >= n) {
                    continue;
                }
                let other = grid.flatten([i2 as usize, j2 as usize]);
                if inside[other] {
                    osc = osc.max((vals[c] - vals[other]).abs());
                }
            }
        }
        if osc > 0.0 {
            pts.push((r.ln(), osc.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, count: pts.len() });
    }
    let k = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    Ok((sxy / sxx).clamp(f64::MIN_POSITIVE, 1.0))
}
