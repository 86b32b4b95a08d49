//! Cell-centered scalar fields and their CSV form.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Point};

/// Which physical variable a field carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// Density `rho >= 0`.
    Density,
    /// Pressure `u >= 0`.
    Pressure,
    /// Signed solution of the sink equation; may take both signs.
    Signed,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Density => "density",
            FieldKind::Pressure => "pressure",
            FieldKind::Signed => "signed",
        }
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(FieldKind::Density),
            "pressure" => Ok(FieldKind::Pressure),
            "signed" => Ok(FieldKind::Signed),
            other => Err(Error::InvalidField(format!("unknown field kind '{other}'"))),
        }
    }
}

/// Default upper bound for pressure fields.
pub const DEFAULT_PRESSURE_CAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    kind: FieldKind,
    time: f64,
}

impl ScalarField {
    /// Builds a field, checking finiteness and the sign constraint of `kind`.
    pub fn new(grid: Grid, values: Vec<f64>, kind: FieldKind, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value {v}")));
        }
        if kind != FieldKind::Signed {
            if let Some(v) = values.iter().find(|v| **v < 0.0) {
                return Err(Error::InvalidField(format!("negative {} value {v}", kind.as_str())));
            }
        }
        Ok(Self { grid, values, kind, time })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>, kind: FieldKind, time: f64) -> Self {
        Self { grid, values, kind, time }
    }

    pub fn zeros(grid: Grid, kind: FieldKind, time: f64) -> Self {
        Self { grid, values: vec![0.0; grid.len()], kind, time }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, kind: FieldKind, time: f64, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = grid.centers().map(f).collect();
        Self::new(grid, values, kind, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the (first) maximal cell.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Whether a pressure field respects the cap `u <= cap`.
    pub fn within_pressure_cap(&self, cap: f64) -> bool {
        self.kind != FieldKind::Pressure || self.values.iter().all(|v| *v <= cap)
    }

    /// Cellwise map producing a field of `kind`.
    pub fn map(&self, kind: FieldKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| f(*v)).collect(), kind, self.time)
    }

    /// Linear combination `alpha * self + beta * other` (signed result).
    pub fn combine(&self, alpha: f64, other: &ScalarField, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Self::new(self.grid, values, FieldKind::Signed, self.time)
    }

    /// `h^d * sum |self - other|`.
    pub fn l1_distance(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("grids differ".into()));
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// Multilinear interpolation through cell centers; constant extrapolation in
    /// the half cell next to the box edge. Points outside the box are `None`.
    pub fn interpolate(&self, p: Point) -> Option<f64> {
        if !self.grid.contains(p) {
            return None;
        }
        let h = self.grid.spacing();
        let n = self.grid.cells_per_axis();
        let mut lo = [0usize; 2];
        let mut frac = [0.0f64; 2];
        for axis in 0..self.grid.dim() {
            let s = ((p[axis] - self.grid.lower()) / h - 0.5).clamp(0.0, (n - 1) as f64);
            let i = (s.floor() as usize).min(n - 2);
            lo[axis] = i;
            frac[axis] = s - i as f64;
        }
        let v = |i: usize, j: usize| self.values[self.grid.flatten([i, j])];
        Some(match self.grid.dim() {
            1 => (1.0 - frac[0]) * v(lo[0], 0) + frac[0] * v(lo[0] + 1, 0),
            _ => {
                let (i, j) = (lo[0], lo[1]);
                let (fx, fy) = (frac[0], frac[1]);
                (1.0 - fx) * (1.0 - fy) * v(i, j)
                    + fx * (1.0 - fy) * v(i + 1, j)
                    + (1.0 - fx) * fy * v(i, j + 1)
                    + fx * fy * v(i + 1, j + 1)
            }
        })
    }

    /// CSV text: a `# t=.. kind=.. dim=.. h=..` header, then `x[,y],value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# t={} kind={} dim={} h={}",
            self.time,
            self.kind.as_str(),
            self.grid.dim(),
            self.grid.spacing()
        )
        .unwrap();
        for (idx, v) in self.values.iter().enumerate() {
            let c = self.grid.center(idx);
            match self.grid.dim() {
                1 => writeln!(out, "{},{}", c[0], v).unwrap(),
                _ => writeln!(out, "{},{},{}", c[0], c[1], v).unwrap(),
            }
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parses the CSV form produced by [`ScalarField::to_csv`].
    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let header = header?;
        let mut time = None;
        let mut kind = None;
        let mut dim = None;
        let mut h = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or(Error::Parse { line: 1, msg: format!("bad header token '{tok}'") })?;
            let bad = |_| Error::Parse { line: 1, msg: format!("bad value for {k}") };
            match k {
                "t" => time = Some(v.parse::<f64>().map_err(bad)?),
                "kind" => kind = Some(v.parse::<FieldKind>()?),
                "dim" => dim = Some(v.parse::<usize>().map_err(|_| Error::Parse { line: 1, msg: "bad dim".into() })?),
                "h" => h = Some(v.parse::<f64>().map_err(bad)?),
                _ => return Err(Error::Parse { line: 1, msg: format!("unknown header key '{k}'") }),
            }
        }
        let missing = |what: &str| Error::Parse { line: 1, msg: format!("header missing {what}") };
        let (time, kind, dim, h) = (
            time.ok_or_else(|| missing("t"))?,
            kind.ok_or_else(|| missing("kind"))?,
            dim.ok_or_else(|| missing("dim"))?,
            h.ok_or_else(|| missing("h"))?,
        );
        let mut first = None;
        let mut values = Vec::new();
        for (no, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: no + 1, msg: e.to_string() })?;
            if cols.len() != dim + 1 {
                return Err(Error::Parse { line: no + 1, msg: format!("expected {} columns", dim + 1) });
            }
            first.get_or_insert(cols[0]);
            values.push(cols[dim]);
        }
        let x0 = first.ok_or(Error::Parse { line: 2, msg: "no data rows".into() })?;
        let cells = match dim {
            1 => values.len(),
            _ => (values.len() as f64).sqrt().round() as usize,
        };
        let lower = x0 - 0.5 * h;
        let grid = Grid::new(dim, lower, lower + h * cells as f64, cells)?;
        Self::new(grid, values, kind, time)
    }
}
