//! Report files, plots and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

/// Output directory that remembers every file written into it.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Registers files written by a nested run (paths relative to this root).
    pub fn adopt(&mut self, prefix: &str, files: &[String]) {
        self.files.extend(files.iter().map(|f| format!("{prefix}/{f}")));
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

/// Wall-clock timing of named stages.
#[derive(Debug, Default)]
pub struct Stopwatch {
    stages: Vec<(String, f64)>,
}

impl Stopwatch {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.stages.into_iter().collect()
    }
}

/// The only file that carries the clock; data files stay byte-identical across re-runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    /// All runs are deterministic; recorded for completeness.
    pub seed: u64,
    pub config: serde_json::Value,
    pub artifacts: Vec<String>,
    pub wall_clock_seconds: BTreeMap<String, f64>,
    pub outcomes: BTreeMap<String, String>,
    pub overall: String,
    pub error: Option<String>,
}

impl RunManifest {
    pub const FILE: &'static str = "manifest.json";

    pub fn new(subcommand: &str, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            seed: 0,
            config,
            artifacts: Vec::new(),
            wall_clock_seconds: BTreeMap::new(),
            outcomes: BTreeMap::new(),
            overall: "ERROR".into(),
            error: None,
        }
    }

    /// Writes the manifest, listing itself among the artifacts.
    pub fn write(mut self, out: &mut OutputDir) -> Result<()> {
        self.artifacts = out.files().to_vec();
        self.artifacts.push(Self::FILE.to_string());
        out.write_json(Self::FILE, &self)
    }
}

/// Minimal line chart with a logarithmic y axis.
pub fn svg_log_plot(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const L: f64 = 70.0;
    const R: f64 = 20.0;
    const T: f64 = 40.0;
    const B: f64 = 50.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && *y > 0.0)
        .collect();
    let (mut x0, mut x1) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) =
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1.log10()), b.max(p.1.log10())));
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    y0 = y0.floor();
    y1 = y1.ceil().max(y0 + 1.0);
    let sx = |x: f64| L + (x - x0) / (x1 - x0) * (W - L - R);
    let sy = |y: f64| H - B - (y.log10() - y0) / (y1 - y0) * (H - T - B);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    s += &format!(
        "<line x1=\"{L}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n<line x1=\"{L}\" y1=\"{T}\" x2=\"{L}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - B,
        W - R
    );
    for e in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(e));
        s += &format!(
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{L}\" y2=\"{y:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">1e{e}</text>\n",
            L - 5.0,
            L - 8.0,
            y + 4.0
        );
    }
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        s += &format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            sx(x),
            H - B + 18.0,
            (x * 1000.0).round() / 1000.0
        );
    }
    s += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (L + W - R) / 2.0,
        H - 10.0,
        escape(x_label),
        (T + H - B) / 2.0,
        (T + H - B) / 2.0,
        escape(y_label)
    );
    for (i, (name, data)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y)))
            .collect();
        if !path.is_empty() {
            s += &format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", path.join(" "));
        }
        s += &format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            W - R - 120.0,
            T + 16.0 * (i as f64 + 1.0),
            escape(name)
        );
    }
    s += "</svg>\n";
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_and_skips_nonpositive() {
        let s = svg_log_plot("d(t)", "t", "distance", &[("a", vec![(0.0, 1.0), (1.0, 0.1), (2.0, 0.0)])]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 1);
        let empty = svg_log_plot("x", "t", "y", &[("a", vec![])]);
        assert!(empty.contains("</svg>"));
    }
}
