//! INI-style scenario files.
//!
//! ```text
//! [scenario]
//! m = 1.5
//! dim = 1
//! [potential]
//! form = quadratic
//! ```
//!
//! Lines starting with `#` or `;` are comments. Keys not listed in [`KNOWN_KEYS`]
//! and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{default_c1, default_c2, ScenarioConfig};
use crate::potential::{PotentialForm, PotentialSpec};

/// Every accepted `(section, key)` with its documented default.
pub const KNOWN_KEYS: &[(&str, &str, &str)] = &[
    ("scenario", "m", "required"),
    ("scenario", "dim", "1"),
    ("scenario", "a", "0.1"),
    ("scenario", "k", "0.3"),
    ("scenario", "k_prime", "1 - 1/((m-1) dim + 2)"),
    ("scenario", "gamma", "0.5"),
    ("scenario", "c0", "0.001"),
    ("scenario", "c0_scan", "0.01, 0.001, 0.0001"),
    ("scenario", "c1", "C^2 norm of the potential on B_1(x0)"),
    ("scenario", "c2", "2 c1 / (m~ - 1)"),
    ("scenario", "x0", "0, 0"),
    ("scenario", "t0", "0"),
    ("scenario", "t1", "0"),
    ("scenario", "containment_radius", "2"),
    ("scenario", "mass_ball_radius", "2"),
    ("scenario", "slope_slack", "0.1"),
    ("scenario", "front_threshold", "0.001"),
    ("scenario", "initial_height", "0.3"),
    ("scenario", "initial_radius", "2"),
    ("scenario", "end_time", "6"),
    ("scenario", "snapshots", "60"),
    ("solver", "cfl_fraction", "0.45"),
    ("solver", "support_guard_cells", "4"),
    ("solver", "positivity_floor", "0"),
    ("solver", "support_threshold", "1e-8"),
    ("grid", "lower", "-4"),
    ("grid", "upper", "4"),
    ("grid", "cells", "800 (1D) / 128 (2D)"),
    ("potential", "form", "quadratic | scaled_quadratic | cosine_well | polynomial"),
    ("potential", "b", "1 (scaled_quadratic)"),
    ("potential", "coefficients", "required for polynomial"),
    ("potential", "arg_scale", "1"),
    ("potential", "arg_shift", "0, 0"),
    ("output", "svg", "true"),
    ("output", "snapshots_csv", "false"),
];

/// Help text listing every key and its default.
pub fn defaults_help() -> String {
    let mut out = String::from("config keys (section.key = default):\n");
    for (s, k, d) in KNOWN_KEYS {
        out.push_str(&format!("  {s}.{k} = {d}\n"));
    }
    out
}

struct Entry {
    line: usize,
    value: String,
}

struct Raw(BTreeMap<(String, String), Entry>);

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut section: Option<String> = None;
        for (n, raw_line) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw_line.trim();
            if body.is_empty() || body.starts_with('#') || body.starts_with(';') {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse { line, msg: format!("malformed section header '{body}'") })?
                    .trim();
                if !KNOWN_KEYS.iter().any(|(s, _, _)| *s == name) {
                    return Err(Error::Parse { line, msg: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{body}'") })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .clone()
                .ok_or_else(|| Error::Parse { line, msg: format!("key '{key}' outside any section") })?;
            if !KNOWN_KEYS.iter().any(|(s, k, _)| *s == sec && *k == key) {
                return Err(Error::Parse { line, msg: format!("unknown key '{key}' in [{sec}]") });
            }
            let slot = (sec.clone(), key.to_string());
            if let Some(prev) = map.get(&slot) {
                let Entry { line: first, .. } = prev;
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate key '{key}' in [{sec}] (first set on line {first})"),
                });
            }
            map.insert(slot, Entry { line, value: value.to_string() });
        }
        Ok(Raw(map))
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.0.get(&(section.to_string(), key.to_string()))
    }

    fn real(&self, section: &str, key: &str) -> Result<Option<f64>> {
        self.get(section, key)
            .map(|e| {
                e.value.parse::<f64>().map_err(|_| Error::Parse {
                    line: e.line,
                    msg: format!("'{key}' expects a number, got '{}'", e.value),
                })
            })
            .transpose()
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<usize>> {
        self.get(section, key)
            .map(|e| {
                e.value.parse::<usize>().map_err(|_| Error::Parse {
                    line: e.line,
                    msg: format!("'{key}' expects a nonnegative integer, got '{}'", e.value),
                })
            })
            .transpose()
    }

    fn flag(&self, section: &str, key: &str) -> Result<Option<bool>> {
        self.get(section, key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                v => Err(Error::Parse { line: e.line, msg: format!("'{key}' expects true/false, got '{v}'") }),
            })
            .transpose()
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|e| {
                e.value
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: e.line,
                            msg: format!("'{key}' expects a comma-separated list of numbers, got '{}'", e.value),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()
    }

    fn point(&self, section: &str, key: &str) -> Result<Option<[f64; 2]>> {
        let Some(v) = self.list(section, key)? else { return Ok(None) };
        match v.as_slice() {
            [x] => Ok(Some([*x, 0.0])),
            [x, y] => Ok(Some([*x, *y])),
            _ => Err(Error::Parse {
                line: self.get(section, key).map_or(0, |e| e.line),
                msg: format!("'{key}' expects one or two coordinates"),
            }),
        }
    }
}

fn parse_potential(raw: &Raw, dim: usize) -> Result<PotentialSpec> {
    let form = match raw.get("potential", "form") {
        None => PotentialForm::Quadratic,
        Some(e) => match e.value.as_str() {
            "quadratic" => PotentialForm::Quadratic,
            "scaled_quadratic" => PotentialForm::ScaledQuadratic { b: raw.real("potential", "b")?.unwrap_or(1.0) },
            "cosine_well" => PotentialForm::CosineWell,
            "polynomial" => PotentialForm::Polynomial {
                coefficients: raw.list("potential", "coefficients")?.ok_or_else(|| Error::Parse {
                    line: e.line,
                    msg: "polynomial potential needs 'coefficients'".into(),
                })?,
            },
            other => return Err(Error::Parse { line: e.line, msg: format!("unknown potential form '{other}'") }),
        },
    };
    let mut spec = PotentialSpec::new(form, dim);
    if let Some(s) = raw.real("potential", "arg_scale")? {
        spec.arg_scale = s;
    }
    if let Some(p) = raw.point("potential", "arg_shift")? {
        spec.arg_shift = p;
    }
    Ok(spec)
}

/// Parses a scenario file body; missing keys take their documented defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw = Raw::parse(text)?;
    let m = raw
        .real("scenario", "m")?
        .ok_or_else(|| Error::Config("missing required key 'm' in [scenario]".into()))?;
    let dim = raw.count("scenario", "dim")?.unwrap_or(1);
    if dim != 1 && dim != 2 {
        return Err(Error::Config(format!("dim must be 1 or 2, got {dim}")));
    }
    let potential = parse_potential(&raw, dim)?;
    let mut cfg = ScenarioConfig::with_defaults(m, dim, potential);

    macro_rules! set_real {
        ($sec:literal, $key:literal, $($field:ident).+) => {
            if let Some(v) = raw.real($sec, $key)? {
                cfg.$($field).+ = v;
            }
        };
    }
    set_real!("scenario", "a", a);
    set_real!("scenario", "k", k);
    set_real!("scenario", "k_prime", k_prime);
    set_real!("scenario", "gamma", gamma);
    set_real!("scenario", "c0", c0);
    set_real!("scenario", "t0", t0);
    set_real!("scenario", "t1", t1);
    set_real!("scenario", "containment_radius", containment_radius);
    set_real!("scenario", "mass_ball_radius", mass_ball_radius);
    set_real!("scenario", "slope_slack", slope_slack);
    set_real!("scenario", "front_threshold", front_threshold);
    set_real!("scenario", "initial_height", initial_height);
    set_real!("scenario", "initial_radius", initial_radius);
    set_real!("scenario", "end_time", end_time);
    set_real!("solver", "cfl_fraction", solver.cfl_fraction);
    set_real!("solver", "support_guard_cells", solver.support_guard_cells);
    set_real!("solver", "positivity_floor", solver.positivity_floor);
    set_real!("solver", "support_threshold", solver.support_threshold);
    set_real!("grid", "lower", grid.lower);
    set_real!("grid", "upper", grid.upper);
    if let Some(v) = raw.count("grid", "cells")? {
        cfg.grid.cells = v;
    }
    if let Some(v) = raw.count("scenario", "snapshots")? {
        cfg.snapshots = v;
    }
    if let Some(v) = raw.list("scenario", "c0_scan")? {
        cfg.c0_scan = v;
    }
    if let Some(p) = raw.point("scenario", "x0")? {
        cfg.x0 = p;
    }
    if let Some(v) = raw.flag("output", "svg")? {
        cfg.output.svg = v;
    }
    if let Some(v) = raw.flag("output", "snapshots_csv")? {
        cfg.output.snapshots_csv = v;
    }
    // derived defaults depend on the final x0 and a
    cfg.c1 = match raw.real("scenario", "c1")? {
        Some(v) => v,
        None => default_c1(&cfg.potential, cfg.x0),
    };
    cfg.c2 = match raw.real("scenario", "c2")? {
        Some(v) => v,
        None => default_c2(cfg.m, cfg.c1, cfg.a),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

/// Writes every key explicitly, so that `parse_config(serialize_config(c)) == c`.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
    kv("[scenario]\nm", format!("{}", cfg.m));
    kv("dim", format!("{}", cfg.dim));
    kv("a", format!("{}", cfg.a));
    kv("k", format!("{}", cfg.k));
    kv("k_prime", format!("{}", cfg.k_prime));
    kv("gamma", format!("{}", cfg.gamma));
    kv("c0", format!("{}", cfg.c0));
    kv("c0_scan", join(&cfg.c0_scan));
    kv("c1", format!("{}", cfg.c1));
    kv("c2", format!("{}", cfg.c2));
    kv("x0", join(&cfg.x0));
    kv("t0", format!("{}", cfg.t0));
    kv("t1", format!("{}", cfg.t1));
    kv("containment_radius", format!("{}", cfg.containment_radius));
    kv("mass_ball_radius", format!("{}", cfg.mass_ball_radius));
    kv("slope_slack", format!("{}", cfg.slope_slack));
    kv("front_threshold", format!("{}", cfg.front_threshold));
    kv("initial_height", format!("{}", cfg.initial_height));
    kv("initial_radius", format!("{}", cfg.initial_radius));
    kv("end_time", format!("{}", cfg.end_time));
    kv("snapshots", format!("{}", cfg.snapshots));
    kv("\n[solver]\ncfl_fraction", format!("{}", cfg.solver.cfl_fraction));
    kv("support_guard_cells", format!("{}", cfg.solver.support_guard_cells));
    kv("positivity_floor", format!("{}", cfg.solver.positivity_floor));
    kv("support_threshold", format!("{}", cfg.solver.support_threshold));
    kv("\n[grid]\nlower", format!("{}", cfg.grid.lower));
    kv("upper", format!("{}", cfg.grid.upper));
    kv("cells", format!("{}", cfg.grid.cells));
    let p = &cfg.potential;
    match &p.form {
        PotentialForm::Quadratic => kv("\n[potential]\nform", "quadratic".into()),
        PotentialForm::ScaledQuadratic { b } => {
            kv("\n[potential]\nform", "scaled_quadratic".into());
            kv("b", format!("{b}"));
        }
        PotentialForm::CosineWell => kv("\n[potential]\nform", "cosine_well".into()),
        PotentialForm::Polynomial { coefficients } => {
            kv("\n[potential]\nform", "polynomial".into());
            kv("coefficients", join(coefficients));
        }
    }
    kv("arg_scale", format!("{}", p.arg_scale));
    kv("arg_shift", join(&p.arg_shift));
    kv("\n[output]\nsvg", format!("{}", cfg.output.svg));
    kv("snapshots_csv", format!("{}", cfg.output.snapshots_csv));
    s
}
