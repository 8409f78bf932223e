//! Sweep configuration: flat `key=value` text or an equivalent JSON object.
//!
//! Numeric keys that span a sweep (`eta`, `eps`, `eps_scaled`) accept a
//! single value, a comma list `0.02,0.05,0.1` or an inclusive range
//! `start:stop:step`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

pub const KEYS: &[&str] = &[
    "delta", "kappa", "gain", "eta", "eps", "eps_scaled", "dim", "t_end", "rtol", "atol", "seed", "n_traj", "grid_n", "grid_radius", "workers", "tasks",
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given more than once")]
    Duplicate(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("`eps` and `eps_scaled` are mutually exclusive; give exactly one")]
    DriveConflict,
    #[error("line {line}: expected `key=value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("JSON config: {0}")]
    Json(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Gaps,
    Steady,
    Evolve,
    Classical,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaps" => Ok(Self::Gaps),
            "steady" => Ok(Self::Steady),
            "evolve" => Ok(Self::Evolve),
            "classical" => Ok(Self::Classical),
            _ => Err(format!("unknown task {s:?} (expected gaps, steady, evolve or classical)")),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Gaps => "gaps",
            Self::Steady => "steady",
            Self::Evolve => "evolve",
            Self::Classical => "classical",
        };
        f.write_str(s)
    }
}

/// How the drive axis of the sweep is specified.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Values of `ε√η`; the drive is real.
    EpsScaled(Vec<f64>),
    /// Raw real drive amplitudes `ε`.
    Eps(Vec<f64>),
}

/// Fully resolved configuration. Every field has a value; `dim` and
/// `grid_radius` stay `None` when chosen automatically per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub delta: f64,
    pub kappa: f64,
    pub gain: f64,
    pub eta: Vec<f64>,
    pub drive: Drive,
    pub dim: Option<usize>,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub seed: u64,
    pub n_traj: usize,
    pub grid_n: usize,
    pub grid_radius: Option<f64>,
    pub workers: usize,
    pub tasks: Vec<Task>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            delta: 10.0,
            kappa: 0.1,
            gain: 1.0,
            eta: vec![0.05],
            drive: Drive::EpsScaled(vec![0.0]),
            dim: None,
            t_end: 40.0,
            rtol: 1e-8,
            atol: 1e-10,
            seed: 0,
            n_traj: 1000,
            grid_n: 201,
            grid_radius: None,
            workers: 0,
            tasks: vec![Task::Gaps],
        }
    }
}

/// Raw `key → text` assignments, checked against [`KEYS`].
#[derive(Debug, Clone, Default)]
pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    pub fn contains(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if self.0.insert(key.to_string(), value.into()).is_some() {
            return Err(ConfigError::Duplicate(key.to_string()));
        }
        Ok(())
    }

    /// Like [`set`](Self::set) but later values win.
    pub fn overlay(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    /// `key=value` per line; `#` starts a comment.
    pub fn parse_kv(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: line.to_string() })?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    /// A flat JSON object; arrays become comma lists.
    pub fn parse_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
        let obj = value.as_object().ok_or_else(|| ConfigError::Json("top level must be an object".into()))?;
        let mut raw = Self::default();
        for (k, v) in obj {
            raw.set(k, json_scalar_text(k, v)?)?;
        }
        Ok(raw)
    }

    pub fn resolve(&self) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        let get = |k: &str| self.0.get(k).map(String::as_str);
        if let Some(v) = get("delta") {
            c.delta = parse_num("delta", v)?;
        }
        if let Some(v) = get("kappa") {
            c.kappa = parse_num("kappa", v)?;
        }
        if let Some(v) = get("gain") {
            c.gain = parse_num("gain", v)?;
        }
        if let Some(v) = get("eta") {
            c.eta = parse_values("eta", v)?;
        }
        c.drive = match (get("eps"), get("eps_scaled")) {
            (Some(_), Some(_)) => return Err(ConfigError::DriveConflict),
            (Some(v), None) => Drive::Eps(parse_values("eps", v)?),
            (None, Some(v)) => Drive::EpsScaled(parse_values("eps_scaled", v)?),
            (None, None) => c.drive,
        };
        if let Some(v) = get("dim") {
            c.dim = if v == "auto" { None } else { Some(parse_num("dim", v)?) };
        }
        if let Some(v) = get("t_end") {
            c.t_end = parse_num("t_end", v)?;
        }
        if let Some(v) = get("rtol") {
            c.rtol = parse_num("rtol", v)?;
        }
        if let Some(v) = get("atol") {
            c.atol = parse_num("atol", v)?;
        }
        if let Some(v) = get("seed") {
            c.seed = parse_num("seed", v)?;
        }
        if let Some(v) = get("n_traj") {
            c.n_traj = parse_num("n_traj", v)?;
        }
        if let Some(v) = get("grid_n") {
            c.grid_n = parse_num("grid_n", v)?;
        }
        if let Some(v) = get("grid_radius") {
            c.grid_radius = if v == "auto" { None } else { Some(parse_num("grid_radius", v)?) };
        }
        if let Some(v) = get("workers") {
            c.workers = parse_num("workers", v)?;
        }
        if let Some(v) = get("tasks") {
            let mut tasks = Vec::new();
            for t in v.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let t: Task = t.parse().map_err(|reason| ConfigError::Invalid { key: "tasks", reason })?;
                if !tasks.contains(&t) {
                    tasks.push(t);
                }
            }
            c.tasks = tasks;
        }
        c.validate()?;
        Ok(c)
    }
}

fn json_scalar_text(key: &str, v: &serde_json::Value) -> Result<String, ConfigError> {
    use serde_json::Value;
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        Value::Array(items) => items
            .iter()
            .map(|x| match x {
                Value::Number(n) => Ok(n.to_string()),
                Value::String(s) => Ok(s.clone()),
                _ => Err(ConfigError::Json(format!("`{key}`: array items must be numbers or strings"))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.join(",")),
        _ => Err(ConfigError::Json(format!("`{key}`: expected a number, string or array"))),
    }
}

fn parse_num<T: FromStr>(key: &'static str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.trim().parse().map_err(|e: T::Err| ConfigError::Invalid { key, reason: format!("{v:?}: {e}") })
}

/// A value, a comma list or an inclusive `start:stop:step` range.
pub fn parse_values(key: &'static str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_num(key, x)?),
            [a, b, s] => {
                let (a, b, s): (f64, f64, f64) = (parse_num(key, a)?, parse_num(key, b)?, parse_num(key, s)?);
                if !(s > 0.0) || b < a {
                    return Err(ConfigError::Invalid { key, reason: format!("range {item:?} needs stop >= start and step > 0") });
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                // index-based so long ranges carry no accumulated rounding
                out.extend((0..=n).map(|i| a + i as f64 * s));
            }
            _ => return Err(ConfigError::Invalid { key, reason: format!("{item:?} is neither a number nor start:stop:step") }),
        }
    }
    if out.is_empty() {
        return Err(ConfigError::Invalid { key, reason: "no values".into() });
    }
    Ok(out)
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let raw = if text.trim_start().starts_with('{') { RawConfig::parse_json(&text)? } else { RawConfig::parse_kv(&text)? };
        raw.resolve()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &'static str, reason: String| Err(ConfigError::Invalid { key, reason });
        if !self.delta.is_finite() {
            return bad("delta", "must be finite".into());
        }
        for (key, v) in [("kappa", self.kappa), ("gain", self.gain)] {
            if !v.is_finite() || v < 0.0 {
                return bad(key, format!("must be >= 0, got {v}"));
            }
        }
        if let Some(v) = self.eta.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return bad("eta", format!("must be >= 0, got {v}"));
        }
        match &self.drive {
            Drive::EpsScaled(v) => {
                if let Some(x) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    return bad("eps_scaled", format!("must be >= 0, got {x}"));
                }
                if v.iter().any(|x| *x > 0.0) && self.eta.iter().any(|e| *e == 0.0) {
                    return bad("eta", "eps_scaled needs eta > 0; use eps for a drive without two-photon loss".into());
                }
            }
            Drive::Eps(v) => {
                if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                    return bad("eps", format!("must be finite, got {x}"));
                }
            }
        }
        if let Some(d) = self.dim {
            if d < 2 {
                return bad("dim", format!("must be >= 2, got {d}"));
            }
        }
        for (key, v) in [("t_end", self.t_end), ("rtol", self.rtol), ("atol", self.atol)] {
            if !v.is_finite() || v <= 0.0 {
                return bad(key, format!("must be > 0, got {v}"));
            }
        }
        if self.n_traj == 0 {
            return bad("n_traj", "must be > 0".into());
        }
        if self.grid_n < 2 {
            return bad("grid_n", format!("must be >= 2, got {}", self.grid_n));
        }
        if let Some(r) = self.grid_radius {
            if !r.is_finite() || r <= 0.0 {
                return bad("grid_radius", format!("must be > 0, got {r}"));
            }
        }
        if self.tasks.is_empty() {
            return bad("tasks", "no tasks".into());
        }
        Ok(())
    }

    /// All `(η, drive)` points sorted by `(η, ε√η)`.
    pub fn points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for &eta in &self.eta {
            match &self.drive {
                Drive::EpsScaled(v) => pts.extend(v.iter().map(|&s| Point { eta, eps: if eta > 0.0 { s / eta.sqrt() } else { 0.0 }, eps_scaled: s })),
                Drive::Eps(v) => pts.extend(v.iter().map(|&e| Point { eta, eps: e, eps_scaled: e.abs() * eta.sqrt() })),
            }
        }
        pts.sort_by(|a, b| a.eta.total_cmp(&b.eta).then(a.eps_scaled.total_cmp(&b.eps_scaled)).then(a.eps.total_cmp(&b.eps)));
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub eta: f64,
    pub eps: f64,
    pub eps_scaled: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive() {
        let v = parse_values("eps_scaled", "0:8:0.5").unwrap();
        assert_eq!(v.len(), 17);
        assert_eq!(v[16], 8.0);
    }

    #[test]
    fn negative_kappa_names_the_key() {
        let err = RawConfig::parse_kv("kappa=-1").unwrap().resolve().unwrap_err();
        assert!(err.to_string().contains("`kappa`"), "{err}");
    }

    #[test]
    fn eps_and_eps_scaled_conflict() {
        let err = RawConfig::parse_kv("eps=1\neps_scaled=2").unwrap().resolve().unwrap_err();
        assert!(matches!(err, ConfigError::DriveConflict));
    }

    #[test]
    fn json_and_kv_agree() {
        let a = RawConfig::parse_kv("eta = 0.02,0.05\neps_scaled=0:1:0.5\ntasks=gaps,steady # two\n").unwrap().resolve().unwrap();
        let b = RawConfig::parse_json(r#"{"eta": [0.02, 0.05], "eps_scaled": "0:1:0.5", "tasks": ["gaps", "steady"]}"#).unwrap().resolve().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(RawConfig::parse_kv("kapa=1"), Err(ConfigError::UnknownKey(k)) if k == "kapa"));
    }

    #[test]
    fn points_sorted_by_eta_then_drive() {
        let c = RawConfig::parse_kv("eta=0.1,0.02\neps_scaled=2,1").unwrap().resolve().unwrap();
        let p: Vec<(f64, f64)> = c.points().iter().map(|p| (p.eta, p.eps_scaled)).collect();
        assert_eq!(p, vec![(0.02, 1.0), (0.02, 2.0), (0.1, 1.0), (0.1, 2.0)]);
    }
}
