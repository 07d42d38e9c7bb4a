//! Flat `key = value` settings with precedence flags > config file > defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Keys that never change the data written and are therefore kept out of
/// the manifest.
pub const RUNTIME_KEYS: [&str; 2] = ["jobs", "out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Stage,
    Nested,
    Figure3,
    Figure4,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Stage => "stage",
            Command::Nested => "nested",
            Command::Figure3 => "figure3",
            Command::Figure4 => "figure4",
        }
    }

    /// Keys accepted by the command, with their defaults (`""` means unset).
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Command::Validate => &[("lambda", "0.5"), ("cutoff", "8")],
            Command::Stage => &[
                ("r", "1"),
                ("T", "0.5"),
                ("C", ""),
                ("S", ""),
                ("q", "auto"),
                ("target_r", "1"),
                ("cutoff", "6"),
                ("brute_force", "false"),
            ],
            Command::Nested => &[
                ("r", "1"),
                ("T", "0.5"),
                ("C", ""),
                ("S", ""),
                ("q", "auto"),
                ("target_r", "1"),
                ("stages", "3"),
                ("cutoff", "6"),
                ("brute_force", "false"),
            ],
            Command::Figure3 => &[("eps", "0.1:0.9:0.1"), ("stages", "4")],
            Command::Figure4 => &[("T", "0.05:1.0:0.05"), ("r", "1"), ("stages", "3"), ("cutoff", "6")],
        }
    }

    pub fn accepts(self, key: &str) -> bool {
        RUNTIME_KEYS.contains(&key) || self.defaults().iter().any(|(k, _)| *k == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    command: Command,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Layers `file` over the defaults and `flags` over both. Flags outside
    /// the command's key set are rejected; unknown file keys are ignored so
    /// one file can serve several commands.
    pub fn resolve(
        command: Command,
        file: Option<BTreeMap<String, String>>,
        flags: &[(&str, Option<String>)],
    ) -> Result<Self, String> {
        let mut values: BTreeMap<String, String> = command
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in file.into_iter().flatten() {
            if command.accepts(&k) {
                values.insert(k, v);
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                if !command.accepts(k) {
                    return Err(format!("--{k} is not accepted by `{}`", command.name()));
                }
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { command, values })
    }

    pub fn command(&self) -> Command {
        self.command
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn f64(&self, key: &str) -> Result<f64, String> {
        let raw = self.raw(key).ok_or_else(|| format!("missing value for {key}"))?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{key} = {raw:?} is not a finite number"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, String> {
        let raw = self.raw(key).ok_or_else(|| format!("missing value for {key}"))?;
        raw.parse().map_err(|_| format!("{key} = {raw:?} is not a non-negative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool, String> {
        match self.raw(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(other) => Err(format!("{key} = {other:?} is not a boolean")),
        }
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>, String> {
        let raw = self.raw(key).ok_or_else(|| format!("missing value for {key}"))?;
        parse_grid(raw).map_err(|e| format!("{key}: {e}"))
    }

    /// The data-relevant settings, as recorded in a manifest.
    pub fn recorded(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !RUNTIME_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// `start:stop:step`, inclusive of `stop` within half a step; a bare number
/// is a one-point grid.
pub fn parse_grid(raw: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = raw
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in {raw:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x] if x.is_finite() => Ok(vec![x]),
        [start, stop, step] if start.is_finite() && stop.is_finite() && step > 0.0 && step.is_finite() => {
            if stop < start {
                return Err(format!("empty grid {raw:?}"));
            }
            let n = ((stop - start) / step + 0.5).floor() as usize;
            Ok((0..=n).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(format!("expected start:stop:step with step > 0, got {raw:?}")),
    }
}

/// Reads a flat `key = value` file, or the `config` object of a manifest.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let manifest: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let config = manifest
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| format!("{}: manifest has no config object", path.display()))?;
        return config
            .iter()
            .map(|(k, v)| match v.as_str() {
                Some(s) => Ok((k.clone(), s.to_string())),
                None => Err(format!("{}: config value for {k} is not a string", path.display())),
            })
            .collect();
    }
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("line {}: empty key", no + 1));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoint() {
        let g = parse_grid("0.1:0.9:0.1").unwrap();
        assert_eq!(g.len(), 9);
        assert!((g[8] - 0.9).abs() < 1e-12);
        assert_eq!(parse_grid("0.05:1.0:0.05").unwrap().len(), 20);
        assert_eq!(parse_grid("0.3").unwrap(), vec![0.3]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn config_comments_and_blanks() {
        let c = parse_config("# header\nr = 0.8 # squeezing\n\nT=0.4\n").unwrap();
        assert_eq!(c["r"], "0.8");
        assert_eq!(c["T"], "0.4");
        assert!(parse_config("r 0.8").is_err());
    }

    #[test]
    fn precedence() {
        let file = parse_config("r = 0.8\nT = 0.4\nunrelated = 1").unwrap();
        let s = Settings::resolve(Command::Nested, Some(file), &[("T", Some("0.6".into())), ("r", None)]).unwrap();
        assert_eq!(s.f64("r").unwrap(), 0.8);
        assert_eq!(s.f64("T").unwrap(), 0.6);
        assert_eq!(s.usize("stages").unwrap(), 3);
        assert!(Settings::resolve(Command::Figure3, None, &[("r", Some("1".into()))]).is_err());
    }
}
