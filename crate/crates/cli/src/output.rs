use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gauss_distill::Tolerances;
use serde::Serialize;

/// C's `%.12g`: 12 significant digits, trailing zeros dropped, exponent
/// form outside `1e-4 ≤ |x| < 1e12`.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub enum Cell {
    Int(u64),
    Num(f64),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => fmt_g(v),
        }
    }
}

pub struct Table {
    pub header: &'static str,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(self.header);
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct LeakageSummary {
    pub max: f64,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub leakage: Option<LeakageSummary>,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("gauss-distill".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("format".to_string(), "1".to_string()),
    ])
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `body` to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, body: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}

pub fn write_manifest(out: &Path, manifest: &Manifest) -> io::Result<PathBuf> {
    let path = manifest_path(out);
    let mut json = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(&path, json)?;
    Ok(path)
}
