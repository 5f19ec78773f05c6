//! Flat `key = value` scenario files with unit suffixes and single-parent
//! inheritance (`inherit = other.cfg`, resolved relative to the including file).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Physical dimension of a key, with its accepted unit suffixes
/// (factor to SI). A bare number is taken in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Frequency,
    Field,
    Time,
    Gradient,
    Mass,
    Number,
    Integer,
    Choice(&'static [&'static str]),
    Text,
}

impl Kind {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Frequency => &[("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)],
            Kind::Field => &[
                ("mG", 1e-7),
                ("uT", 1e-6),
                ("nT", 1e-9),
                ("G", 1e-4),
                ("T", 1.0),
            ],
            Kind::Time => &[("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("s", 1.0)],
            Kind::Gradient => &[("G/cm", 1e-2), ("T/m", 1.0)],
            Kind::Mass => &[("amu", rfdress_core::constants::CODATA.amu), ("kg", 1.0)],
            _ => &[],
        }
    }

    fn si_unit(self) -> &'static str {
        match self {
            Kind::Frequency => "Hz",
            Kind::Field => "T",
            Kind::Time => "s",
            Kind::Gradient => "T/m",
            Kind::Mass => "kg",
            _ => "",
        }
    }
}

const SHAPES: &[&str] = &["linear", "smoothstep"];
const SPACINGS: &[&str] = &["linear", "log"];
pub const SCENARIOS: &[&str] = &[
    "fig1",
    "fig2b",
    "fig3a",
    "fig3b",
    "fig4gap",
    "gj-sweep",
    "quasienergy",
    "classical-avg",
    "channels",
];

/// Every key a scenario file may contain.
pub const SCHEMA: &[(&str, Kind)] = &[
    ("scenario", Kind::Choice(SCENARIOS)),
    ("output", Kind::Text),
    ("rf_frequency", Kind::Frequency),
    ("b_perp", Kind::Field),
    ("larmor_perp", Kind::Frequency),
    ("b_par", Kind::Field),
    ("gradient", Kind::Gradient),
    ("spin_j", Kind::Number),
    ("g_j", Kind::Number),
    ("mass", Kind::Mass),
    ("tol", Kind::Number),
    ("ratio_min", Kind::Number),
    ("ratio_max", Kind::Number),
    ("ratio_points", Kind::Integer),
    ("omega_max_ratio", Kind::Number),
    ("t_up", Kind::Time),
    ("total_time", Kind::Time),
    ("ramp_time", Kind::Time),
    ("ramp_shape", Kind::Choice(SHAPES)),
    ("drift_time", Kind::Time),
    ("slope_step", Kind::Number),
    ("tau_min", Kind::Time),
    ("tau_max", Kind::Time),
    ("tau_points", Kind::Integer),
    ("tau_spacing", Kind::Choice(SPACINGS)),
    ("b_par_min", Kind::Field),
    ("b_par_max", Kind::Field),
    ("b_par_points", Kind::Integer),
    ("periods", Kind::Integer),
    ("n_max", Kind::Integer),
    ("exit_rank", Kind::Integer),
    ("exit_ml", Kind::Integer),
    ("dipolar_scale", Kind::Number),
    ("coarse_points", Kind::Integer),
    ("window", Kind::Number),
];

fn kind_of(key: &str) -> Option<Kind> {
    SCHEMA
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, kind)| *kind)
}

#[derive(Clone, Debug)]
struct Entry {
    raw: String,
    origin: PathBuf,
    line: usize,
}

/// A fully inherited scenario file. Every typed read is recorded so the
/// resolved parameters can be reported.
#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<Vec<(String, String)>>,
    tol_override: Option<f64>,
    root: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut seen = BTreeSet::new();
        load_into(path, &mut entries, &mut seen)?;
        entries.remove("inherit");
        Ok(Self {
            entries,
            root: path.to_path_buf(),
            ..Self::default()
        })
    }

    #[cfg(test)]
    pub fn parse_str(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (key, entry) in parse_lines(text, origin)? {
            if key == "inherit" {
                return Err(CliError::config(
                    "inherit",
                    "not supported in inline configs",
                ));
            }
            entries.insert(key, entry);
        }
        Ok(Self {
            entries,
            root: origin.to_path_buf(),
            ..Self::default()
        })
    }

    pub fn with_tol_override(mut self, tol: Option<f64>) -> Self {
        self.tol_override = tol;
        self
    }

    #[cfg(test)]
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Keys set in the top-level file itself rather than inherited.
    pub fn own_keys(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|(_, e)| e.origin == self.root)
            .map(|(k, _)| k.as_str())
    }

    /// Key/value pairs read so far, values in SI units.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.resolved.borrow().clone()
    }

    fn record(&self, key: &str, value: String) {
        let mut r = self.resolved.borrow_mut();
        if !r.iter().any(|(k, _)| k == key) {
            r.push((key.to_string(), value));
        }
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        debug_assert!(
            kind_of(key).is_some(),
            "key `{key}` missing from the schema"
        );
        self.entries.get(key)
    }

    fn where_(&self, key: &str) -> String {
        self.entries
            .get(key)
            .map(|e| format!(" ({}:{})", e.origin.display(), e.line))
            .unwrap_or_default()
    }

    /// Physical quantity in SI units.
    pub fn quantity(&self, key: &str) -> Result<Option<f64>, CliError> {
        let kind = kind_of(key).expect("schema key");
        let Some(e) = self.raw(key) else {
            return Ok(None);
        };
        let v = parse_quantity(&e.raw, kind)
            .map_err(|m| CliError::config(key, format!("{m}{}", self.where_(key))))?;
        self.record(key, format_si(v, kind));
        Ok(Some(v))
    }

    pub fn quantity_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.quantity(key)?.unwrap_or(default);
        self.record(key, format_si(v, kind_of(key).expect("schema key")));
        Ok(v)
    }

    pub fn required(&self, key: &str) -> Result<f64, CliError> {
        self.quantity(key)?
            .ok_or_else(|| CliError::config(key, "missing required key"))
    }

    pub fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = match default {
            Some(d) => self.quantity_or(key, d)?,
            None => self.required(key)?,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::config(
                key,
                format!("must be > 0, got {v}{}", self.where_(key)),
            ));
        }
        Ok(v)
    }

    pub fn non_negative(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.quantity_or(key, default)?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::config(
                key,
                format!("must be >= 0, got {v}{}", self.where_(key)),
            ));
        }
        Ok(v)
    }

    pub fn integer_or(&self, key: &str, default: i64) -> Result<i64, CliError> {
        let v = match self.raw(key) {
            None => default,
            Some(e) => e.raw.parse::<i64>().map_err(|_| {
                CliError::config(
                    key,
                    format!("expected an integer, got `{}`{}", e.raw, self.where_(key)),
                )
            })?,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional_integer(&self, key: &str) -> Result<Option<i64>, CliError> {
        if self.raw(key).is_none() {
            return Ok(None);
        }
        self.integer_or(key, 0).map(Some)
    }

    pub fn count(&self, key: &str, default: i64, min: i64) -> Result<usize, CliError> {
        let v = self.integer_or(key, default)?;
        if v < min {
            return Err(CliError::config(
                key,
                format!("must be >= {min}, got {v}{}", self.where_(key)),
            ));
        }
        Ok(v as usize)
    }

    pub fn choice(&self, key: &str, default: &'static str) -> Result<String, CliError> {
        let Kind::Choice(options) = kind_of(key).expect("schema key") else {
            unreachable!("`{key}` is not a choice key")
        };
        let v = self.raw(key).map_or(default.to_string(), |e| e.raw.clone());
        if !options.contains(&v.as_str()) {
            return Err(CliError::config(
                key,
                format!(
                    "expected one of {}, got `{v}`{}",
                    options.join("|"),
                    self.where_(key)
                ),
            ));
        }
        self.record(key, v.clone());
        Ok(v)
    }

    pub fn text(&self, key: &str) -> Option<String> {
        self.raw(key).map(|e| e.raw.clone())
    }

    /// Integration tolerance: `--tol`, else the `tol` key, else `default`.
    pub fn tol(&self, default: f64) -> Result<f64, CliError> {
        if let Some(t) = self.tol_override {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config(
                    "tol",
                    format!("--tol must be > 0, got {t}"),
                ));
            }
            self.record("tol", format!("{t:e}"));
            return Ok(t);
        }
        self.positive("tol", Some(default))
    }

    /// `rf_frequency` as an angular frequency (rad/s).
    pub fn rf_omega(&self) -> Result<f64, CliError> {
        Ok(2.0 * PI * self.positive("rf_frequency", None)?)
    }
}

fn format_si(v: f64, kind: Kind) -> String {
    let unit = kind.si_unit();
    if unit.is_empty() {
        crate::csv::format_g(v)
    } else {
        format!("{} {unit}", crate::csv::format_g(v))
    }
}

fn parse_quantity(raw: &str, kind: Kind) -> Result<f64, String> {
    let bad = || format!("cannot parse `{raw}` as a {kind:?} value");
    let (number, factor) = kind
        .units()
        .iter()
        .find_map(|(suffix, f)| raw.strip_suffix(suffix).map(|rest| (rest.trim(), *f)))
        .unwrap_or((raw, 1.0));
    if number.is_empty() {
        return Err(bad());
    }
    let v: f64 = number.parse().map_err(|_| {
        if number
            .chars()
            .any(|c| c.is_alphabetic() && c != 'e' && c != 'E')
        {
            let units: Vec<&str> = kind.units().iter().map(|(u, _)| *u).collect();
            format!("unknown unit in `{raw}` (accepted: {})", units.join(", "))
        } else {
            bad()
        }
    })?;
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(v * factor)
}

fn parse_lines(text: &str, origin: &Path) -> Result<Vec<(String, Entry)>, CliError> {
    let mut out: Vec<(String, Entry)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = format!("{}:{}", origin.display(), i + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(
                line,
                format!("expected `key = value` at {at}"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if key != "inherit" && kind_of(key).is_none() {
            return Err(CliError::config(key, format!("unknown key at {at}")));
        }
        if value.is_empty() {
            return Err(CliError::config(key, format!("empty value at {at}")));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(CliError::config(key, format!("duplicate key at {at}")));
        }
        out.push((
            key.to_string(),
            Entry {
                raw: value.to_string(),
                origin: origin.to_path_buf(),
                line: i + 1,
            },
        ));
    }
    Ok(out)
}

fn load_into(
    path: &Path,
    entries: &mut BTreeMap<String, Entry>,
    seen: &mut BTreeSet<PathBuf>,
) -> Result<(), CliError> {
    let canonical = fs::canonicalize(path)
        .map_err(|e| CliError::config("config", format!("cannot open {}: {e}", path.display())))?;
    if !seen.insert(canonical.clone()) {
        return Err(CliError::config(
            "inherit",
            format!("inheritance cycle through {}", path.display()),
        ));
    }
    let text = fs::read_to_string(&canonical)
        .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
    let own = parse_lines(&text, path)?;
    if let Some((_, parent)) = own.iter().find(|(k, _)| k == "inherit") {
        let dir = canonical.parent().unwrap_or(Path::new("."));
        load_into(&dir.join(&parent.raw), entries, seen)?;
    }
    // the child overrides its parent
    for (k, e) in own {
        entries.insert(k, e);
    }
    Ok(())
}
