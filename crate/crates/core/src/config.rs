//! Plain-text parameter files: one `key = value [unit]` entry per line,
//! `#` starts a comment. Unknown keys, duplicate keys and unknown units are
//! errors that name the offending line.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::ModelError;
use crate::params::{DerivedQuantities, DrivenMode, ModeRates, SystemConfig};

/// The shipped default parameter set.
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.conf");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: unit '{unit}' is not valid for '{key}'")]
    BadUnit { line: usize, key: String, unit: String },
    #[error("line {line}: duplicate key '{key}'")]
    Duplicate { line: usize, key: String },
    #[error("override '{spec}': {message}")]
    Override { spec: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(String),
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Mass,
    AngularFrequency,
    Length,
    Power,
    Temperature,
    Dimensionless,
    Text,
}

fn unit_factor(dim: Dim, unit: &str) -> Option<f64> {
    let two_pi = 2.0 * PI;
    Some(match (dim, unit) {
        (Dim::Mass, "kg") => 1.0,
        (Dim::Mass, "g") => 1e-3,
        (Dim::Mass, "mg") => 1e-6,
        (Dim::Mass, "ug" | "µg") => 1e-9,
        (Dim::Mass, "ng") => 1e-12,
        (Dim::Mass, "pg") => 1e-15,
        (Dim::Mass, "fg") => 1e-18,
        (Dim::AngularFrequency, "rad/s" | "1/s" | "s^-1") => 1.0,
        (Dim::AngularFrequency, "Hz") => two_pi,
        (Dim::AngularFrequency, "kHz") => two_pi * 1e3,
        (Dim::AngularFrequency, "MHz") => two_pi * 1e6,
        (Dim::AngularFrequency, "GHz") => two_pi * 1e9,
        (Dim::Length, "m") => 1.0,
        (Dim::Length, "cm") => 1e-2,
        (Dim::Length, "mm") => 1e-3,
        (Dim::Length, "um" | "µm") => 1e-6,
        (Dim::Length, "nm") => 1e-9,
        (Dim::Length, "pm") => 1e-12,
        (Dim::Power, "W") => 1.0,
        (Dim::Power, "mW") => 1e-3,
        (Dim::Power, "uW" | "µW") => 1e-6,
        (Dim::Power, "nW") => 1e-9,
        (Dim::Power, "pW") => 1e-12,
        (Dim::Power, "fW") => 1e-15,
        (Dim::Temperature, "K") => 1.0,
        (Dim::Temperature, "mK") => 1e-3,
        (Dim::Temperature, "uK" | "µK") => 1e-6,
        (Dim::Dimensionless, "1") => 1.0,
        _ => return None,
    })
}

fn system_key(key: &str) -> Option<Dim> {
    Some(match key {
        "m" => Dim::Mass,
        "omega_m" => Dim::AngularFrequency,
        "Q_m" | "r_m" | "t_m" | "finesse" => Dim::Dimensionless,
        "lambda" | "L" => Dim::Length,
        "T" => Dim::Temperature,
        "I_0" => Dim::Power,
        "driven_mode" => Dim::Text,
        _ => return None,
    })
}

fn rate_key(key: &str) -> Option<Dim> {
    Some(match key {
        "omega_m" | "gamma_m" | "omega_s" | "g0" | "gamma_c" | "gamma_d" => Dim::AngularFrequency,
        "Q_m" | "n_th" | "c_bar" => Dim::Dimensionless,
        "driven_mode" => Dim::Text,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Entry {
    Num(f64),
    Text(String),
}

/// Parsed key/value entries in SI units.
#[derive(Debug, Clone, Default)]
struct Entries(BTreeMap<String, Entry>);

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Split `value [unit]`; also accepts a unit glued to the number (`5nW`).
fn split_value_unit(rhs: &str) -> (String, Option<String>) {
    let rhs = rhs.trim();
    let mut parts = rhs.split_whitespace();
    let first = parts.next().unwrap_or("").to_string();
    let rest: Vec<&str> = parts.collect();
    if !rest.is_empty() {
        return (first, Some(rest.join(" ")));
    }
    if first.parse::<f64>().is_ok() {
        return (first, None);
    }
    // Longest numeric prefix.
    for cut in (1..first.len()).rev() {
        if first.is_char_boundary(cut) && first[..cut].parse::<f64>().is_ok() {
            return (first[..cut].to_string(), Some(first[cut..].to_string()));
        }
    }
    (first, None)
}

/// Parse a quantity like `3 cm` or `1e-9` for the given system parameter, into SI.
pub fn parse_quantity(key: &str, text: &str) -> Result<f64, String> {
    let dim = system_key(key)
        .or_else(|| rate_key(key))
        .ok_or_else(|| format!("unknown parameter '{key}'"))?;
    match parse_value(dim, key, text, 0) {
        Ok(Entry::Num(x)) => Ok(x),
        Ok(Entry::Text(_)) => Err(format!("'{key}' is not numeric")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_value(dim: Dim, key: &str, rhs: &str, line: usize) -> Result<Entry, ConfigError> {
    if dim == Dim::Text {
        let v = rhs.trim();
        if v.is_empty() || v.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line, message: format!("'{key}' expects a single word") });
        }
        return Ok(Entry::Text(v.to_string()));
    }
    let (num, unit) = split_value_unit(rhs);
    let value: f64 = num.parse().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("cannot parse '{num}' as a number for '{key}'"),
    })?;
    let factor = match unit {
        None => 1.0,
        Some(u) => unit_factor(dim, &u)
            .ok_or(ConfigError::BadUnit { line, key: key.to_string(), unit: u })?,
    };
    Ok(Entry::Num(value * factor))
}

fn parse_line(
    raw: &str,
    line: usize,
    lookup: fn(&str) -> Option<Dim>,
) -> Result<Option<(String, Entry)>, ConfigError> {
    let body = strip_comment(raw);
    if body.is_empty() {
        return Ok(None);
    }
    let (key, rhs) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
        line,
        message: format!("expected 'key = value [unit]', got '{body}'"),
    })?;
    let key = key.trim();
    if key.is_empty() || rhs.trim().is_empty() {
        return Err(ConfigError::Syntax { line, message: "empty key or value".into() });
    }
    let dim = lookup(key).ok_or_else(|| ConfigError::UnknownKey { line, key: key.into() })?;
    Ok(Some((key.to_string(), parse_value(dim, key, rhs, line)?)))
}

fn parse_entries(
    text: &str,
    overrides: &[String],
    lookup: fn(&str) -> Option<Dim>,
) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if let Some((key, value)) = parse_line(raw, line, lookup)? {
            // r_m and t_m describe the same quantity.
            let canon = if key == "t_m" { "r_m".to_string() } else { key.clone() };
            if map.contains_key(&canon) {
                return Err(ConfigError::Duplicate { line, key });
            }
            let value = match (key.as_str(), value) {
                ("t_m", Entry::Num(t)) => Entry::Num((1.0 - t * t).sqrt()),
                (_, v) => v,
            };
            map.insert(canon, value);
        }
    }
    for spec in overrides {
        let parsed = parse_line(spec, 0, lookup).map_err(|e| ConfigError::Override {
            spec: spec.clone(),
            message: e.to_string().trim_start_matches("line 0: ").to_string(),
        })?;
        match parsed {
            Some((key, value)) => {
                let (key, value) = match (key.as_str(), value) {
                    ("t_m", Entry::Num(t)) => ("r_m".to_string(), Entry::Num((1.0 - t * t).sqrt())),
                    (_, v) => (key, v),
                };
                map.insert(key, value);
            }
            None => {
                return Err(ConfigError::Override { spec: spec.clone(), message: "empty override".into() })
            }
        }
    }
    Ok(Entries(map))
}

impl Entries {
    fn num(&self, key: &str) -> Result<f64, ConfigError> {
        match self.0.get(key) {
            Some(Entry::Num(x)) => Ok(*x),
            Some(Entry::Text(_)) => Err(ConfigError::Syntax { line: 0, message: format!("'{key}' must be numeric") }),
            None => Err(ConfigError::Missing(key.to_string())),
        }
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.0.contains_key(key) {
            self.num(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn drive(&self) -> Result<DrivenMode, ConfigError> {
        match self.0.get("driven_mode") {
            None => Ok(DrivenMode::Common),
            Some(Entry::Text(t)) => t
                .parse()
                .map_err(|message| ConfigError::Syntax { line: 0, message }),
            Some(Entry::Num(_)) => Err(ConfigError::Syntax { line: 0, message: "driven_mode must be a word".into() }),
        }
    }
}

/// Parse a physical system config, applying `key=value [unit]` overrides
/// after the file.
pub fn parse_system_config(text: &str, overrides: &[String]) -> Result<SystemConfig, ConfigError> {
    let e = parse_entries(text, overrides, system_key)?;
    let config = SystemConfig {
        mass: e.num("m")?,
        omega_m: e.num("omega_m")?,
        q_m: e.num("Q_m")?,
        wavelength: e.num("lambda")?,
        cavity_length: e.num("L")?,
        r_m: e.num("r_m")?,
        finesse: e.num("finesse")?,
        temperature: e.num("T")?,
        input_power: e.num("I_0")?,
        driven_mode: e.drive()?,
    };
    config.validate()?;
    Ok(config)
}

/// Canonical SI rendering of a config; its hash identifies runs.
pub fn render_system_config(c: &SystemConfig) -> String {
    format!(
        "m = {:e} kg\nomega_m = {:e} rad/s\nQ_m = {:e}\nlambda = {:e} m\nL = {:e} m\nr_m = {:e}\n\
         finesse = {:e}\nT = {:e} K\nI_0 = {:e} W\ndriven_mode = {}\n",
        c.mass, c.omega_m, c.q_m, c.wavelength, c.cavity_length, c.r_m, c.finesse,
        c.temperature, c.input_power, c.driven_mode
    )
}

/// Dimensionless or rate-level model given directly by its rates, bypassing
/// the optical geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub rates: ModeRates,
}

impl RateConfig {
    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities::from_rates(self.rates, None)
    }

    pub fn render(&self) -> String {
        let r = &self.rates;
        format!(
            "omega_m = {:e}\ngamma_m = {:e}\nn_th = {:e}\nomega_s = {:e}\ng0 = {:e}\ngamma_c = {:e}\n\
             gamma_d = {:e}\nc_bar = {:e}\ndriven_mode = {}\n",
            r.omega_m, r.gamma_m, r.n_th, r.omega_s, r.g0, r.gamma_c, r.gamma_d, r.c_bar, r.drive
        )
    }
}

/// Parse a rate-level config (`omega_m`, `omega_s`, `g0`, `gamma_c`, `gamma_d`,
/// `c_bar`, `n_th`, and one of `gamma_m` / `Q_m`).
pub fn parse_rate_config(text: &str, overrides: &[String]) -> Result<RateConfig, ConfigError> {
    let e = parse_entries(text, overrides, rate_key)?;
    let omega_m = e.num("omega_m")?;
    let gamma_m = match (e.opt_num("gamma_m")?, e.opt_num("Q_m")?) {
        (Some(g), None) => g,
        (None, Some(q)) => omega_m / q,
        (None, None) => 0.0,
        (Some(_), Some(_)) => {
            return Err(ConfigError::Syntax { line: 0, message: "give either gamma_m or Q_m, not both".into() })
        }
    };
    let rates = ModeRates {
        omega_m,
        gamma_m,
        n_th: e.opt_num("n_th")?.unwrap_or(0.0),
        omega_s: e.num("omega_s")?,
        g0: e.num("g0")?,
        gamma_c: e.num("gamma_c")?,
        gamma_d: e.num("gamma_d")?,
        c_bar: e.num("c_bar")?,
        drive: e.drive()?,
    };
    for (name, v) in [("omega_m", rates.omega_m), ("omega_s", rates.omega_s), ("gamma_c", rates.gamma_c), ("gamma_d", rates.gamma_d)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::InvalidParameter(format!("{name} must be positive, got {v}")).into());
        }
    }
    for (name, v) in [("gamma_m", rates.gamma_m), ("n_th", rates.n_th), ("g0", rates.g0), ("c_bar", rates.c_bar)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(ModelError::InvalidParameter(format!("{name} must be non-negative, got {v}")).into());
        }
    }
    Ok(RateConfig { rates })
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn short_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
