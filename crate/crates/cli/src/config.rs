use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Real,
    Complex,
    Int,
    Count,
    Seed,
    Grid,
    Variant,
    Format,
    Path,
}

const KEYS: &[(&str, Kind)] = &[
    ("mu", Kind::Real),
    ("lambda1", Kind::Real),
    ("lambda2", Kind::Real),
    ("q", Kind::Complex),
    ("n", Kind::Int),
    ("epsilon", Kind::Real),
    ("grid", Kind::Grid),
    ("samples", Kind::Count),
    ("seed", Kind::Seed),
    ("t0", Kind::Real),
    ("alpha", Kind::Real),
    ("beta", Kind::Real),
    ("variant", Kind::Variant),
    ("zeros", Kind::Path),
    ("format", Kind::Format),
    ("out", Kind::Path),
];

fn kind(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kd)| *kd)
}

fn static_key(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _)| *k == key).map(|(k, _)| *k).unwrap_or("config")
}

fn bad(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { key: static_key(key).to_string(), msg: msg.into() }
}

fn parse_real(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| bad(key, format!("expected a real number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(bad(key, format!("must be finite, got {v:?}")));
    }
    Ok(x)
}

pub fn parse_complex(v: &str) -> Result<Complex64, CliError> {
    let z = Complex64::from_str(v.trim()).map_err(|_| bad("q", format!("expected a complex number like 1.5-2i, got {v:?}")))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad("q", format!("must be finite, got {v:?}")));
    }
    Ok(z)
}

/// Type and range checks shared by flags and config files.
fn check(key: &str, v: &str) -> Result<(), CliError> {
    let k = kind(key).ok_or_else(|| CliError::Config { key: key.to_string(), msg: "unknown key".into() })?;
    match k {
        Kind::Real => {
            let x = parse_real(key, v)?;
            let ok = match key {
                "mu" => x > 0.0 && x < 2.0,
                "alpha" | "beta" => x > 0.0 && x < 1.0,
                "epsilon" => x > 0.0 && x < 0.5,
                "t0" => x > std::f64::consts::E,
                _ => true,
            };
            if !ok {
                let range = match key {
                    "mu" => "(0, 2)",
                    "alpha" | "beta" => "(0, 1)",
                    "epsilon" => "(0, 0.5)",
                    _ => "(e, inf)",
                };
                return Err(bad(key, format!("must lie in {range}, got {x}")));
            }
        }
        Kind::Complex => {
            parse_complex(v)?;
        }
        Kind::Int => {
            v.parse::<i64>().map_err(|_| bad(key, format!("expected an integer, got {v:?}")))?;
        }
        Kind::Count => {
            let n: usize = v.parse().map_err(|_| bad(key, format!("expected a positive integer, got {v:?}")))?;
            if n == 0 {
                return Err(bad(key, "must be positive"));
            }
        }
        Kind::Seed => {
            v.parse::<u64>().map_err(|_| bad(key, format!("expected a nonnegative integer, got {v:?}")))?;
        }
        Kind::Grid => {
            let n: usize = v.parse().map_err(|_| bad(key, format!("expected an integer, got {v:?}")))?;
            if !(n >= 4 && n.is_power_of_two()) {
                return Err(bad(key, format!("must be a power of two of at least 4, got {n}")));
            }
        }
        Kind::Variant => {
            if v != "1" && v != "2" {
                return Err(bad(key, format!("must be 1 or 2, got {v:?}")));
            }
        }
        Kind::Format => {
            if v != "json" && v != "csv" {
                return Err(bad(key, format!("must be json or csv, got {v:?}")));
            }
        }
        Kind::Path => {
            if v.is_empty() {
                return Err(bad(key, "empty path"));
            }
        }
    }
    Ok(())
}

/// Parameters merged from defaults, an optional `key = value` file and
/// command-line overrides, in increasing precedence. Every value read through
/// a getter is recorded for the report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Config, CliError> {
    let mut values = BTreeMap::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config {
                key: "config".into(),
                msg: format!("{}: line {}: expected `key = value`", path.display(), i + 1),
            })?;
            let (k, v) = (k.trim(), v.trim());
            check(k, v)?;
            values.insert(k.to_string(), v.to_string());
        }
    }
    for (k, v) in overrides {
        check(k, v)?;
        values.insert(k.clone(), v.clone());
    }
    Ok(Config { values, used: BTreeMap::new() })
}

impl Config {
    pub fn is_set(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.used.insert(key.to_string(), v.clone());
        v
    }

    pub fn real(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.raw(key, &format!("{default}"));
        parse_real(key, &v)
    }

    pub fn optional_real(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        if self.is_set(key) {
            Ok(Some(self.real(key, 0.0)?))
        } else {
            Ok(None)
        }
    }

    pub fn complex(&mut self, key: &str, default: &str) -> Result<Complex64, CliError> {
        let v = self.raw(key, default);
        parse_complex(&v)
    }

    pub fn int(&mut self, key: &str, default: i64) -> Result<i64, CliError> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| bad(key, format!("expected an integer, got {v:?}")))
    }

    pub fn count(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        let v = self.raw(key, &default.to_string());
        v.parse().map_err(|_| bad(key, format!("expected a positive integer, got {v:?}")))
    }

    pub fn seed(&mut self) -> Result<u64, CliError> {
        let v = self.raw("seed", "0");
        v.parse().map_err(|_| bad("seed", format!("expected a nonnegative integer, got {v:?}")))
    }

    pub fn path(&mut self, key: &str) -> Result<PathBuf, CliError> {
        match self.values.get(key).cloned() {
            Some(v) => {
                self.used.insert(key.to_string(), v.clone());
                Ok(PathBuf::from(v))
            }
            None => Err(bad(key, "required")),
        }
    }

    pub fn optional_path(&mut self, key: &str) -> Option<PathBuf> {
        self.is_set(key).then(|| self.path(key).expect("key is set"))
    }

    /// Raw value without recording it, for output plumbing.
    pub fn peek(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Parameters read so far.
    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.used
    }

    pub fn record(&mut self, key: &str, value: impl Into<String>) {
        self.used.insert(key.to_string(), value.into());
    }
}
