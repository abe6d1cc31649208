//! Scenario configuration: flat `key = value` lines with `#` comments, or a
//! JSON object when the document starts with `{`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::algebra::{MasterEqCoefficients, ValidationMode};
use crate::catalog::{ClassParams, EquationClass, canonical};
use crate::evolution::GaussianParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(message: impl Into<String>) -> Self {
        Self { line: None, key: None, message: message.into() }
    }

    pub fn from_message(message: impl Into<String>) -> Self {
        Self::new(message)
    }

    fn at_key(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: Some(key.to_string()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key '{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

const COEFFICIENT_KEYS: [&str; 7] = ["gamma", "theta0", "theta1", "theta2", "eta0", "eta1", "eta2"];
const CLASS_PARAM_KEYS: [&str; 8] = ["gamma", "theta0", "omega0", "eta0", "b", "theta1", "theta2", "eta2"];
const INITIAL_KEYS: [&str; 4] = ["mu0", "kappa0", "nu0", "b0"];
const OTHER_KEYS: [&str; 10] = [
    "class",
    "t_max",
    "samples",
    "validation",
    "require_stationary",
    "scan",
    "lo",
    "hi",
    "criterion",
    "tolerance",
];

pub const REQUIRED_KEYS_HELP: &str = "coefficients: either gamma, theta0, theta1, theta2, eta0, eta1, eta2 \
     or class with gamma, theta0|omega0, eta0|b (plus theta1, theta2, eta2 where free); \
     initial state: mu0, kappa0, nu0 or b0, kappa0";

fn is_known(key: &str) -> bool {
    COEFFICIENT_KEYS.contains(&key)
        || CLASS_PARAM_KEYS.contains(&key)
        || INITIAL_KEYS.contains(&key)
        || OTHER_KEYS.contains(&key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// −Γ·Γ − 1, proportional to the stationary ν.
    StationaryNuZero,
    /// ω² = θ·θ.
    OverdampedBoundary,
    /// Smallest slack of the real two-operator CP inequalities.
    CpBoundary,
    /// Minimum of ν(t) over the trajectory scan grid.
    MinTrajNuZero,
}

impl FromStr for Criterion {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stationary_nu_zero" => Ok(Criterion::StationaryNuZero),
            "overdamped_boundary" => Ok(Criterion::OverdampedBoundary),
            "cp_boundary" => Ok(Criterion::CpBoundary),
            "min_traj_nu_zero" => Ok(Criterion::MinTrajNuZero),
            other => Err(ConfigError::at_key("criterion", format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSpec {
    pub scan: String,
    pub lo: f64,
    pub hi: f64,
    pub criterion: Criterion,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub class: Option<EquationClass>,
    /// Numeric coefficient or class-parameter keys as given.
    pub coefficient_keys: BTreeMap<String, f64>,
    pub coefficients: MasterEqCoefficients,
    pub init: Option<GaussianParams>,
    pub t_max: f64,
    pub samples: usize,
    pub validation: ValidationMode,
    pub require_stationary: bool,
    pub threshold: Option<ThresholdSpec>,
}

pub const DEFAULT_T_MAX: f64 = 20.0;
pub const DEFAULT_SAMPLES: usize = 201;
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-6;

impl ScenarioConfig {
    /// Coefficients with one scanned key replaced; validation is not applied.
    pub fn coefficients_with(&self, key: &str, value: f64) -> Result<MasterEqCoefficients, ConfigError> {
        let mut keys = self.coefficient_keys.clone();
        if !keys.contains_key(key) && !self.allows_key(key) {
            return Err(ConfigError::at_key(key, "not a scannable coefficient of this scenario"));
        }
        keys.insert(key.to_string(), value);
        build_coefficients(self.class, &keys)
    }

    fn allows_key(&self, key: &str) -> bool {
        match self.class {
            Some(_) => CLASS_PARAM_KEYS.contains(&key),
            None => COEFFICIENT_KEYS.contains(&key),
        }
    }

    pub fn init_or_err(&self) -> Result<GaussianParams, ConfigError> {
        self.init
            .ok_or_else(|| ConfigError::new("initial state required: mu0, kappa0, nu0 or b0, kappa0"))
    }
}

fn build_coefficients(
    class: Option<EquationClass>,
    keys: &BTreeMap<String, f64>,
) -> Result<MasterEqCoefficients, ConfigError> {
    match class {
        Some(class) => {
            if let Some(k) = keys.keys().find(|k| !CLASS_PARAM_KEYS.contains(&k.as_str())) {
                return Err(ConfigError::at_key(k, format!("not a parameter of class {class}")));
            }
            let get = |k: &str| keys.get(k).copied();
            let p = ClassParams {
                gamma: get("gamma"),
                theta0: get("theta0"),
                omega0: get("omega0"),
                eta0: get("eta0"),
                b: get("b"),
                theta1: get("theta1"),
                theta2: get("theta2"),
                eta2: get("eta2"),
            };
            canonical(class, &p).map_err(|e| ConfigError::at_key("class", e.to_string()))
        }
        None => {
            if let Some(k) = keys.keys().find(|k| !COEFFICIENT_KEYS.contains(&k.as_str())) {
                return Err(ConfigError::at_key(k, "only valid together with class"));
            }
            let missing: Vec<&str> = COEFFICIENT_KEYS.iter().copied().filter(|k| !keys.contains_key(*k)).collect();
            if !missing.is_empty() {
                return Err(ConfigError::new(format!(
                    "missing coefficient keys: {} (or give class)",
                    missing.join(", ")
                )));
            }
            let v = |k: &str| keys[k];
            Ok(MasterEqCoefficients::new(
                v("gamma"),
                [v("theta0"), v("theta1"), v("theta2")],
                [v("eta0"), v("eta1"), v("eta2")],
            ))
        }
    }
}

/// Ordered key/value pairs with source line numbers.
type Entries = Vec<(usize, String, String)>;

fn lex_key_values(text: &str) -> Result<Entries, ConfigError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
            line: Some(k + 1),
            key: None,
            message: format!("expected key = value, got '{line}'"),
        })?;
        out.push((k + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn lex_json(text: &str) -> Result<Entries, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError { line: Some(e.line()), key: None, message: e.to_string() })?;
    let obj = value.as_object().ok_or_else(|| ConfigError::new("JSON config must be an object"))?;
    obj.iter()
        .map(|(key, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                _ => return Err(ConfigError::at_key(key, "value must be a string, number or boolean")),
            };
            Ok((0, key.clone(), s))
        })
        .collect()
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| ConfigError::at_key(key, format!("'{value}' is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::at_key(key, "value must be finite"));
    }
    Ok(x)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, false)
}

/// Parses and validates a scenario; `force_raw` disables physical validation.
pub fn parse_config_with(text: &str, force_raw: bool) -> Result<ScenarioConfig, ConfigError> {
    let entries = if text.trim_start().starts_with('{') { lex_json(text)? } else { lex_key_values(text)? };
    if entries.is_empty() {
        return Err(ConfigError::new(format!("empty configuration; required keys: {REQUIRED_KEYS_HELP}")));
    }
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (line, key, value) in entries {
        let located = |message: String| ConfigError { line: (line > 0).then_some(line), key: Some(key.clone()), message };
        if !is_known(&key) {
            return Err(located("unknown key".into()));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(located("duplicate key".into()));
        }
    }

    let class = map.get("class").map(|s| s.parse::<EquationClass>()).transpose()
        .map_err(|e| ConfigError::at_key("class", e.to_string()))?;
    let mut coefficient_keys = BTreeMap::new();
    for k in COEFFICIENT_KEYS.iter().chain(CLASS_PARAM_KEYS.iter()) {
        if let Some(v) = map.get(*k) {
            coefficient_keys.insert(k.to_string(), number(k, v)?);
        }
    }
    let coefficients = build_coefficients(class, &coefficient_keys)?;

    let validation = if force_raw {
        ValidationMode::Raw
    } else {
        match map.get("validation").map(String::as_str) {
            None | Some("physical") => ValidationMode::Physical,
            Some("raw") => ValidationMode::Raw,
            Some(other) => {
                return Err(ConfigError::at_key("validation", format!("expected physical or raw, got '{other}'")));
            }
        }
    };
    coefficients
        .validate(validation)
        .map_err(|e| ConfigError::new(format!("{e} (use --raw to disable physical validation)")))?;

    let get = |k: &str| map.get(k).map(|v| number(k, v)).transpose();
    let init = match (get("mu0")?, get("kappa0")?, get("nu0")?, get("b0")?) {
        (None, None, None, None) => None,
        (Some(mu), Some(kappa), Some(nu), None) => Some(GaussianParams::new(mu, kappa, nu)),
        (None, Some(kappa), None, Some(b0)) => {
            if b0 <= 0.0 {
                return Err(ConfigError::at_key("b0", "must be positive"));
            }
            Some(GaussianParams::from_b0(b0, kappa))
        }
        _ => return Err(ConfigError::new("initial state needs mu0, kappa0, nu0 or b0, kappa0")),
    };
    if let Some(p) = init
        && p.mu <= 0.0
    {
        return Err(ConfigError::at_key("mu0", "must be positive"));
    }

    let t_max = get("t_max")?.unwrap_or(DEFAULT_T_MAX);
    if t_max <= 0.0 {
        return Err(ConfigError::at_key("t_max", "must be positive"));
    }
    let samples = match map.get("samples") {
        Some(v) => v.parse::<usize>().map_err(|_| ConfigError::at_key("samples", format!("'{v}' is not a count")))?,
        None => DEFAULT_SAMPLES,
    };
    if samples < 2 {
        return Err(ConfigError::at_key("samples", "must be at least 2"));
    }
    let require_stationary = match map.get("require_stationary").map(String::as_str) {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => return Err(ConfigError::at_key("require_stationary", format!("expected true or false, got '{other}'"))),
    };

    let threshold = match (map.get("scan"), map.get("criterion")) {
        (None, None) => {
            if let Some(k) = ["lo", "hi", "tolerance"].iter().find(|k| map.contains_key(**k)) {
                return Err(ConfigError::at_key(k, "only valid together with scan and criterion"));
            }
            None
        }
        (Some(scan), Some(criterion)) => {
            let lo = get("lo")?.ok_or_else(|| ConfigError::at_key("lo", "required with scan"))?;
            let hi = get("hi")?.ok_or_else(|| ConfigError::at_key("hi", "required with scan"))?;
            if lo >= hi {
                return Err(ConfigError::at_key("lo", "bracket needs lo < hi"));
            }
            let tolerance = get("tolerance")?.unwrap_or(DEFAULT_THRESHOLD_TOL);
            if tolerance <= 0.0 {
                return Err(ConfigError::at_key("tolerance", "must be positive"));
            }
            Some(ThresholdSpec { scan: scan.clone(), lo, hi, criterion: criterion.parse()?, tolerance })
        }
        _ => return Err(ConfigError::new("scan and criterion must be given together")),
    };

    let cfg = ScenarioConfig {
        class,
        coefficient_keys,
        coefficients,
        init,
        t_max,
        samples,
        validation,
        require_stationary,
        threshold,
    };
    if let Some(spec) = &cfg.threshold {
        cfg.coefficients_with(&spec.scan, spec.lo)?;
    }
    Ok(cfg)
}
