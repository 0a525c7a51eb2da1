use std::fmt::Write as _;
use std::fmt;
use std::str::FromStr;

use super::presets::resolve_preset;
use super::ExperimentError;
use crate::brownian::integer_ratio;
use crate::integrators::Scheme;
use crate::models::ProteinParams;

/// Which equation a series integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formulation {
    /// The protein equation in `x`.
    Original,
    /// The equation in `X = (1 − x)^{1/(1+λ)}`, mapped back to `x`.
    Transformed,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Original => "original",
            Formulation::Transformed => "transformed",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Formulation {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(Formulation::Original),
            "transformed" => Ok(Formulation::Transformed),
            other => Err(ExperimentError::Config(format!("unknown formulation `{other}`"))),
        }
    }
}

/// Full parameterization of one figure-style run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Preset name, `None` for a custom configuration.
    pub preset: Option<String>,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub x0: f64,
    pub h_list: Vec<f64>,
    pub t_end: f64,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub formulations: Vec<Formulation>,
    pub fixed_point_iterations: usize,
    pub reference_h: f64,
}

pub const CONFIG_KEYS: [&str; 12] = [
    "preset",
    "alpha",
    "lambda",
    "sigma",
    "x0",
    "h_list",
    "t_end",
    "seed",
    "schemes",
    "formulations",
    "fixed_point_iterations",
    "reference_h",
];

fn parse_f64(key: &str, value: &str) -> Result<f64, ExperimentError> {
    value
        .parse::<f64>()
        .map_err(|_| ExperimentError::Config(format!("`{key}`: `{value}` is not a number")))
}

fn parse_list<T>(
    key: &str,
    value: &str,
    item: impl Fn(&str) -> Result<T, ExperimentError>,
) -> Result<Vec<T>, ExperimentError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ExperimentError::Config(format!("`{key}` must not be empty")));
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub(crate) fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, ExperimentError> {
    text.lines()
        .enumerate()
        .map(|(n, line)| (n, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(n, line)| {
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ExperimentError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn protein_params(&self) -> ProteinParams {
        ProteinParams {
            alpha: self.alpha,
            lambda: self.lambda,
            sigma: self.sigma,
            x0: self.x0,
        }
    }

    pub fn preset_name(&self) -> &str {
        self.preset.as_deref().unwrap_or("custom")
    }

    /// Set one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        match key {
            "preset" => {
                self.preset = match value {
                    "" | "custom" => None,
                    name => Some(name.to_string()),
                }
            }
            "alpha" => self.alpha = parse_f64(key, value)?,
            "lambda" => self.lambda = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "x0" => self.x0 = parse_f64(key, value)?,
            "t_end" => self.t_end = parse_f64(key, value)?,
            "reference_h" => self.reference_h = parse_f64(key, value)?,
            "h_list" => self.h_list = parse_list(key, value, |s| parse_f64(key, s))?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| ExperimentError::Config(format!("`seed`: `{value}` is not a u64")))?
            }
            "fixed_point_iterations" => {
                self.fixed_point_iterations = value.parse().map_err(|_| {
                    ExperimentError::Config(format!(
                        "`fixed_point_iterations`: `{value}` is not a positive integer"
                    ))
                })?
            }
            "schemes" => {
                self.schemes = parse_list(key, value, |s| {
                    s.parse::<Scheme>()
                        .map_err(|e| ExperimentError::Config(e.to_string()))
                })?
            }
            "formulations" => self.formulations = parse_list(key, value, str::parse)?,
            other => return Err(ExperimentError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ExperimentError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ExperimentError::Config(format!("override `{assignment}` is not key=value")))?;
        if k.trim() == "preset" {
            return Err(ExperimentError::Config("the preset cannot be overridden".into()));
        }
        self.set(k.trim(), v.trim())
    }

    /// Parse a configuration document. With a `preset` key the preset's
    /// values are the starting point; otherwise every other key is
    /// required.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let pairs = parse_key_values(text)?;
        let mut seen = std::collections::BTreeSet::new();
        for (k, _) in &pairs {
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(ExperimentError::Config(format!("unknown key `{k}`")));
            }
            if !seen.insert(k.clone()) {
                return Err(ExperimentError::Config(format!("duplicate key `{k}`")));
            }
        }
        let preset = pairs
            .iter()
            .find(|(k, _)| k == "preset")
            .map(|(_, v)| v.as_str())
            .filter(|v| !v.is_empty() && *v != "custom");
        let mut config = match preset {
            Some(name) => resolve_preset(name)?,
            None => {
                let missing: Vec<&str> = CONFIG_KEYS[1..]
                    .iter()
                    .copied()
                    .filter(|k| !seen.contains(*k))
                    .collect();
                if !missing.is_empty() {
                    return Err(ExperimentError::Config(format!(
                        "custom configuration is missing {}",
                        missing.join(", ")
                    )));
                }
                ExperimentConfig::blank()
            }
        };
        for (k, v) in &pairs {
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn blank() -> Self {
        ExperimentConfig {
            preset: None,
            alpha: f64::NAN,
            lambda: f64::NAN,
            sigma: f64::NAN,
            x0: f64::NAN,
            h_list: Vec::new(),
            t_end: f64::NAN,
            seed: 0,
            schemes: Vec::new(),
            formulations: Vec::new(),
            fixed_point_iterations: 0,
            reference_h: f64::NAN,
        }
    }

    /// The document [`ExperimentConfig::parse`] reads back to `self`.
    pub fn to_text(&self) -> String {
        self.fields()
            .iter()
            .fold(String::new(), |mut out, (k, v)| {
                let _ = writeln!(out, "{k} = {v}");
                out
            })
    }

    pub(crate) fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("preset", self.preset_name().to_string()),
            ("alpha", self.alpha.to_string()),
            ("lambda", self.lambda.to_string()),
            ("sigma", self.sigma.to_string()),
            ("x0", self.x0.to_string()),
            ("h_list", join(&self.h_list)),
            ("t_end", self.t_end.to_string()),
            ("seed", self.seed.to_string()),
            ("schemes", join(&self.schemes)),
            ("formulations", join(&self.formulations)),
            ("fixed_point_iterations", self.fixed_point_iterations.to_string()),
            ("reference_h", self.reference_h.to_string()),
        ]
    }

    /// Number of reference steps, checking that every step size nests.
    pub fn reference_steps(&self) -> Result<usize, ExperimentError> {
        integer_ratio(self.t_end, self.reference_h).ok_or_else(|| {
            ExperimentError::Config(format!(
                "reference_h = {} does not divide t_end = {}",
                self.reference_h, self.t_end
            ))
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        for (k, v) in [
            ("alpha", self.alpha),
            ("lambda", self.lambda),
            ("sigma", self.sigma),
            ("x0", self.x0),
            ("t_end", self.t_end),
            ("reference_h", self.reference_h),
        ] {
            if !v.is_finite() {
                return bad(format!("`{k}` must be finite, got {v}"));
            }
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.sigma < 0.0 {
            return bad(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return bad(format!("x0 must lie in (0, 1), got {}", self.x0));
        }
        if !(self.t_end > 0.0) || !(self.reference_h > 0.0) {
            return bad("t_end and reference_h must be positive".into());
        }
        if self.fixed_point_iterations == 0 {
            return bad("fixed_point_iterations must be >= 1".into());
        }
        if self.h_list.is_empty() || self.schemes.is_empty() || self.formulations.is_empty() {
            return bad("h_list, schemes and formulations must be non-empty".into());
        }
        if self.formulations.contains(&Formulation::Transformed) && !(self.lambda > -1.0) {
            return bad(format!(
                "the transformed formulation needs lambda > -1, got {}",
                self.lambda
            ));
        }
        self.reference_steps()?;
        for &h in &self.h_list {
            if integer_ratio(h, self.reference_h).is_none() {
                return bad(format!(
                    "h = {h} is not an integer multiple of reference_h = {}",
                    self.reference_h
                ));
            }
            if integer_ratio(self.t_end, h).is_none() {
                return bad(format!("h = {h} does not divide t_end = {}", self.t_end));
            }
        }
        Ok(())
    }
}
