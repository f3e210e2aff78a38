//! Experiment configuration with a canonical TOML form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use slice_fock::config::{FunctionSpec, OperatorSpec, SliceSpec};
use slice_fock::exec::Exec;
use slice_fock::fock::Kind;
use slice_fock::quadrature::{QuadSettings, DEFAULT_ANGULAR, DEFAULT_RADIAL, DEFAULT_SPHERE};
use slice_fock::{FockError, Quaternion, Result};

/// Serde through `Display` / `FromStr`.
mod text {
    use super::*;

    pub fn serialize<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<T, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod opt_text {
    use super::*;

    pub fn serialize<T: fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_str(v),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> std::result::Result<Option<T>, D::Error>
    where
        T: FromStr,
        T::Err: fmt::Display,
        D: Deserializer<'de>,
    {
        let s = Option::<String>::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norm,
    Converge,
    Multipliers,
    Smoothness,
    Bestapprox,
    Growth,
    KernelFit,
}

impl Command {
    pub fn needs_function(self) -> bool {
        self != Command::Multipliers
    }

    pub fn default_format(self) -> Format {
        match self {
            Command::Norm | Command::Growth => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub radial: usize,
    pub angular: usize,
    pub sphere: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            radial: DEFAULT_RADIAL,
            angular: DEFAULT_ANGULAR,
            sphere: DEFAULT_SPHERE,
        }
    }
}

fn default_p() -> f64 {
    2.0
}

fn default_alpha() -> f64 {
    1.0
}

fn default_kind() -> Kind {
    Kind::Second
}

fn default_order() -> usize {
    1
}

fn default_h_grid() -> usize {
    8
}

fn default_tol() -> f64 {
    slice_fock::approx::DESCENT_TOL
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(rename = "fn", default, with = "opt_text", skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_kind")]
    pub kind: Kind,
    #[serde(with = "text", default = "default_slice")]
    pub slice: SliceSpec,
    #[serde(rename = "op", default, with = "opt_text", skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    /// Sweep values of the degree parameter.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    /// Smoothness order.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta: Vec<f64>,
    #[serde(default = "default_h_grid")]
    pub h_grid: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default, skip_serializing_if = "is_default")]
    pub exec: Exec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

fn default_slice() -> SliceSpec {
    SliceSpec::I
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            function: None,
            p: default_p(),
            alpha: default_alpha(),
            kind: default_kind(),
            slice: default_slice(),
            operator: None,
            n: Vec::new(),
            order: default_order(),
            delta: Vec::new(),
            h_grid: default_h_grid(),
            tol: default_tol(),
            centers: Vec::new(),
            radii: Vec::new(),
            quad: QuadConfig::default(),
            exec: Exec::default(),
            out: None,
            format: None,
        }
    }

    /// Parses the TOML form; unknown keys are errors.
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(s).map_err(|e| FockError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Canonical TOML form.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("every field has a TOML form")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FockError::Parse(m));
        if self.command.needs_function() && self.function.is_none() {
            return bad(format!("command '{}' needs a function (--fn)", self.command_name()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p = {} must be positive", self.p));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if self.quad.radial == 0 || self.quad.angular == 0 || self.quad.sphere == 0 {
            return bad("quadrature sizes must be positive".into());
        }
        if self.delta.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("step bounds must be finite and nonnegative".into());
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return bad("radii must be positive".into());
        }
        if self.centers.iter().flatten().any(|c| !c.is_finite()) {
            return bad("centers must be finite".into());
        }
        match self.command {
            Command::Converge | Command::Multipliers if self.operator.is_none() => {
                bad(format!("command '{}' needs an operator (--op)", self.command_name()))
            }
            Command::KernelFit if self.centers.is_empty() => bad("kernel-fit needs --centers".into()),
            _ => Ok(()),
        }
    }

    pub fn command_name(&self) -> String {
        toml::Value::try_from(self.command)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }

    pub fn quad_settings(&self) -> QuadSettings {
        QuadSettings {
            radial: self.quad.radial,
            angular: self.quad.angular,
            sphere: self.quad.sphere,
            exec: self.exec,
        }
    }

    pub fn center_quaternions(&self) -> Vec<Quaternion> {
        self.centers.iter().map(|c| Quaternion::from_array(*c)).collect()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }
}
