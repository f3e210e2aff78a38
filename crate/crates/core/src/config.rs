//! Text specifications of functions, slices and operators.
//!
//! Every spec type parses from and prints to a canonical string, and
//! `parse(s.to_string()) == s` holds for every value.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::fock::SliceChoice;
use crate::operators::{fejer_op, jackson_op, taylor_op, vdp_op, MultiplierOperator};
use crate::quat::{ImaginaryUnit, Quaternion};
use crate::series::{read_coeff_file, SliceSeries};

fn parse_err(what: &str, s: &str, why: impl fmt::Display) -> FockError {
    FockError::Parse(format!("invalid {what} '{s}': {why}"))
}

fn num<T: FromStr>(what: &str, whole: &str, part: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    part.trim().parse().map_err(|e| parse_err(what, whole, e))
}

fn finite(what: &str, whole: &str, part: &str) -> Result<f64> {
    let v: f64 = num(what, whole, part)?;
    if !v.is_finite() {
        return Err(parse_err(what, whole, "value is not finite"));
    }
    Ok(v)
}

/// `"w,x,y,z"`.
pub fn parse_quaternion(s: &str) -> Result<Quaternion> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(parse_err("quaternion", s, "expected four comma-separated numbers"));
    }
    let mut c = [0.0; 4];
    for (v, p) in c.iter_mut().zip(&parts) {
        *v = finite("quaternion", s, p)?;
    }
    Ok(Quaternion::from_array(c))
}

/// Quaternions separated by `;`, each as `"w,x,y,z"`.
pub fn parse_quaternion_list(s: &str) -> Result<Vec<Quaternion>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(parse_quaternion).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Exp,
    Gauss(f64),
    Mono(usize),
    Poly(PathBuf),
    Random { degree: usize, seed: u64 },
    KernelSection { center: Quaternion, alpha: f64 },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<SliceSeries> {
        Ok(match self {
            FunctionSpec::Exp => SliceSeries::exp(),
            FunctionSpec::Gauss(b) => SliceSeries::gauss(*b),
            FunctionSpec::Mono(k) => SliceSeries::monomial(*k),
            FunctionSpec::Poly(path) => read_coeff_file(path)?,
            FunctionSpec::Random { degree, seed } => SliceSeries::random(*degree, *seed),
            FunctionSpec::KernelSection { center, alpha } => SliceSeries::kernel_section(*center, *alpha),
        })
    }
}

impl FromStr for FunctionSpec {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        let what = "function spec";
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (t, Some(r)),
            None => (s, None),
        };
        match (tag, rest) {
            ("exp", None) => Ok(FunctionSpec::Exp),
            ("gauss", Some(b)) => Ok(FunctionSpec::Gauss(finite(what, s, b)?)),
            ("mono", Some(k)) => Ok(FunctionSpec::Mono(num(what, s, k)?)),
            ("poly", Some(p)) if !p.is_empty() => Ok(FunctionSpec::Poly(PathBuf::from(p))),
            ("random", Some(r)) => {
                let (d, seed) = r
                    .split_once(':')
                    .ok_or_else(|| parse_err(what, s, "expected random:<degree>:<seed>"))?;
                Ok(FunctionSpec::Random {
                    degree: num(what, s, d)?,
                    seed: num(what, s, seed)?,
                })
            }
            ("kernel-section", Some(r)) => {
                let (c, a) = r
                    .rsplit_once(':')
                    .ok_or_else(|| parse_err(what, s, "expected kernel-section:<w,x,y,z>:<alpha>"))?;
                let alpha = finite(what, s, a)?;
                if alpha <= 0.0 {
                    return Err(parse_err(what, s, "alpha must be positive"));
                }
                Ok(FunctionSpec::KernelSection {
                    center: parse_quaternion(c)?,
                    alpha,
                })
            }
            _ => Err(parse_err(
                what,
                s,
                "expected exp, gauss:<b>, mono:<k>, poly:<path>, random:<deg>:<seed> or kernel-section:<w,x,y,z>:<alpha>",
            )),
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Exp => f.write_str("exp"),
            FunctionSpec::Gauss(b) => write!(f, "gauss:{b}"),
            FunctionSpec::Mono(k) => write!(f, "mono:{k}"),
            FunctionSpec::Poly(p) => write!(f, "poly:{}", p.display()),
            FunctionSpec::Random { degree, seed } => write!(f, "random:{degree}:{seed}"),
            FunctionSpec::KernelSection { center: c, alpha } => {
                write!(f, "kernel-section:{},{},{},{}:{alpha}", c.w, c.x, c.y, c.z)
            }
        }
    }
}

/// Slice as written by the user; vectors keep their given components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceSpec {
    I,
    J,
    K,
    Vector([f64; 3]),
    Sup(usize),
}

impl SliceSpec {
    pub fn choice(&self) -> Result<SliceChoice> {
        Ok(match *self {
            SliceSpec::I => SliceChoice::Unit(ImaginaryUnit::I),
            SliceSpec::J => SliceChoice::Unit(ImaginaryUnit::J),
            SliceSpec::K => SliceChoice::Unit(ImaginaryUnit::K),
            SliceSpec::Vector([x, y, z]) => SliceChoice::Unit(ImaginaryUnit::new(x, y, z)?),
            SliceSpec::Sup(m) => SliceChoice::Sup(m),
        })
    }

    /// The single slice named, or `i` for a sup.
    pub fn unit(&self) -> Result<ImaginaryUnit> {
        Ok(match self.choice()? {
            SliceChoice::Unit(u) => u,
            SliceChoice::Sup(_) => ImaginaryUnit::I,
        })
    }
}

impl FromStr for SliceSpec {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        let what = "slice spec";
        match s {
            "i" => return Ok(SliceSpec::I),
            "j" => return Ok(SliceSpec::J),
            "k" => return Ok(SliceSpec::K),
            _ => {}
        }
        if let Some(m) = s.strip_prefix("sup:") {
            let m: usize = num(what, s, m)?;
            if m == 0 {
                return Err(parse_err(what, s, "sup needs at least one slice"));
            }
            return Ok(SliceSpec::Sup(m));
        }
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(parse_err(what, s, "expected i, j, k, x,y,z or sup:<M>"));
        }
        let mut v = [0.0; 3];
        for (c, p) in v.iter_mut().zip(&parts) {
            *c = finite(what, s, p)?;
        }
        ImaginaryUnit::new(v[0], v[1], v[2]).map_err(|e| parse_err(what, s, e))?;
        Ok(SliceSpec::Vector(v))
    }
}

impl fmt::Display for SliceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceSpec::I => f.write_str("i"),
            SliceSpec::J => f.write_str("j"),
            SliceSpec::K => f.write_str("k"),
            SliceSpec::Vector([x, y, z]) => write!(f, "{x},{y},{z}"),
            SliceSpec::Sup(m) => write!(f, "sup:{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorSpec {
    Taylor(usize),
    Fejer(usize),
    Vdp(usize),
    Jackson { n: usize, m: usize },
}

impl OperatorSpec {
    pub fn n(&self) -> usize {
        match *self {
            OperatorSpec::Taylor(n) | OperatorSpec::Fejer(n) | OperatorSpec::Vdp(n) => n,
            OperatorSpec::Jackson { n, .. } => n,
        }
    }

    /// Same family with parameter `n`.
    pub fn with_n(&self, n: usize) -> Self {
        match *self {
            OperatorSpec::Taylor(_) => OperatorSpec::Taylor(n),
            OperatorSpec::Fejer(_) => OperatorSpec::Fejer(n),
            OperatorSpec::Vdp(_) => OperatorSpec::Vdp(n),
            OperatorSpec::Jackson { m, .. } => OperatorSpec::Jackson { n, m },
        }
    }

    /// `p` selects the kernel power of the Jackson family.
    pub fn build(&self, p: f64) -> Result<MultiplierOperator> {
        match *self {
            OperatorSpec::Taylor(n) => Ok(taylor_op(n)),
            OperatorSpec::Fejer(n) => fejer_op(n),
            OperatorSpec::Vdp(n) => vdp_op(n),
            OperatorSpec::Jackson { n, m } => jackson_op(n, m, p),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        let what = "operator spec";
        let parts: Vec<&str> = s.split(':').collect();
        let positive = |p: &str| -> Result<usize> {
            let n: usize = num(what, s, p)?;
            if n == 0 {
                return Err(parse_err(what, s, "n must be at least 1"));
            }
            Ok(n)
        };
        match parts.as_slice() {
            ["taylor", n] => Ok(OperatorSpec::Taylor(num(what, s, n)?)),
            ["fejer", n] => Ok(OperatorSpec::Fejer(positive(n)?)),
            ["vdp", n] => Ok(OperatorSpec::Vdp(positive(n)?)),
            ["jackson", n, m] => Ok(OperatorSpec::Jackson {
                n: positive(n)?,
                m: num(what, s, m)?,
            }),
            _ => Err(parse_err(
                what,
                s,
                "expected taylor:<n>, fejer:<n>, vdp:<n> or jackson:<n>:<m>",
            )),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSpec::Taylor(n) => write!(f, "taylor:{n}"),
            OperatorSpec::Fejer(n) => write!(f, "fejer:{n}"),
            OperatorSpec::Vdp(n) => write!(f, "vdp:{n}"),
            OperatorSpec::Jackson { n, m } => write!(f, "jackson:{n}:{m}"),
        }
    }
}
