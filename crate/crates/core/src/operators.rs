//! Convolution operators on slices as real multipliers on Taylor coefficients.
//!
//! Rotating the variable inside its own slice, `(q e^{I_q t})^k = q^k e^{I_q k t}`,
//! turns every even-kernel convolution into a diagonal action `a_k -> rho_k a_k`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::exec::Exec;
use crate::quadrature::circle_average;
use crate::quat::{slice_exp, Quaternion};
use crate::series::SliceSeries;

/// Below this `|t|` the sine ratio is taken from its Taylor expansion.
const SERIES_GUARD: f64 = 1e-6;

/// Trapezoid nodes per unit of `r n` for kernel moments.
const NODES_PER_DEGREE: usize = 8;

/// Nodes per unit of `r n` for the non-polynomial moment weight.
const MOMENT_NODES_PER_DEGREE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Fejer,
    Jackson,
}

/// `K(t) = (sin(n t/2) / sin(t/2))^{2r} / lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigKernel {
    pub family: KernelFamily,
    pub n: usize,
    pub r: usize,
    pub lambda: f64,
}

/// `sin(n t/2) / sin(t/2)`.
pub fn sin_ratio(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    if t.abs() < SERIES_GUARD {
        let x2 = 0.25 * t * t;
        let a = nf * nf - 1.0;
        let n2 = nf * nf;
        return nf
            * (1.0 - a * x2 / 6.0 + a * (3.0 * n2 - 7.0) * x2 * x2 / 360.0
                - a * (3.0 * n2 * n2 - 18.0 * n2 + 31.0) * x2 * x2 * x2 / 15120.0);
    }
    (nf * t / 2.0).sin() / (t / 2.0).sin()
}

fn check_degree(n: usize, r: usize) -> Result<()> {
    if n == 0 || r == 0 {
        return Err(FockError::Domain(format!("kernel needs n >= 1 and r >= 1, got n = {n}, r = {r}")));
    }
    Ok(())
}

/// Normalization `lambda_{n,r} = int (sin(n t/2)/sin(t/2))^{2r} dt`.
pub fn normalize_jackson(n: usize, r: usize) -> Result<f64> {
    check_degree(n, r)?;
    let nodes = moment_nodes(n, r);
    Ok(circle_average(|t| sin_ratio(n, t).powi(2 * r as i32), nodes))
}

fn moment_nodes(n: usize, r: usize) -> usize {
    (NODES_PER_DEGREE * r * n).max(64)
}

impl TrigKernel {
    pub fn fejer(n: usize) -> Result<Self> {
        check_degree(n, 1)?;
        Ok(TrigKernel {
            family: KernelFamily::Fejer,
            n,
            r: 1,
            lambda: 2.0 * PI * n as f64,
        })
    }

    pub fn jackson(n: usize, r: usize) -> Result<Self> {
        Ok(TrigKernel {
            family: KernelFamily::Jackson,
            n,
            r,
            lambda: normalize_jackson(n, r)?,
        })
    }

    /// Trigonometric degree `r (n - 1)`.
    pub fn degree(&self) -> usize {
        self.r * (self.n - 1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        sin_ratio(self.n, t).powi(2 * self.r as i32) / self.lambda
    }

    /// `rho_k = int cos(k t) K(t) dt` for `k = 0..=degree`.
    pub fn multipliers(&self, exec: Exec) -> Vec<f64> {
        let nodes = moment_nodes(self.n, self.r);
        let step = 2.0 * PI / nodes as f64;
        let samples: Vec<(f64, f64)> = (0..nodes)
            .map(|j| {
                let t = -PI + j as f64 * step;
                (t, self.eval(t))
            })
            .collect();
        exec.map(self.degree() + 1, |k| {
            let kf = k as f64;
            samples.iter().map(|&(t, v)| v * (kf * t).cos()).sum::<f64>() * step
        })
    }
}

/// `K(t)` for `t` in `[-pi, pi]`.
pub fn kernel_eval(kernel: &TrigKernel, t: f64) -> f64 {
    kernel.eval(t)
}

/// Smallest integer `r >= (p (m + 1) + 2) / 2`.
pub fn jackson_r(m: usize, p: f64) -> usize {
    let x = (p * (m as f64 + 1.0) + 2.0) / 2.0;
    // Snap values that are integers up to rounding.
    let snapped = if (x - x.round()).abs() < 1e-12 { x.round() } else { x.ceil() };
    snapped as usize
}

/// Operator that produced a multiplier sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Provenance {
    Taylor { n: usize },
    Fejer { n: usize },
    Vdp { n: usize },
    Jackson { n: usize, m: usize, r: usize },
}

impl Provenance {
    pub fn family(&self) -> &'static str {
        match self {
            Provenance::Taylor { .. } => "taylor",
            Provenance::Fejer { .. } => "fejer",
            Provenance::Vdp { .. } => "vdp",
            Provenance::Jackson { .. } => "jackson",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Provenance::Taylor { n }
            | Provenance::Fejer { n }
            | Provenance::Vdp { n }
            | Provenance::Jackson { n, .. } => n,
        }
    }

    pub fn m(&self) -> Option<usize> {
        match *self {
            Provenance::Jackson { m, .. } => Some(m),
            _ => None,
        }
    }

    pub fn r(&self) -> Option<usize> {
        match *self {
            Provenance::Jackson { r, .. } => Some(r),
            Provenance::Fejer { .. } | Provenance::Vdp { .. } => Some(1),
            Provenance::Taylor { .. } => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Provenance::Jackson { n, m, .. } => write!(f, "jackson:{n}:{m}"),
            other => write!(f, "{}:{}", other.family(), other.n()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierOperator {
    pub rho: Vec<f64>,
    pub provenance: Provenance,
    pub degree_bound: usize,
}

impl MultiplierOperator {
    pub fn apply(&self, f: &SliceSeries) -> SliceSeries {
        f.apply_multipliers(&self.rho)
    }

    /// `rho_k`, zero past the stored sequence.
    pub fn rho(&self, k: usize) -> f64 {
        self.rho.get(k).copied().unwrap_or(0.0)
    }

    /// The operator as an integral of rotated samples, evaluated at `q` by
    /// the trapezoid rule with `nodes` points. Real `q` rotate in the slice
    /// of `i`.
    pub fn direct(&self, f: &SliceSeries, q: Quaternion, nodes: usize) -> Result<Quaternion> {
        let unit = q.slice_unit().unit;
        let rotated = |k: usize, t: f64| f.evaluate(q * slice_exp(unit, k as f64 * t));
        let (fejer_n, fejer_2n, jackson) = match self.provenance {
            Provenance::Fejer { n } | Provenance::Vdp { n } => {
                (Some(TrigKernel::fejer(n)?), Some(TrigKernel::fejer(2 * n)?), None)
            }
            Provenance::Jackson { n, r, .. } => (None, None, Some(TrigKernel::jackson(n, r)?)),
            Provenance::Taylor { .. } => (None, None, None),
        };
        let step = 2.0 * PI / nodes as f64;
        let mut acc = Quaternion::ZERO;
        for j in 0..nodes {
            let t = -PI + j as f64 * step;
            acc += match (self.provenance, &fejer_n, &fejer_2n, &jackson) {
                (Provenance::Taylor { n }, ..) => {
                    let d: f64 = 1.0 + (1..=n).map(|k| 2.0 * (k as f64 * t).cos()).sum::<f64>();
                    rotated(1, t)? * (d / (2.0 * PI))
                }
                (Provenance::Fejer { .. }, Some(k), ..) => rotated(1, t)? * k.eval(t),
                (Provenance::Vdp { .. }, Some(k1), Some(k2), _) => rotated(1, t)? * (2.0 * k2.eval(t) - k1.eval(t)),
                (Provenance::Jackson { m, .. }, _, _, Some(kern)) => {
                    let mut s = Quaternion::ZERO;
                    for k in 1..=m + 1 {
                        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                        s += rotated(k, t)? * (sign * binomial(m + 1, k));
                    }
                    s * -kern.eval(t)
                }
                _ => unreachable!("kernels are built for every provenance above"),
            };
        }
        Ok(acc * step)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Multipliers of the convolution with `kernel`.
pub fn multipliers(kernel: &TrigKernel) -> Vec<f64> {
    kernel.multipliers(Exec::default())
}

/// Taylor truncation at degree `n`.
pub fn taylor_op(n: usize) -> MultiplierOperator {
    MultiplierOperator {
        rho: vec![1.0; n + 1],
        provenance: Provenance::Taylor { n },
        degree_bound: n,
    }
}

pub fn fejer_op(n: usize) -> Result<MultiplierOperator> {
    let k = TrigKernel::fejer(n)?;
    Ok(MultiplierOperator {
        rho: multipliers(&k),
        provenance: Provenance::Fejer { n },
        degree_bound: n - 1,
    })
}

/// `V_n = 2 F_{2n} - F_n`.
pub fn vdp_op(n: usize) -> Result<MultiplierOperator> {
    let wide = fejer_op(2 * n)?;
    let narrow = fejer_op(n)?;
    let rho = (0..2 * n).map(|k| 2.0 * wide.rho(k) - narrow.rho(k)).collect();
    Ok(MultiplierOperator {
        rho,
        provenance: Provenance::Vdp { n },
        degree_bound: 2 * n - 1,
    })
}

/// `I_{n,m,r}` with `r` from [`jackson_r`].
pub fn jackson_op(n: usize, m: usize, p: f64) -> Result<MultiplierOperator> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FockError::Domain(format!("jackson operator needs p >= 1, got {p}")));
    }
    let r = jackson_r(m, p);
    let kernel = TrigKernel::jackson(n, r)?;
    let c = multipliers(&kernel);
    let d = kernel.degree();
    let at = |l: usize| if l <= d { c[l] } else { 0.0 };
    let rho = (0..=d)
        .map(|j| {
            -(1..=m + 1)
                .map(|k| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(m + 1, k) * at(j * k)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(MultiplierOperator {
        rho,
        provenance: Provenance::Jackson { n, m, r },
        degree_bound: d,
    })
}

/// `int (n|t| + 1)^{(m+1)p} K_{n,r}(t) dt` with `r` from [`jackson_r`].
pub fn moment_bound(n: usize, m: usize, p: f64) -> Result<f64> {
    let r = jackson_r(m, p);
    let kernel = TrigKernel::jackson(n, r)?;
    let e = (m as f64 + 1.0) * p;
    let nodes = (MOMENT_NODES_PER_DEGREE * r * n).max(256);
    Ok(circle_average(|t| (n as f64 * t.abs() + 1.0).powf(e) * kernel.eval(t), nodes))
}
