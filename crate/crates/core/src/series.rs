//! Entire slice-regular functions as power series `f(q) = sum q^k a_k` with
//! quaternionic coefficients on the right.
//!
//! A [`SliceSeries`] is an explicit coefficient prefix plus an optional
//! closed-form generator (exponential, Gaussian, monomial or reproducing
//! kernel section) that supplies coefficients on demand. Coefficient
//! magnitudes of generators carry an external binary exponent, so evaluation far from
//! the origin works even when individual coefficients underflow `f64`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{FockError, Result};
use crate::quat::{ImaginaryUnit, Quaternion};

/// Highest degree a generator series is ever expanded to.
pub const DEGREE_CAP: usize = 512;

/// Relative tail tolerance for pointwise evaluation.
pub const TAIL_TOL: f64 = 1e-14;

/// Tail level aimed for when the degree cap allows it.
const TAIL_TARGET: f64 = 1e-17;

/// Generator terms are tabulated up to this index when bounding tails; every
/// generator decays super-exponentially well before it at admissible radii.
const TERM_LIMIT: usize = 4 * DEGREE_CAP;

/// Radius assumed by [`SliceSeries::split`] when the series is infinite.
pub const SPLIT_RADIUS: f64 = 4.0;

pub(crate) fn ln_factorial(k: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TERM_LIMIT + 1);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..=TERM_LIMIT {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    table[k]
}

/// `ln(e^a + e^b)` without overflow.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `x * 2^n` for exponents beyond the `powi` range.
pub(crate) fn ldexp(mut x: f64, mut n: i64) -> f64 {
    let big = 2f64.powi(1000);
    let small = 2f64.powi(-1000);
    while n > 1000 && x.is_finite() && x != 0.0 {
        x *= big;
        n -= 1000;
    }
    while n < -1000 && x != 0.0 {
        x *= small;
        n += 1000;
    }
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    x * 2f64.powi(n as i32)
}

/// `m * 2^e` with an unbounded binary exponent.
#[derive(Debug, Clone, Copy)]
struct Scaled {
    m: f64,
    e: i64,
}

impl Scaled {
    const ZERO: Scaled = Scaled { m: 0.0, e: 0 };
    const ONE: Scaled = Scaled { m: 1.0, e: 0 };

    fn mul(self, x: f64) -> Scaled {
        let m = self.m * x;
        if m == 0.0 {
            return Scaled::ZERO;
        }
        let a = m.abs();
        if a > 1e30 || a < 1e-30 {
            let s = a.log2().floor() as i64;
            Scaled {
                m: ldexp(m, -s),
                e: self.e + s,
            }
        } else {
            Scaled { m, e: self.e }
        }
    }

    fn add(self, o: Scaled) -> Scaled {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let e = self.e.max(o.e);
        Scaled {
            m: ldexp(self.m, self.e - e) + ldexp(o.m, o.e - e),
            e,
        }
        .mul(1.0)
    }

    fn ln(self) -> f64 {
        if self.m == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.m.abs().ln() + self.e as f64 * std::f64::consts::LN_2
        }
    }

    fn log2_floor(self) -> Option<i64> {
        (self.m != 0.0).then(|| self.m.abs().log2().floor() as i64 + self.e)
    }

    fn to_f64(self, shift: i64) -> f64 {
        ldexp(self.m, self.e - shift)
    }
}

/// Closed-form coefficient sequences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// `e^q`, `a_k = 1/k!`.
    Exp,
    /// `e^{beta q^2}`, `a_{2m} = beta^m / m!`.
    Gauss(f64),
    /// `q^k`.
    Monomial(usize),
    /// Reproducing kernel section `r -> sum alpha^k r^k conj(center)^k / k!`.
    KernelSection { center: Quaternion, alpha: f64 },
}

impl Generator {
    /// `|g_k| t^k` for `k < n`, by ratio recursion.
    fn magnitudes(&self, n: usize, t: f64) -> Vec<Scaled> {
        let mut out = Vec::with_capacity(n);
        let factorial_like = |s: f64, out: &mut Vec<Scaled>| {
            let mut c = Scaled::ONE;
            for k in 0..n {
                if k > 0 {
                    c = c.mul(s / k as f64);
                }
                out.push(c);
            }
        };
        match *self {
            Generator::Exp => factorial_like(t, &mut out),
            Generator::KernelSection { center, alpha } => {
                factorial_like(alpha * center.norm() * t, &mut out)
            }
            Generator::Gauss(beta) => {
                let s = beta.abs() * t * t;
                let mut c = Scaled::ONE;
                for k in 0..n {
                    if k % 2 == 1 {
                        out.push(Scaled::ZERO);
                        continue;
                    }
                    if k > 0 {
                        c = c.mul(s / (k / 2) as f64);
                    }
                    out.push(c);
                }
            }
            Generator::Monomial(d) => {
                for k in 0..n {
                    if k == d {
                        let mut c = Scaled::ONE;
                        for _ in 0..d {
                            c = c.mul(t);
                        }
                        out.push(c);
                    } else {
                        out.push(Scaled::ZERO);
                    }
                }
            }
        }
        out
    }

    /// Unit quaternions carrying the directions of `g_k`, `k < n`.
    fn directions(&self, n: usize) -> Vec<Quaternion> {
        match *self {
            Generator::Exp | Generator::Monomial(_) => vec![Quaternion::ONE; n],
            Generator::Gauss(beta) => (0..n)
                .map(|k| {
                    if beta < 0.0 && (k / 2) % 2 == 1 {
                        -Quaternion::ONE
                    } else {
                        Quaternion::ONE
                    }
                })
                .collect(),
            Generator::KernelSection { center, .. } => {
                let r = center.norm();
                let u = if r == 0.0 { Quaternion::ONE } else { center.conj() / r };
                let mut d = Quaternion::ONE;
                (0..n)
                    .map(|k| {
                        if k > 0 {
                            d = d * u;
                        }
                        d
                    })
                    .collect()
            }
        }
    }

    /// Last nonzero index for generators with finite support.
    fn max_degree(&self) -> Option<usize> {
        match *self {
            Generator::Monomial(d) => Some(d),
            Generator::Gauss(beta) if beta == 0.0 => Some(0),
            Generator::KernelSection { center, alpha } if alpha * center.norm() == 0.0 => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Exp => write!(f, "exp"),
            Generator::Gauss(b) => write!(f, "gauss:{b}"),
            Generator::Monomial(k) => write!(f, "mono:{k}"),
            Generator::KernelSection { center, alpha } => write!(
                f,
                "kernel-section:{},{},{},{}:{alpha}",
                center.w, center.x, center.y, center.z
            ),
        }
    }
}

/// A generator with a dilation `a_k -> r^k a_k` and a right factor.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GeneratorTerm {
    generator: Generator,
    dilation: f64,
    right: Quaternion,
}

impl GeneratorTerm {
    /// `|c_k| t^k` for the coefficients `c_k` of this term.
    fn magnitudes(&self, n: usize, t: f64) -> Vec<Scaled> {
        let r = self.right.norm();
        self.generator
            .magnitudes(n, self.dilation * t)
            .into_iter()
            .map(|s| s.mul(r))
            .collect()
    }

    /// `c_k t^k 2^{-shift}` for `k < n`.
    fn scaled(&self, n: usize, t: f64, shift: i64) -> Vec<Quaternion> {
        let unit = self.right / self.right.norm();
        self.magnitudes(n, t)
            .into_iter()
            .zip(self.generator.directions(n))
            .map(|(m, d)| {
                let v = m.to_f64(shift);
                if v == 0.0 {
                    Quaternion::ZERO
                } else {
                    d * unit * v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceSeries {
    explicit: Vec<Quaternion>,
    generator: Option<GeneratorTerm>,
}

impl SliceSeries {
    pub fn zero() -> Self {
        SliceSeries {
            explicit: Vec::new(),
            generator: None,
        }
    }

    pub fn from_coeffs(coeffs: Vec<Quaternion>) -> Self {
        SliceSeries {
            explicit: coeffs,
            generator: None,
        }
    }

    pub fn from_generator(generator: Generator) -> Self {
        SliceSeries {
            explicit: Vec::new(),
            generator: Some(GeneratorTerm {
                generator,
                dilation: 1.0,
                right: Quaternion::ONE,
            }),
        }
    }

    pub fn exp() -> Self {
        Self::from_generator(Generator::Exp)
    }

    pub fn gauss(beta: f64) -> Self {
        Self::from_generator(Generator::Gauss(beta))
    }

    pub fn monomial(k: usize) -> Self {
        Self::from_generator(Generator::Monomial(k))
    }

    /// Orthonormal basis element `sqrt(alpha^k / k!) q^k` of the second-kind
    /// Hilbert space with weight `alpha`.
    pub fn basis(k: usize, alpha: f64) -> Self {
        let c = (0.5 * (k as f64 * alpha.ln() - ln_factorial(k))).exp();
        Self::monomial(k).scale_right(Quaternion::real(c))
    }

    pub fn kernel_section(center: Quaternion, alpha: f64) -> Self {
        Self::from_generator(Generator::KernelSection { center, alpha })
    }

    /// Random polynomial of degree `degree`.
    ///
    /// Coefficients are drawn from a SplitMix64 stream seeded with `seed`:
    /// for `k = 0..=degree` and each of `w, x, y, z` in turn, one 64-bit
    /// output `u` gives the component `(u >> 11) * 2^-53 - 0.5`. Every
    /// coefficient therefore satisfies `|a_k| <= 1`.
    pub fn random(degree: usize, seed: u64) -> Self {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let mut next = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5;
        let coeffs = (0..=degree)
            .map(|_| Quaternion::new(next(), next(), next(), next()))
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Closed-form generator, if the series is an untouched generator.
    pub fn generator(&self) -> Option<Generator> {
        match self.generator {
            Some(t) if self.explicit.is_empty() && t.dilation == 1.0 && t.right == Quaternion::ONE => {
                Some(t.generator)
            }
            _ => None,
        }
    }

    fn infinite_generator(&self) -> Option<&GeneratorTerm> {
        self.generator
            .as_ref()
            .filter(|t| t.generator.max_degree().is_none())
    }

    /// Number of coefficients that can be nonzero; `None` for infinite series.
    fn support_len(&self) -> Option<usize> {
        if self.infinite_generator().is_some() {
            return None;
        }
        let g = self
            .generator
            .as_ref()
            .and_then(|t| t.generator.max_degree())
            .map_or(0, |d| d + 1);
        Some(self.explicit.len().max(g))
    }

    pub fn is_polynomial(&self) -> bool {
        self.support_len().is_some()
    }

    /// Degree of a polynomial (`None` for infinite series, `Some(0)` for zero).
    pub fn degree(&self) -> Option<usize> {
        let len = self.support_len()?;
        let c = self.coeffs_to(len.saturating_sub(1));
        Some(c.iter().rposition(|a| *a != Quaternion::ZERO).unwrap_or(0))
    }

    /// `a_k t^k 2^{-shift}` for `k < n`.
    fn scaled_coeffs(&self, n: usize, t: f64, shift: i64) -> Vec<Quaternion> {
        let mut out: Vec<Quaternion> = match &self.generator {
            Some(g) => g.scaled(n, t, shift),
            None => vec![Quaternion::ZERO; n],
        };
        let mut tk = Scaled::ONE;
        for (k, a) in self.explicit.iter().take(n).enumerate() {
            if k > 0 {
                tk = tk.mul(t);
            }
            if *a != Quaternion::ZERO {
                out[k] += *a * tk.to_f64(shift);
            }
        }
        out
    }

    /// Upper bounds on `|a_k| t^k`, `k < n`.
    fn term_magnitudes(&self, n: usize, t: f64) -> Vec<Scaled> {
        let mut out = match &self.generator {
            Some(g) => g.magnitudes(n, t),
            None => vec![Scaled::ZERO; n],
        };
        let mut tk = Scaled::ONE;
        for (k, a) in self.explicit.iter().take(n).enumerate() {
            if k > 0 {
                tk = tk.mul(t);
            }
            out[k] = out[k].add(tk.mul(a.norm()));
        }
        out
    }

    /// Coefficient `a_k` (may underflow to zero for far-out generator terms).
    pub fn coeff(&self, k: usize) -> Quaternion {
        self.scaled_coeffs(k + 1, 1.0, 0)[k]
    }

    /// Coefficients `a_0..=a_n`.
    pub fn coeffs_to(&self, n: usize) -> Vec<Quaternion> {
        self.scaled_coeffs(n + 1, 1.0, 0)
    }

    /// `ln |a_k|` for `k <= n`, finite even where `a_k` underflows.
    pub fn ln_abs_coeffs(&self, n: usize) -> Vec<f64> {
        self.term_magnitudes(n + 1, 1.0).into_iter().map(Scaled::ln).collect()
    }

    /// `ln(|a_k| r^k)` for every index that can contribute.
    pub(crate) fn ln_terms(&self, radius: f64) -> Vec<f64> {
        let len = self.support_len().unwrap_or(TERM_LIMIT + 1).max(self.explicit.len());
        self.term_magnitudes(len, radius)
            .into_iter()
            .map(Scaled::ln)
            .collect()
    }

    /// Smallest degree `D <= DEGREE_CAP` whose tail `sum_{k>D} |a_k| r^k` is
    /// below `tol * max(1, sum_k |a_k| r^k)`.
    pub fn working_degree(&self, radius: f64, tol: f64) -> Result<usize> {
        if let Some(len) = self.support_len() {
            return Ok(len.saturating_sub(1));
        }
        let terms = self.ln_terms(radius);
        let (degree, tail) = degree_for_tail(&terms, tol);
        match degree {
            Some(d) => Ok(d),
            None => Err(FockError::Truncation {
                radius,
                cap: DEGREE_CAP,
                tail,
            }),
        }
    }

    /// Truncation of `f` to `degree`, scaled for evaluation on `|q| <= radius`.
    pub fn truncation(&self, radius: f64, degree: usize) -> Truncation {
        let scale_radius = radius.max(1.0);
        let shift = self
            .term_magnitudes(degree + 1, scale_radius)
            .into_iter()
            .filter_map(Scaled::log2_floor)
            .max()
            .unwrap_or(0);
        Truncation {
            scale_radius,
            shift,
            coeffs: self.scaled_coeffs(degree + 1, scale_radius, shift),
        }
    }

    /// Truncation accurate to [`TAIL_TOL`] on the ball of the given radius.
    pub fn truncation_within(&self, radius: f64) -> Result<Truncation> {
        let d = self.working_degree(radius, TAIL_TOL)?;
        Ok(self.truncation(radius, d))
    }

    pub fn evaluate(&self, q: Quaternion) -> Result<Quaternion> {
        let r = q.norm();
        Ok(self.truncation_within(r)?.eval(q))
    }

    /// `ln |f(q)|`, usable where `|f(q)|` itself overflows.
    pub fn ln_abs_at(&self, q: Quaternion) -> Result<f64> {
        Ok(self.truncation_within(q.norm())?.ln_abs(q))
    }

    /// `f_r(q) = f(r q)`, i.e. `a_k -> r^k a_k`, for `0 < r <= 1`.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(FockError::Domain(format!("dilation factor {r} outside (0, 1]")));
        }
        let mut rk = 1.0;
        let explicit = self
            .explicit
            .iter()
            .map(|a| {
                let b = *a * rk;
                rk *= r;
                b
            })
            .collect();
        let generator = self.generator.map(|mut t| {
            t.dilation *= r;
            t
        });
        Ok(SliceSeries { explicit, generator })
    }

    /// Taylor polynomial of degree `n`.
    pub fn taylor_truncate(&self, n: usize) -> Self {
        let top = match self.support_len() {
            Some(len) => n.min(len.saturating_sub(1)),
            None => n,
        };
        if self.support_len() == Some(0) {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs_to(top))
    }

    /// `q -> f(q) c` for a quaternion `c`.
    pub fn scale_right(&self, c: Quaternion) -> Self {
        let explicit = self.explicit.iter().map(|a| *a * c).collect();
        let generator = if c == Quaternion::ZERO {
            None
        } else {
            self.generator.map(|mut t| {
                t.right = t.right * c;
                t
            })
        };
        SliceSeries { explicit, generator }
    }

    pub fn neg(&self) -> Self {
        self.scale_right(-Quaternion::ONE)
    }

    /// Sum of two series. At most one operand may carry an infinite
    /// generator unless both share the same generator and dilation.
    pub fn add(&self, other: &SliceSeries) -> Result<Self> {
        let n = self.explicit.len().max(other.explicit.len());
        let mut explicit: Vec<Quaternion> = (0..n)
            .map(|k| {
                self.explicit.get(k).copied().unwrap_or_default()
                    + other.explicit.get(k).copied().unwrap_or_default()
            })
            .collect();
        let generator = match (self.generator, other.generator) {
            (None, g) | (g, None) => g,
            (Some(a), Some(b)) => {
                if a.generator == b.generator && a.dilation == b.dilation {
                    let right = a.right + b.right;
                    if right == Quaternion::ZERO {
                        None
                    } else {
                        Some(GeneratorTerm { right, ..a })
                    }
                } else if b.generator.max_degree().is_some() {
                    fold_into(&mut explicit, &b);
                    Some(a)
                } else if a.generator.max_degree().is_some() {
                    fold_into(&mut explicit, &a);
                    Some(b)
                } else {
                    return Err(FockError::Domain(
                        "cannot add two series with different closed-form generators".into(),
                    ));
                }
            }
        };
        Ok(SliceSeries { explicit, generator })
    }

    pub fn sub(&self, other: &SliceSeries) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Applies real multipliers `a_k -> rho_k a_k`; the result is a polynomial
    /// of degree `< rho.len()`.
    pub fn apply_multipliers(&self, rho: &[f64]) -> Self {
        Self::from_coeffs(
            rho.iter()
                .enumerate()
                .map(|(k, &m)| if m == 0.0 { Quaternion::ZERO } else { self.coeff(k) * m })
                .collect(),
        )
    }

    /// Splitting on the slice `C_I`: `f_I(z) = F(z) + G(z) J`.
    ///
    /// Infinite series are expanded to the degree needed on `|z| <= SPLIT_RADIUS`.
    pub fn split(&self, unit_i: ImaginaryUnit, unit_j: ImaginaryUnit) -> Result<SplitPair> {
        self.split_within(unit_i, unit_j, SPLIT_RADIUS)
    }

    pub fn split_within(
        &self,
        unit_i: ImaginaryUnit,
        unit_j: ImaginaryUnit,
        radius: f64,
    ) -> Result<SplitPair> {
        if unit_i.dot(unit_j).abs() >= 1e-12 {
            return Err(FockError::Domain(format!(
                "J is not orthogonal to I (dot product {})",
                unit_i.dot(unit_j)
            )));
        }
        let d = self.working_degree(radius, TAIL_TOL)?;
        let ij = unit_i.as_quaternion() * unit_j.as_quaternion();
        let jq = unit_j.as_quaternion();
        let (mut f, mut g) = (Vec::with_capacity(d + 1), Vec::with_capacity(d + 1));
        for k in 0..=d {
            let a = self.coeff(k);
            let (re, im) = unit_i.coords(a);
            f.push(Complex64::new(re, im));
            g.push(Complex64::new(a.dot(jq), a.dot(ij)));
        }
        Ok(SplitPair {
            unit_i,
            unit_j,
            f,
            g,
        })
    }
}

fn fold_into(explicit: &mut Vec<Quaternion>, t: &GeneratorTerm) {
    let d = t.generator.max_degree().unwrap_or(0);
    if explicit.len() <= d {
        explicit.resize(d + 1, Quaternion::ZERO);
    }
    for (a, c) in explicit.iter_mut().zip(t.scaled(d + 1, 1.0, 0)) {
        *a += c;
    }
}

/// Finds the smallest degree whose tail is below `TAIL_TARGET` relative to
/// `max(1, total)`, falling back to the cap if that still meets `tol`. Also
/// returns the relative tail at the chosen (or capped) degree.
fn degree_for_tail(ln_terms: &[f64], tol: f64) -> (Option<usize>, f64) {
    let n = ln_terms.len();
    // suffix[k] = ln sum_{j >= k} t_j
    let mut suffix = vec![f64::NEG_INFINITY; n + 1];
    for k in (0..n).rev() {
        suffix[k] = log_add(suffix[k + 1], ln_terms[k]);
    }
    let norm = suffix[0].max(0.0);
    let target = TAIL_TARGET.min(tol).ln() + norm;
    for d in 0..n.min(DEGREE_CAP + 1) {
        if suffix[d + 1] <= target {
            return (Some(d), (suffix[d + 1] - norm).exp());
        }
    }
    let cap = DEGREE_CAP.min(n.saturating_sub(1));
    let tail = (suffix[cap + 1] - norm).exp();
    ((tail <= tol).then_some(cap), tail)
}

impl fmt::Display for SliceSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.generator(), self.support_len()) {
            (Some(g), _) => write!(f, "{g}"),
            (None, Some(len)) => write!(f, "poly(degree {})", len.saturating_sub(1)),
            (None, None) => write!(f, "series"),
        }
    }
}

/// A polynomial prepared for evaluation on `|q| <= scale_radius`:
/// `f(q) = 2^shift sum (q / R)^k b_k`.
#[derive(Debug, Clone)]
pub struct Truncation {
    scale_radius: f64,
    shift: i64,
    coeffs: Vec<Quaternion>,
}

impl Truncation {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `ln` of the factor removed from the coefficients.
    pub fn ln_scale(&self) -> f64 {
        self.shift as f64 * std::f64::consts::LN_2
    }

    /// `f(q) 2^{-shift}` by Horner's rule in `q / R`.
    pub fn eval_scaled(&self, q: Quaternion) -> Quaternion {
        let u = q / self.scale_radius;
        let mut acc = Quaternion::ZERO;
        for b in self.coeffs.iter().rev() {
            acc = *b + u * acc;
        }
        acc
    }

    pub fn eval(&self, q: Quaternion) -> Quaternion {
        let v = self.eval_scaled(q);
        Quaternion::new(
            ldexp(v.w, self.shift),
            ldexp(v.x, self.shift),
            ldexp(v.y, self.shift),
            ldexp(v.z, self.shift),
        )
    }

    /// `f(q) e^{ln_weight}`, formed without the unweighted intermediate.
    pub fn eval_weighted(&self, q: Quaternion, ln_weight: f64) -> Quaternion {
        self.eval_scaled(q) * (self.ln_scale() + ln_weight).exp()
    }

    pub fn ln_abs(&self, q: Quaternion) -> f64 {
        self.ln_scale() + self.eval_scaled(q).norm().ln()
    }
}

/// `f_I(z) = F(z) + G(z) J` with `F, G` holomorphic on `C_I`; complex numbers
/// are coordinates in the basis `{1, I}`.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub unit_i: ImaginaryUnit,
    pub unit_j: ImaginaryUnit,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
}

impl SplitPair {
    pub fn eval_f(&self, z: Complex64) -> Complex64 {
        horner(&self.f, z)
    }

    pub fn eval_g(&self, z: Complex64) -> Complex64 {
        horner(&self.g, z)
    }

    /// Reassembles `F(z) + G(z) J` as a quaternion.
    pub fn eval(&self, z: Complex64) -> Quaternion {
        let f = self.eval_f(z);
        let g = self.eval_g(z);
        self.unit_i.point(f.re, f.im) + self.unit_i.point(g.re, g.im) * self.unit_j.as_quaternion()
    }
}

/// Extends a function known on one slice `C_I` to all of `H`:
/// `f(x + J y) = 1/2 (1 - J I) f_I(x + I y) + 1/2 (1 + J I) f_I(x - I y)`
/// with `J = I_q` and `y = |Im q|`.
pub fn representation_formula(
    f_on_slice: impl Fn(Quaternion) -> Quaternion,
    unit: ImaginaryUnit,
    q: Quaternion,
) -> Quaternion {
    let (x, y) = (q.w, q.imag_norm());
    let j = q.slice_unit().unit.as_quaternion();
    let ji = j * unit.as_quaternion();
    let plus = f_on_slice(unit.point(x, y));
    let minus = f_on_slice(unit.point(x, -y));
    ((Quaternion::ONE - ji) * plus + (Quaternion::ONE + ji) * minus) * 0.5
}

/// Reads a coefficient file: one coefficient `w x y z` per line, the line
/// number being the degree.
pub fn read_coeffs(reader: impl BufRead) -> Result<SliceSeries> {
    let mut coeffs = Vec::new();
    let mut blank_run = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            blank_run += 1;
            continue;
        }
        if blank_run > 0 {
            return Err(FockError::Parse(format!(
                "line {}: blank line inside coefficient list",
                lineno
            )));
        }
        let vals: Vec<f64> = trimmed
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| FockError::Parse(format!("line {}: bad number '{t}'", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
            return Err(FockError::Parse(format!(
                "line {}: expected four finite numbers 'w x y z'",
                lineno + 1
            )));
        }
        coeffs.push(Quaternion::new(vals[0], vals[1], vals[2], vals[3]));
    }
    Ok(SliceSeries::from_coeffs(coeffs))
}

pub fn read_coeff_file(path: impl AsRef<Path>) -> Result<SliceSeries> {
    let file = std::fs::File::open(path)?;
    read_coeffs(std::io::BufReader::new(file))
}

/// Writes coefficients `0..=degree` in the coefficient file format.
pub fn write_coeffs(series: &SliceSeries, degree: usize, mut out: impl Write) -> Result<()> {
    for a in series.coeffs_to(degree) {
        writeln!(out, "{} {} {} {}", a.w, a.x, a.y, a.z)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::slice_exp;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn evaluate_examples() {
        let f = SliceSeries::monomial(3);
        let v = f.evaluate(q(0.0, 2.0, 0.0, 0.0)).unwrap();
        assert!(v.rel_dist(q(0.0, -8.0, 0.0, 0.0)) < 1e-15);

        let e = SliceSeries::exp().evaluate(Quaternion::ONE).unwrap();
        assert!((e.w - std::f64::consts::E).abs() < 2e-15);

        let f = SliceSeries::from_coeffs(vec![Quaternion::ZERO, Quaternion::J]);
        assert_eq!(f.evaluate(Quaternion::I).unwrap(), Quaternion::K);
    }

    #[test]
    fn exp_matches_complex_exponential_on_slices() {
        let u = ImaginaryUnit::new(0.3, -0.4, 1.2).unwrap();
        for &(x, y) in &[(0.5, 1.5), (-3.0, 2.0), (2.5, -2.5), (0.0, 4.0)] {
            let z = u.point(x, y);
            let got = SliceSeries::exp().evaluate(z).unwrap();
            let want = slice_exp(u, y) * x.exp();
            assert!(got.rel_dist(want) < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn horner_agrees_with_direct_summation() {
        let f = SliceSeries::exp();
        let z = q(1.0, -2.0, 0.5, 2.5);
        let direct = (0..=80).fold(Quaternion::ZERO, |acc, k| acc + z.powi(k) * f.coeff(k));
        assert!(f.evaluate(z).unwrap().rel_dist(direct) < 1e-12);
    }

    #[test]
    fn generator_coefficients_are_closed_form() {
        let e = SliceSeries::exp();
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((e.coeff(k).w * fact - 1.0).abs() < 1e-14);
        }
        let g = SliceSeries::gauss(0.25);
        assert_eq!(g.coeff(1), Quaternion::ZERO);
        assert!((g.coeff(4).w - 0.0625 / 2.0).abs() < 1e-17);
        let n = SliceSeries::gauss(-0.5);
        assert!((n.coeff(2).w + 0.5).abs() < 1e-16);
        assert!((n.coeff(4).w - 0.125).abs() < 1e-16);
    }

    #[test]
    fn far_evaluation_survives_coefficient_underflow() {
        // e^{q^2/4} at q = 20 and e^{4q} at q = 150.
        let g = SliceSeries::gauss(0.25);
        let ln = g.ln_abs_at(Quaternion::real(20.0)).unwrap();
        assert!((ln - 100.0).abs() < 1e-12, "{ln}");
        let k = SliceSeries::kernel_section(Quaternion::real(2.0), 2.0);
        let ln = k.ln_abs_at(Quaternion::real(50.0)).unwrap();
        assert!((ln - 200.0).abs() < 1e-12, "{ln}");
        let t = g.truncation(20.0, 420);
        let w = t.eval_weighted(Quaternion::real(20.0), -100.0);
        assert!(w.rel_dist(Quaternion::ONE) < 1e-13, "{w}");
    }

    #[test]
    fn truncation_error_at_degree_cap() {
        let g = SliceSeries::gauss(1.0);
        assert!(matches!(
            g.evaluate(Quaternion::real(40.0)),
            Err(FockError::Truncation { .. })
        ));
    }

    #[test]
    fn dilate_examples() {
        let f = SliceSeries::random(5, 3);
        assert_eq!(f.dilate(1.0).unwrap().coeffs_to(5), f.coeffs_to(5));
        let m = SliceSeries::monomial(2).dilate(0.5).unwrap();
        assert_eq!(m.coeff(2), Quaternion::real(0.25));
        let e = SliceSeries::exp().dilate(0.9).unwrap();
        let mut want = 1.0;
        for k in 0..15 {
            if k > 0 {
                want *= 0.9 / k as f64;
            }
            assert!((e.coeff(k).w - want).abs() < 1e-15 * want.max(1e-300) * 10.0);
        }
        assert!(f.dilate(0.0).is_err());
        assert!(f.dilate(1.5).is_err());
        let z = q(0.3, 1.1, -0.7, 0.2);
        let lhs = SliceSeries::exp().dilate(0.7).unwrap().evaluate(z).unwrap();
        let rhs = SliceSeries::exp().evaluate(z * 0.7).unwrap();
        assert!(lhs.rel_dist(rhs) < 1e-12);
    }

    #[test]
    fn taylor_truncate_examples() {
        let t = SliceSeries::exp().taylor_truncate(2);
        assert_eq!(t.degree(), Some(2));
        assert_eq!(t.coeffs_to(3), vec![Quaternion::ONE, Quaternion::ONE, Quaternion::real(0.5), Quaternion::ZERO]);
        let p = SliceSeries::random(4, 11);
        assert_eq!(p.taylor_truncate(4), p);
        assert_eq!(p.taylor_truncate(9).coeffs_to(6), p.coeffs_to(6));
    }

    #[test]
    fn split_examples() {
        let (i, j) = (ImaginaryUnit::I, ImaginaryUnit::J);
        let s = SliceSeries::exp().split(i, j).unwrap();
        assert!(s.g.iter().all(|c| c.norm() == 0.0));
        let s = SliceSeries::from_coeffs(vec![Quaternion::J]).split(i, j).unwrap();
        assert_eq!(s.f, vec![Complex64::new(0.0, 0.0)]);
        assert_eq!(s.g, vec![Complex64::new(1.0, 0.0)]);
        assert!(SliceSeries::exp().split(i, ImaginaryUnit::new(1.0, 1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn split_reassembles_on_grid() {
        let f = SliceSeries::random(9, 5);
        let i = ImaginaryUnit::new(1.0, 2.0, -0.5).unwrap();
        let j = i.perpendicular();
        let s = f.split(i, j).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                let (x, y) = (-2.0 + a as f64 * 0.2, -2.0 + b as f64 * 0.2);
                let want = f.evaluate(i.point(x, y)).unwrap();
                let got = s.eval(Complex64::new(x, y));
                assert!(got.rel_dist(want) < 1e-11);
            }
        }
    }

    #[test]
    fn representation_formula_examples() {
        let f = SliceSeries::monomial(2);
        let on_slice = |z: Quaternion| f.evaluate(z).unwrap();
        let p = q(1.0, 0.0, 1.0, 0.0);
        for unit in [ImaginaryUnit::I, ImaginaryUnit::K, ImaginaryUnit::new(1.0, 1.0, 1.0).unwrap()] {
            let got = representation_formula(on_slice, unit, p);
            assert!(got.rel_dist(p * p) < 1e-14);
        }
        let e = SliceSeries::exp();
        let on_slice = |z: Quaternion| e.evaluate(z).unwrap();
        let p = q(1.0, 0.0, 0.0, 1.0);
        let got = representation_formula(on_slice, ImaginaryUnit::I, p);
        assert!(got.rel_dist(e.evaluate(p).unwrap()) < 1e-12);
        // Same slice: collapses to f itself.
        let z = ImaginaryUnit::I.point(0.4, 1.3);
        assert!(representation_formula(on_slice, ImaginaryUnit::I, z).rel_dist(on_slice(z)) < 1e-14);
    }

    #[test]
    fn linear_combinations_keep_generators() {
        let e = SliceSeries::exp();
        let t = e.taylor_truncate(3);
        let d = e.sub(&t).unwrap();
        assert_eq!(d.coeff(2), Quaternion::ZERO);
        assert!((d.coeff(5).w - 1.0 / 120.0).abs() < 1e-17);
        assert!(e.sub(&e).unwrap().is_polynomial());
        assert!(e.add(&SliceSeries::gauss(0.1)).is_err());
        let m = e.add(&SliceSeries::monomial(3)).unwrap();
        assert!((m.coeff(3).w - (1.0 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn coefficient_file_round_trip() {
        let f = SliceSeries::random(6, 42);
        let mut buf = Vec::new();
        write_coeffs(&f, 6, &mut buf).unwrap();
        let g = read_coeffs(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(read_coeffs("1 2 3\n".as_bytes()).is_err());
        assert!(read_coeffs("1 2 3 x\n".as_bytes()).is_err());
        assert_eq!(read_coeffs("".as_bytes()).unwrap().degree(), Some(0));
    }

    #[test]
    fn random_coefficients_are_bounded_and_reproducible() {
        let a = SliceSeries::random(30, 7);
        assert_eq!(a, SliceSeries::random(30, 7));
        assert_ne!(a, SliceSeries::random(30, 8));
        for k in 0..=30 {
            assert!(a.coeff(k).norm() <= 1.0);
        }
    }

    #[test]
    fn kernel_section_real_center_is_scalar_exponential() {
        let f = SliceSeries::kernel_section(Quaternion::real(0.7), 2.0);
        let v = f.evaluate(Quaternion::real(1.3)).unwrap();
        assert!((v.w - (2.0f64 * 1.3 * 0.7).exp()).abs() < 1e-13);
        let f = SliceSeries::kernel_section(Quaternion::ZERO, 1.0);
        assert_eq!(f.evaluate(q(3.0, 1.0, 2.0, 0.0)).unwrap(), Quaternion::ONE);
    }
}
