//! Fock norms of the first kind (over `H`) and second kind (over a slice),
//! inner products, pointwise growth bounds and order/type estimates.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::exec::Exec;
use crate::quadrature::{QuadSettings, QuadratureGrid, RadialRule};
use crate::quat::{sphere_grid, ImaginaryUnit, Quaternion};
use crate::series::{log_add, SliceSeries, Truncation, DEGREE_CAP};

/// Default number of slices sampled for the second-kind sup over `S`.
pub const DEFAULT_SUP_SAMPLES: usize = 32;

/// Tail terms are dropped once their contribution is below this fraction of
/// the full-series bound.
const WEIGHTED_TAIL_TARGET: f64 = 1e-15;

/// A norm is rejected when its truncation bound exceeds this fraction of it.
const TAIL_REJECT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    First,
    Second,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::First => "first",
            Kind::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceChoice {
    Unit(ImaginaryUnit),
    /// Max over `sphere_grid(M)`.
    Sup(usize),
}

impl Default for SliceChoice {
    fn default() -> Self {
        SliceChoice::Unit(ImaginaryUnit::I)
    }
}

impl fmt::Display for SliceChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceChoice::Sup(m) => write!(f, "sup:{m}"),
            SliceChoice::Unit(u) if *u == ImaginaryUnit::I => f.write_str("i"),
            SliceChoice::Unit(u) if *u == ImaginaryUnit::J => f.write_str("j"),
            SliceChoice::Unit(u) if *u == ImaginaryUnit::K => f.write_str("k"),
            SliceChoice::Unit(u) => {
                let [x, y, z] = u.components();
                write!(f, "{x},{y},{z}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub kind: Kind,
    pub p: f64,
    pub alpha: f64,
    pub slice: SliceChoice,
    pub quad: QuadSettings,
}

impl NormSpec {
    pub fn second(p: f64, alpha: f64, unit: ImaginaryUnit) -> Self {
        NormSpec {
            kind: Kind::Second,
            p,
            alpha,
            slice: SliceChoice::Unit(unit),
            quad: QuadSettings::default(),
        }
    }

    pub fn first(p: f64, alpha: f64) -> Self {
        NormSpec {
            kind: Kind::First,
            p,
            alpha,
            slice: SliceChoice::default(),
            quad: QuadSettings::default(),
        }
    }

    pub fn with_quad(self, quad: QuadSettings) -> Self {
        NormSpec { quad, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(FockError::Domain(format!("p = {} must be positive and finite", self.p)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(FockError::Domain(format!("alpha = {} must be positive", self.alpha)));
        }
        if let SliceChoice::Sup(0) = self.slice {
            return Err(FockError::Domain("sup over zero slices".into()));
        }
        self.quad.validate()
    }

    fn prefactor(&self) -> f64 {
        let c = self.alpha * self.p / (2.0 * PI);
        match self.kind {
            Kind::First => c * c,
            Kind::Second => c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub radial: usize,
    pub angular: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sphere: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: Kind,
    pub p: f64,
    pub alpha: f64,
    pub slice: String,
    pub value: f64,
    pub grid: GridInfo,
    pub tail_bound: f64,
}

/// Degree at which the Gaussian-weighted tail is negligible on the nodes of
/// `rule`, with `ln sum_i W_i (tail_i e^{-alpha r_i^2 / 2})^p` at that degree
/// and at degree `-1` (the whole series).
fn weighted_degree(
    f: &SliceSeries,
    rule: &RadialRule,
    alpha: f64,
    p: f64,
    exec: Exec,
    ln_target: Option<f64>,
) -> (usize, f64, f64) {
    if let Some(d) = f.degree() {
        return (d, f64::NEG_INFINITY, 0.0);
    }
    // suffix[i][k] = ln sum_{j >= k} |a_j| r_i^j
    let suffixes = exec.map(rule.nodes.len(), |i| {
        let terms = f.ln_terms(rule.nodes[i]);
        let mut s = vec![f64::NEG_INFINITY; terms.len() + 1];
        for k in (0..terms.len()).rev() {
            s[k] = log_add(s[k + 1], terms[k]);
        }
        s
    });
    let ln_sum = |k: usize| {
        suffixes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let r = rule.nodes[i];
                rule.weights[i].ln() + p * (s[k.min(s.len() - 1)] - 0.5 * alpha * r * r)
            })
            .fold(f64::NEG_INFINITY, log_add)
    };
    let full = ln_sum(0);
    let target = ln_target.unwrap_or(full + p * WEIGHTED_TAIL_TARGET.ln());
    for d in 0..=DEGREE_CAP {
        let t = ln_sum(d + 1);
        if t <= target {
            return (d, t, full);
        }
    }
    (DEGREE_CAP, ln_sum(DEGREE_CAP + 1), full)
}

/// Rejects series whose Gaussian-weighted modulus does not decay between
/// half the outermost node radius and the outermost radius.
fn divergence_gate(f: &SliceSeries, alpha: f64, unit: ImaginaryUnit, r_out: f64) -> Result<()> {
    if f.is_polynomial() {
        return Ok(());
    }
    let probe = |r: f64| -> Option<f64> {
        let t = f.truncation_within(r).ok()?;
        let n = 64;
        let best = (0..n)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n as f64;
                t.ln_abs(unit.point(r * th.cos(), r * th.sin()))
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Some(best - 0.5 * alpha * r * r)
    };
    let mut r = r_out.max(1.0);
    for _ in 0..60 {
        if let (Some(inner), Some(outer)) = (probe(0.5 * r), probe(r)) {
            if outer >= inner {
                return Err(FockError::NotInSpace(format!(
                    "weighted modulus does not decay: ln(|f| e^(-alpha r^2/2)) = {inner:.3} at r = {:.3}, {outer:.3} at r = {r:.3}",
                    0.5 * r
                )));
            }
            return Ok(());
        }
        r *= 0.8;
    }
    Err(FockError::NotInSpace(
        "series cannot be evaluated at any probe radius".into(),
    ))
}

struct Prepared {
    degree: usize,
    ln_tail: f64,
    ln_full: f64,
}

fn prepare(
    f: &SliceSeries,
    rule: &RadialRule,
    alpha: f64,
    p: f64,
    unit: ImaginaryUnit,
    exec: Exec,
) -> Result<Prepared> {
    divergence_gate(f, alpha, unit, rule.max_node())?;
    let (degree, ln_tail, ln_full) = weighted_degree(f, rule, alpha, p, exec, None);
    Ok(Prepared {
        degree,
        ln_tail,
        ln_full,
    })
}

fn finish(value_pow: f64, ln_tail: f64, pref: f64, measure: f64, p: f64) -> Result<(f64, f64)> {
    let value = (pref * value_pow).powf(1.0 / p);
    let tail = if ln_tail == f64::NEG_INFINITY {
        0.0
    } else {
        (pref * measure * ln_tail.exp()).powf(1.0 / p)
    };
    if !value.is_finite() {
        return Err(FockError::IntegrandOverflow {
            node: Quaternion::ZERO,
            value,
        });
    }
    if tail > TAIL_REJECT * value {
        return Err(FockError::Truncation {
            radius: f64::NAN,
            cap: DEGREE_CAP,
            tail,
        });
    }
    Ok((value, tail))
}

fn overflow(value: f64, node: Quaternion) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(FockError::IntegrandOverflow { node, value })
    }
}

/// Raises the degree when the first pass shows the tail is large against the
/// integral itself, as happens when low coefficients cancel.
fn refine<F>(
    f: &SliceSeries,
    rule: &RadialRule,
    alpha: f64,
    p: f64,
    exec: Exec,
    prep: Prepared,
    measure: f64,
    integrate: F,
) -> Result<(f64, f64)>
where
    F: Fn(usize) -> Result<f64>,
{
    let value = integrate(prep.degree)?;
    let ln_ok = value.ln() - measure.ln() + p * TAIL_REJECT.ln();
    if prep.ln_tail <= ln_ok || prep.degree >= DEGREE_CAP || value <= 0.0 {
        return Ok((value, prep.ln_tail));
    }
    let target = value.ln() - measure.ln() + p * (1e-3 * TAIL_REJECT).ln();
    let (degree, ln_tail, _) = weighted_degree(f, rule, alpha, p, exec, Some(target));
    Ok((integrate(degree)?, ln_tail))
}

/// `int_{C_I} (|f| e^{-alpha |z|^2/2})^p dA` and the weighted tail bound.
fn slice_integral(
    f: &SliceSeries,
    p: f64,
    alpha: f64,
    unit: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<(f64, f64)> {
    let grid = QuadratureGrid::slice(0.5 * alpha * p, quad.radial, quad.angular)?;
    let prep = prepare(f, &grid.radial, alpha, p, unit, quad.exec)?;
    let integrate = |degree: usize| -> Result<f64> {
        let rows = quad.exec.try_map(grid.radial.nodes.len(), |i| {
            let r = grid.radial.nodes[i];
            let t = f.truncation(r, degree);
            let lw = -0.5 * alpha * r * r;
            let mut acc = 0.0;
            for &(th, w) in &grid.angular {
                let z = unit.point(r * th.cos(), r * th.sin());
                acc += w * overflow(t.eval_weighted(z, lw).norm().powf(p), z)?;
            }
            Ok::<_, FockError>(grid.radial.weights[i] * acc)
        })?;
        Ok(rows.iter().sum())
    };
    refine(f, &grid.radial, alpha, p, quad.exec, prep, 2.0 * PI, integrate)
}

/// Weighted values on the half-plane point `z = x + I y` and its conjugate,
/// reduced to `f(x + u y) e^{-w} = A + u B`.
fn axial_parts(t: &Truncation, unit: ImaginaryUnit, x: f64, y: f64, lw: f64) -> (Quaternion, Quaternion) {
    let fz = t.eval_weighted(unit.point(x, y), lw);
    let fzb = t.eval_weighted(unit.point(x, -y), lw);
    let a = (fz + fzb) * 0.5;
    let b = unit.as_quaternion() * (fzb - fz) * 0.5;
    (a, b)
}

/// `int_H (|f| e^{-alpha |q|^2/2})^p dm` and the weighted tail bound.
fn volume_integral(f: &SliceSeries, p: f64, alpha: f64, quad: &QuadSettings) -> Result<(f64, f64)> {
    let grid = QuadratureGrid::volume(0.5 * alpha * p, quad.radial, quad.angular, quad.sphere)?;
    let unit = ImaginaryUnit::I;
    let prep = prepare(f, &grid.radial, alpha, p, unit, quad.exec)?;
    let integrate = |degree: usize| -> Result<f64> {
        let rows = quad.exec.try_map(grid.radial.nodes.len(), |i| {
            let r = grid.radial.nodes[i];
            let t = f.truncation(r, degree);
            let lw = -0.5 * alpha * r * r;
            let mut acc = 0.0;
            for &(th, wt) in &grid.angular {
                let (x, y) = (r * th.cos(), r * th.sin());
                let (a, b) = axial_parts(&t, unit, x, y, lw);
                let mut inner = 0.0;
                for &(u, ws) in &grid.sphere {
                    let v = a + u.as_quaternion() * b;
                    inner += ws * overflow(v.norm().powf(p), u.point(x, y))?;
                }
                acc += wt * inner;
            }
            Ok::<_, FockError>(grid.radial.weights[i] * acc)
        })?;
        Ok(rows.iter().sum())
    };
    refine(f, &grid.radial, alpha, p, quad.exec, prep, 2.0 * PI * PI, integrate)
}

/// Degree at which the slice norm of `f` truncates its series.
pub fn slice_norm_degree(f: &SliceSeries, p: f64, alpha: f64, unit: ImaginaryUnit, quad: &QuadSettings) -> Result<usize> {
    let grid = QuadratureGrid::slice(0.5 * alpha * p, quad.radial, quad.angular)?;
    Ok(prepare(f, &grid.radial, alpha, p, unit, quad.exec)?.degree)
}

/// Slice quadrature nodes `z`, weights `W` (including the prefactor) and
/// weighted values `f(z) e^{-alpha |z|^2 / 2}`, so that
/// `||f||^p = sum W |value|^p`.
pub struct SliceSamples {
    pub nodes: Vec<Quaternion>,
    pub weights: Vec<f64>,
    pub values: Vec<Quaternion>,
}

pub fn slice_samples(f: &SliceSeries, p: f64, alpha: f64, unit: ImaginaryUnit, quad: &QuadSettings) -> Result<SliceSamples> {
    let spec = NormSpec::second(p, alpha, unit).with_quad(*quad);
    spec.validate()?;
    let grid = QuadratureGrid::slice(0.5 * alpha * p, quad.radial, quad.angular)?;
    let prep = prepare(f, &grid.radial, alpha, p, unit, quad.exec)?;
    let pref = spec.prefactor();
    let rows = quad.exec.try_map(grid.radial.nodes.len(), |i| {
        let r = grid.radial.nodes[i];
        let t = f.truncation(r, prep.degree);
        let lw = -0.5 * alpha * r * r;
        grid.angular
            .iter()
            .map(|&(th, w)| {
                let z = unit.point(r * th.cos(), r * th.sin());
                let v = t.eval_weighted(z, lw);
                overflow(v.norm(), z)?;
                Ok((z, pref * grid.radial.weights[i] * w, v))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = SliceSamples {
        nodes: Vec::new(),
        weights: Vec::new(),
        values: Vec::new(),
    };
    for (z, w, v) in rows.into_iter().flatten() {
        out.nodes.push(z);
        out.weights.push(w);
        out.values.push(v);
    }
    Ok(out)
}

fn slice_norm(f: &SliceSeries, spec: &NormSpec, unit: ImaginaryUnit) -> Result<(f64, f64)> {
    let (v, lt) = slice_integral(f, spec.p, spec.alpha, unit, &spec.quad)?;
    finish(v, lt, spec.prefactor(), 2.0 * PI, spec.p)
}

pub fn norm(f: &SliceSeries, spec: &NormSpec) -> Result<NormReport> {
    spec.validate()?;
    let (value, tail_bound, slice, sphere) = match spec.kind {
        Kind::First => {
            let (v, lt) = volume_integral(f, spec.p, spec.alpha, &spec.quad)?;
            let (value, tail) = finish(v, lt, spec.prefactor(), 2.0 * PI * PI, spec.p)?;
            (value, tail, "none".to_string(), Some(spec.quad.sphere))
        }
        Kind::Second => match spec.slice {
            SliceChoice::Unit(u) => {
                let (value, tail) = slice_norm(f, spec, u)?;
                (value, tail, spec.slice.to_string(), None)
            }
            SliceChoice::Sup(m) => {
                let mut best = (0.0f64, 0.0f64);
                for u in sphere_grid(m) {
                    let (v, t) = slice_norm(f, spec, u)?;
                    if v > best.0 {
                        best = (v, t);
                    }
                    best.1 = best.1.max(t);
                }
                (best.0, best.1, spec.slice.to_string(), None)
            }
        },
    };
    Ok(NormReport {
        kind: spec.kind,
        p: spec.p,
        alpha: spec.alpha,
        slice,
        value,
        grid: GridInfo {
            radial: spec.quad.radial,
            angular: spec.quad.angular,
            sphere,
        },
        tail_bound,
    })
}

pub fn norm_value(f: &SliceSeries, spec: &NormSpec) -> Result<f64> {
    norm(f, spec).map(|r| r.value)
}

fn add_pairwise(acc: &mut [Quaternion], vals: &[Quaternion], w: f64) {
    let n = vals.len();
    for a in 0..n {
        let ca = vals[a].conj() * w;
        for b in 0..n {
            acc[a * n + b] += ca * vals[b];
        }
    }
}

fn gram_prepare(
    fs: &[SliceSeries],
    rule: &RadialRule,
    alpha: f64,
    unit: ImaginaryUnit,
    exec: Exec,
) -> Result<Vec<usize>> {
    let mut degrees = Vec::with_capacity(fs.len());
    for f in fs {
        let prep = prepare(f, rule, alpha, 2.0, unit, exec)?;
        let rel_tail = (0.5 * (prep.ln_tail - prep.ln_full)).exp();
        if rel_tail > TAIL_REJECT {
            return Err(FockError::Truncation {
                radius: rule.max_node(),
                cap: DEGREE_CAP,
                tail: rel_tail,
            });
        }
        degrees.push(prep.degree);
    }
    Ok(degrees)
}

fn reshape(flat: Vec<Quaternion>, n: usize) -> Vec<Vec<Quaternion>> {
    flat.chunks(n).map(|c| c.to_vec()).collect()
}

/// Matrix `G[a][b] = <f_a, f_b>` in the second-kind Hilbert space on `C_I`,
/// with `<f, g> = (alpha/pi) int conj(f) g e^{-alpha |z|^2} dA`.
pub fn gram_second(
    fs: &[SliceSeries],
    alpha: f64,
    unit: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<Vec<Vec<Quaternion>>> {
    quad.validate()?;
    let n = fs.len();
    let grid = QuadratureGrid::slice(alpha, quad.radial, quad.angular)?;
    let degrees = gram_prepare(fs, &grid.radial, alpha, unit, quad.exec)?;
    let rows = quad.exec.try_map(grid.radial.nodes.len(), |i| {
        let r = grid.radial.nodes[i];
        let lw = -0.5 * alpha * r * r;
        let ts: Vec<Truncation> = fs.iter().zip(&degrees).map(|(f, d)| f.truncation(r, *d)).collect();
        let mut acc = vec![Quaternion::ZERO; n * n];
        let mut vals = vec![Quaternion::ZERO; n];
        for &(th, w) in &grid.angular {
            let z = unit.point(r * th.cos(), r * th.sin());
            for (v, t) in vals.iter_mut().zip(&ts) {
                *v = t.eval_weighted(z, lw);
                overflow(v.norm(), z)?;
            }
            add_pairwise(&mut acc, &vals, w);
        }
        Ok::<_, FockError>((grid.radial.weights[i], acc))
    })?;
    let mut total = vec![Quaternion::ZERO; n * n];
    for (w, acc) in rows {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a * w;
        }
    }
    let c = alpha / PI;
    Ok(reshape(total.into_iter().map(|q| q * c).collect(), n))
}

/// Matrix `G[a][b] = <f_a, f_b>` in the first-kind Hilbert space,
/// `<f, g> = (alpha/pi)^2 int_H conj(f) g e^{-alpha |q|^2} dm`.
///
/// With `f(x + u y) = A + u B` the sphere average of `conj(f) g` is
/// `conj(A_f) A_g + conj(B_f) B_g`, so the `u` integral is done exactly.
pub fn gram_first(fs: &[SliceSeries], alpha: f64, quad: &QuadSettings) -> Result<Vec<Vec<Quaternion>>> {
    quad.validate()?;
    let n = fs.len();
    let unit = ImaginaryUnit::I;
    let grid = QuadratureGrid::volume(alpha, quad.radial, quad.angular, 1)?;
    let degrees = gram_prepare(fs, &grid.radial, alpha, unit, quad.exec)?;
    let rows = quad.exec.try_map(grid.radial.nodes.len(), |i| {
        let r = grid.radial.nodes[i];
        let lw = -0.5 * alpha * r * r;
        let ts: Vec<Truncation> = fs.iter().zip(&degrees).map(|(f, d)| f.truncation(r, *d)).collect();
        let mut acc = vec![Quaternion::ZERO; n * n];
        let mut av = vec![Quaternion::ZERO; n];
        let mut bv = vec![Quaternion::ZERO; n];
        for &(th, w) in &grid.angular {
            let (x, y) = (r * th.cos(), r * th.sin());
            for k in 0..n {
                let (a, b) = axial_parts(&ts[k], unit, x, y, lw);
                overflow(a.norm() + b.norm(), unit.point(x, y))?;
                av[k] = a;
                bv[k] = b;
            }
            add_pairwise(&mut acc, &av, w);
            add_pairwise(&mut acc, &bv, w);
        }
        Ok::<_, FockError>((grid.radial.weights[i], acc))
    })?;
    let mut total = vec![Quaternion::ZERO; n * n];
    for (w, acc) in rows {
        for (t, a) in total.iter_mut().zip(acc) {
            *t += a * w;
        }
    }
    let c = (alpha / PI).powi(2) * 4.0 * PI;
    Ok(reshape(total.into_iter().map(|q| q * c).collect(), n))
}

pub fn inner_second(
    f: &SliceSeries,
    g: &SliceSeries,
    alpha: f64,
    unit: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<Quaternion> {
    Ok(gram_second(&[f.clone(), g.clone()], alpha, unit, quad)?[0][1])
}

pub fn inner_first(f: &SliceSeries, g: &SliceSeries, alpha: f64, quad: &QuadSettings) -> Result<Quaternion> {
    Ok(gram_first(&[f.clone(), g.clone()], alpha, quad)?[0][1])
}

/// Constant `c` of the pointwise estimate `|f(q)| <= c e^{alpha |q|^2 / 2} ||f||`.
pub fn growth_constant(kind: Kind, p: f64, alpha: f64) -> f64 {
    match kind {
        Kind::First => 4.0 * (2.0 * PI / (alpha * p)).powf(1.0 / p),
        Kind::Second => 4.0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthBoundReport {
    pub constant: f64,
    pub norm: f64,
    pub max_ratio: f64,
    pub samples: usize,
    pub violations: Vec<Quaternion>,
}

impl GrowthBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `|f(q)| e^{-alpha |q|^2/2} / ||f|| <= c` on the sample points.
pub fn growth_bound_check(f: &SliceSeries, spec: &NormSpec, samples: &[Quaternion]) -> Result<GrowthBoundReport> {
    let nrm = norm_value(f, spec)?;
    let constant = growth_constant(spec.kind, spec.p, spec.alpha);
    let mut max_ratio: f64 = 0.0;
    let mut violations = Vec::new();
    if nrm > 0.0 {
        for &q in samples {
            let ln = f.ln_abs_at(q)?;
            let ratio = (ln - 0.5 * spec.alpha * q.norm_sqr() - nrm.ln()).exp();
            max_ratio = max_ratio.max(ratio);
            if ratio > constant {
                violations.push(q);
            }
        }
    }
    Ok(GrowthBoundReport {
        constant,
        norm: nrm,
        max_ratio,
        samples: samples.len(),
        violations,
    })
}

/// `||f||_{p,alpha,I} / ||f||_{p,alpha,J}`.
pub fn slice_norm_ratio(
    f: &SliceSeries,
    p: f64,
    alpha: f64,
    unit_i: ImaginaryUnit,
    unit_j: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<f64> {
    let num = norm_value(f, &NormSpec::second(p, alpha, unit_i).with_quad(*quad))?;
    let den = norm_value(f, &NormSpec::second(p, alpha, unit_j).with_quad(*quad))?;
    if den == 0.0 {
        return Err(FockError::UndefinedRatio);
    }
    Ok(num / den)
}

/// Upper bound for the slice-norm ratio: `2` for `p >= 1`, `2^{1/p}` below.
pub fn slice_ratio_bound(p: f64) -> f64 {
    if p >= 1.0 {
        2.0
    } else {
        2f64.powf(1.0 / p)
    }
}

/// `||h||_{p,alpha} / ||h||_{2,beta}` (first kind), for `0 < beta < alpha`.
pub fn embedding_check(h: &SliceSeries, beta: f64, alpha: f64, p: f64, quad: &QuadSettings) -> Result<f64> {
    if !(beta > 0.0 && beta < alpha) {
        return Err(FockError::Domain(format!("need 0 < beta < alpha, got beta = {beta}, alpha = {alpha}")));
    }
    let num = norm_value(h, &NormSpec::first(p, alpha).with_quad(*quad))?;
    let den = norm_value(h, &NormSpec::first(2.0, beta).with_quad(*quad))?;
    if den == 0.0 {
        return Err(FockError::UndefinedRatio);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub order: f64,
    #[serde(rename = "type")]
    pub type_estimate: Option<f64>,
    pub radii: Vec<f64>,
    pub ln_max_modulus: Vec<f64>,
    pub residual: f64,
}

/// Geometric radius grid `r_0 q^j`, `j < count`, ending at `r_max`.
pub fn geometric_radii(r_min: f64, r_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![r_max];
    }
    let ratio = (r_max / r_min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|j| r_min * ratio.powi(j as i32)).collect()
}

pub fn default_radii() -> Vec<f64> {
    geometric_radii(1.0, 32.0, 16)
}

/// `ln M_f(r)` over `theta in [0, pi]` and 16 slice directions; `None` when
/// the series cannot be evaluated at that radius.
fn ln_max_modulus(f: &SliceSeries, r: f64) -> Option<f64> {
    let t = f.truncation_within(r).ok()?;
    let dirs = sphere_grid(16);
    let n = 33;
    let mut best = f64::NEG_INFINITY;
    for j in 0..n {
        let th = PI * j as f64 / (n - 1) as f64;
        for u in &dirs {
            best = best.max(t.ln_abs(u.point(r * th.cos(), r * th.sin())));
        }
    }
    best.is_finite().then_some(best)
}

/// Order `rho = lim log log M(r) / log r` from the least-squares slope over the
/// outer half of the usable radii; type `median(log M(r) / r^2)` when the order
/// is within 0.1 of 2.
pub fn order_type(f: &SliceSeries, radii: &[f64]) -> Result<GrowthReport> {
    let mut rs = Vec::new();
    let mut lm = Vec::new();
    for &r in radii {
        if let Some(v) = ln_max_modulus(f, r) {
            rs.push(r);
            lm.push(v);
        }
    }
    if rs.is_empty() {
        return Err(FockError::RadiusGridTooLarge);
    }
    let start = rs.len() / 2;
    let pts: Vec<(f64, f64)> = (start..rs.len())
        .filter(|&j| lm[j] > 0.0)
        .map(|j| (rs[j].ln(), lm[j].ln()))
        .collect();
    let (order, residual) = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let res = (pts
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        (slope, res)
    } else {
        (0.0, 0.0)
    };
    let type_estimate = if (order - 2.0).abs() <= 0.1 {
        let mut v: Vec<f64> = (start..rs.len()).map(|j| lm[j] / (rs[j] * rs[j])).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = v.len();
        Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
    } else {
        None
    };
    Ok(GrowthReport {
        order,
        type_estimate,
        radii: rs,
        ln_max_modulus: lm,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_volume;

    fn fact(k: usize) -> f64 {
        (1..=k).map(|j| j as f64).product()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn monomial_norm_oracles() {
        for &alpha in &[0.5, 1.0, 2.0] {
            for k in [0usize, 1, 3, 7, 12] {
                let f = SliceSeries::monomial(k);
                let s = norm_value(&f, &NormSpec::second(2.0, alpha, ImaginaryUnit::J)).unwrap();
                assert!(rel(s * s, fact(k) / alpha.powi(k as i32)) < 1e-12, "second k={k}");
                let v = norm_value(&f, &NormSpec::first(2.0, alpha)).unwrap();
                assert!(rel(v * v, fact(k + 1) / alpha.powi(k as i32)) < 1e-11, "first k={k}");
            }
        }
    }

    #[test]
    fn zero_and_closed_forms() {
        let spec = NormSpec::second(2.0, 1.0, ImaginaryUnit::I);
        assert_eq!(norm_value(&SliceSeries::zero(), &spec).unwrap(), 0.0);
        // ||exp||^2 = sum k!/(k!)^2 = e
        let e = norm_value(&SliceSeries::exp(), &spec).unwrap();
        assert!(rel(e * e, std::f64::consts::E) < 1e-13);
        // ||e^{q^2/4}||^2 = sum (2m)!/(16^m (m!)^2) = 1/sqrt(1 - 1/4)
        let g = norm_value(&SliceSeries::gauss(0.25), &spec).unwrap();
        assert!(rel(g * g, 1.0 / 0.75f64.sqrt()) < 1e-12);
    }

    #[test]
    fn lp_norm_of_monomial_matches_gamma_integral() {
        // (alpha p / 2 pi) 2 pi int r^{kp+1} e^{-alpha p r^2/2} dr
        //   = (alpha p/2) Gamma(kp/2 + 1) / (alpha p/2)^{kp/2+1}
        let gamma = |s: f64| -> f64 {
            // Lanczos-free: product form for s in (0, 20) via recursion to (1, 2).
            let mut v = 1.0;
            let mut x = s;
            while x > 2.0 {
                x -= 1.0;
                v *= x;
            }
            // integrate t^{x-1} e^{-t} on [0, 60] by Simpson with substitution t = u^2
            let n = 200_000;
            let h = (60f64).sqrt() / n as f64;
            let g = |u: f64| 2.0 * u.powf(2.0 * x - 1.0) * (-u * u).exp();
            let mut s = g(0.0) + g(n as f64 * h);
            for i in 1..n {
                s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            v * s * h / 3.0
        };
        for &(k, p, alpha) in &[(1usize, 1.0, 1.0), (2, 3.0, 0.7), (3, 1.5, 2.0)] {
            let c = alpha * p / 2.0;
            let s = k as f64 * p / 2.0 + 1.0;
            let want = (c * gamma(s) / c.powf(s)).powf(1.0 / p);
            let got = norm_value(&SliceSeries::monomial(k), &NormSpec::second(p, alpha, ImaginaryUnit::K)).unwrap();
            assert!(rel(got, want) < 1e-9, "k={k} p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn gaussian_above_threshold_is_not_in_space() {
        let spec = NormSpec::second(2.0, 1.0, ImaginaryUnit::I);
        assert!(matches!(
            norm(&SliceSeries::gauss(0.6), &spec),
            Err(FockError::NotInSpace(_))
        ));
        assert!(matches!(
            norm(&SliceSeries::gauss(0.5), &NormSpec::first(2.0, 1.0)),
            Err(FockError::NotInSpace(_))
        ));
        assert!(norm(&SliceSeries::gauss(0.45), &spec).is_ok());
    }

    #[test]
    fn orthonormal_basis_and_inner_products() {
        let quad = QuadSettings::default();
        let alpha = 1.5;
        let basis: Vec<SliceSeries> = (0..6).map(|k| SliceSeries::basis(k, alpha)).collect();
        let u = ImaginaryUnit::new(1.0, 1.0, 1.0).unwrap();
        let g = gram_second(&basis, alpha, u, &quad).unwrap();
        for (a, row) in g.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let want = if a == b { Quaternion::ONE } else { Quaternion::ZERO };
                assert!((*v - want).norm() < 1e-12, "({a},{b}) {v}");
            }
        }
        // <e_k, f> = sqrt(k!/alpha^k) a_k
        let f = SliceSeries::random(5, 9);
        for k in 0..6 {
            let got = inner_second(&basis[k], &f, alpha, u, &quad).unwrap();
            let want = f.coeff(k) * (fact(k) / alpha.powi(k as i32)).sqrt();
            assert!((got - want).norm() < 1e-12);
        }
        let ff = inner_second(&f, &f, alpha, u, &quad).unwrap();
        let n = norm_value(&f, &NormSpec::second(2.0, alpha, u)).unwrap();
        assert!(rel(ff.w, n * n) < 1e-12 && ff.imag().norm() < 1e-12);
    }

    #[test]
    fn first_kind_gram_structure() {
        let quad = QuadSettings::default();
        let alpha = 1.0;
        let mons: Vec<SliceSeries> = (0..9).map(SliceSeries::monomial).collect();
        let g = gram_first(&mons, alpha, &quad).unwrap();
        for m in 0..9usize {
            for n in 0..9 {
                let d = m.abs_diff(n);
                let v = g[m][n];
                if d == 0 {
                    assert!(rel(v.w, fact(m + 1)) < 1e-11);
                } else if d == 2 {
                    let lo = m.min(n);
                    let want = -fact(lo + 2) / (2.0 * alpha.powi(lo as i32 + 1));
                    assert!(rel(v.w, want) < 1e-11, "({m},{n}) {v}");
                } else {
                    assert!(v.norm() < 1e-9, "({m},{n}) {v}");
                }
            }
        }
    }

    #[test]
    fn gram_first_matches_direct_volume_integral() {
        let alpha = 1.2;
        let f = SliceSeries::random(3, 1);
        let g = SliceSeries::random(4, 2);
        let got = inner_first(&f, &g, alpha, &QuadSettings::default()).unwrap();
        let grid = QuadratureGrid::volume(alpha, 32, 32, 128).unwrap();
        let c = (alpha / PI).powi(2);
        let comp = |sel: fn(Quaternion) -> f64| {
            integrate_volume(
                |q| {
                    let v = f.evaluate(q).unwrap().conj() * g.evaluate(q).unwrap();
                    sel(v) * (-alpha * q.norm_sqr()).exp()
                },
                &grid,
                Exec::Parallel,
            )
            .unwrap()
                * c
        };
        let want = Quaternion::new(comp(|v| v.w), comp(|v| v.x), comp(|v| v.y), comp(|v| v.z));
        assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn first_kind_lp_norm_matches_direct_volume_integral() {
        let alpha = 0.9;
        let p = 3.0;
        let f = SliceSeries::random(4, 5);
        let got = norm_value(&f, &NormSpec::first(p, alpha)).unwrap();
        let grid = QuadratureGrid::volume(alpha * p / 2.0, 64, 64, 64).unwrap();
        let v = integrate_volume(
            |q| (f.evaluate(q).unwrap().norm() * (-0.5 * alpha * q.norm_sqr()).exp()).powf(p),
            &grid,
            Exec::Parallel,
        )
        .unwrap();
        let want = ((alpha * p / (2.0 * PI)).powi(2) * v).powf(1.0 / p);
        assert!(rel(got, want) < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn slice_ratio_examples() {
        let quad = QuadSettings::default();
        let (i, j) = (ImaginaryUnit::I, ImaginaryUnit::J);
        let r = slice_norm_ratio(&SliceSeries::exp(), 1.5, 1.0, i, j, &quad).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let f = SliceSeries::from_coeffs(vec![Quaternion::ONE, Quaternion::J]);
        let r = slice_norm_ratio(&f, 1.0, 1.0, i, j, &quad).unwrap();
        assert!((0.5..=2.0).contains(&r));
        assert!(matches!(
            slice_norm_ratio(&SliceSeries::zero(), 2.0, 1.0, i, j, &quad),
            Err(FockError::UndefinedRatio)
        ));
    }

    #[test]
    fn embedding_ratio_for_monomials() {
        let quad = QuadSettings::default();
        let (alpha, beta) = (1.0, 0.6);
        for k in 0..5 {
            let r = embedding_check(&SliceSeries::monomial(k), beta, alpha, 2.0, &quad).unwrap();
            assert!(rel(r * r, (beta / alpha).powi(k as i32)) < 1e-11);
        }
    }

    #[test]
    fn growth_bound_examples() {
        let samples: Vec<Quaternion> = (0..50)
            .map(|j| {
                let t = j as f64 * 0.37;
                Quaternion::new(t.cos() * 2.0, t.sin(), (2.0 * t).cos(), 0.5)
            })
            .collect();
        let spec = NormSpec::second(2.0, 1.0, ImaginaryUnit::I);
        let rep = growth_bound_check(&SliceSeries::monomial(0), &spec, &samples).unwrap();
        assert!(rep.passed() && (rep.max_ratio - (-0.0f64).exp()).abs() <= 1.0);
        let spec = NormSpec::first(2.0, 1.0);
        let rep = growth_bound_check(&SliceSeries::exp(), &spec, &samples).unwrap();
        assert!(rep.passed());
        assert!((rep.constant - 4.0 * PI.sqrt()).abs() < 1e-14);
        let rep = growth_bound_check(&SliceSeries::zero(), &spec, &samples).unwrap();
        assert!(rep.passed() && rep.max_ratio == 0.0);
    }

    #[test]
    fn order_type_examples() {
        let r = order_type(&SliceSeries::exp(), &default_radii()).unwrap();
        assert!((r.order - 1.0).abs() < 0.05, "{}", r.order);
        let g = order_type(&SliceSeries::gauss(0.25), &default_radii()).unwrap();
        assert!((g.order - 2.0).abs() < 0.05, "{}", g.order);
        let t = g.type_estimate.unwrap();
        assert!((t - 0.25).abs() < 0.01, "{t}");
        let p = order_type(&SliceSeries::random(6, 3), &default_radii()).unwrap();
        assert!(p.order < 0.6 && p.type_estimate.is_none());
        assert!(matches!(
            order_type(&SliceSeries::gauss(50.0), &[100.0, 200.0]),
            Err(FockError::RadiusGridTooLarge)
        ));
    }

    #[test]
    fn sup_norm_brackets_slice_norms() {
        let f = SliceSeries::random(4, 17);
        let mut spec = NormSpec::second(2.0, 1.0, ImaginaryUnit::I);
        let single = norm_value(&f, &spec).unwrap();
        spec.slice = SliceChoice::Sup(DEFAULT_SUP_SAMPLES);
        let rep = norm(&f, &spec).unwrap();
        assert!(rep.value >= single && rep.value <= 2.0 * single);
        assert_eq!(rep.slice, "sup:32");
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let f = SliceSeries::exp();
        let mut spec = NormSpec::first(3.0, 1.0);
        spec.quad.exec = Exec::Sequential;
        let a = norm_value(&f, &spec).unwrap();
        spec.quad.exec = Exec::Parallel;
        let b = norm_value(&f, &spec).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
