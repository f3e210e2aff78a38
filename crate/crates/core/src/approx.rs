//! Moduli of smoothness, best polynomial approximation and the two
//! convergence estimates for convolution operators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::fock::{gram_first, norm_value, slice_norm_degree, slice_samples, GridInfo, NormSpec};
use crate::linalg::solve_hermitian;
use crate::operators::{binomial, jackson_op, vdp_op};
use crate::quadrature::QuadSettings;
use crate::quat::{slice_exp, ImaginaryUnit, Quaternion};
use crate::series::{ln_factorial, log_add, SliceSeries, DEGREE_CAP};

/// Iteration cap of the `L^p` descent.
pub const DESCENT_MAX_ITER: usize = 10_000;

/// Default relative objective tolerance of the `L^p` descent.
pub const DESCENT_TOL: f64 = 1e-8;

/// Relative floor on residual moduli in the reweighted direction.
const IRLS_FLOOR: f64 = 1e-9;

/// Coefficient index up to which Parseval sums are carried.
const PARSEVAL_LIMIT: usize = 4 * DEGREE_CAP;

/// Differences below this fraction of the function norm count as zero.
const ZERO_REL: f64 = 1e-12;

/// `sum_{s=0}^{k} (-1)^{k+s} C(k, s) f(z e^{I s h})`.
pub fn finite_difference(f: &SliceSeries, k: usize, h: f64, z: Quaternion, unit: ImaginaryUnit) -> Result<Quaternion> {
    let mut acc = Quaternion::ZERO;
    for s in 0..=k {
        let sign = if (k + s) % 2 == 0 { 1.0 } else { -1.0 };
        acc += f.evaluate(z * slice_exp(unit, s as f64 * h))? * (sign * binomial(k, s));
    }
    Ok(acc)
}

/// Polynomial whose restriction to `C_I` is `Delta_h^k f` up to degree
/// `degree`: `b_j = (e^{I j h} - 1)^k a_j`.
pub fn difference_series(f: &SliceSeries, k: usize, h: f64, unit: ImaginaryUnit, degree: usize) -> SliceSeries {
    let coeffs = f
        .coeffs_to(degree)
        .into_iter()
        .enumerate()
        .map(|(j, a)| (slice_exp(unit, j as f64 * h) - Quaternion::ONE).powi(k) * a)
        .collect();
    SliceSeries::from_coeffs(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusQuery {
    pub k: usize,
    pub delta: f64,
    pub p: f64,
    pub alpha: f64,
    pub unit: ImaginaryUnit,
    pub h_grid: usize,
    pub quad: QuadSettings,
}

impl ModulusQuery {
    pub fn new(k: usize, delta: f64, p: f64, alpha: f64, unit: ImaginaryUnit) -> Self {
        ModulusQuery {
            k,
            delta,
            p,
            alpha,
            unit,
            h_grid: 8,
            quad: QuadSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(FockError::Domain("modulus order must be at least 1".into()));
        }
        if !(self.delta >= 0.0 && self.delta <= PI) {
            return Err(FockError::Domain(format!("step bound {} outside [0, pi]", self.delta)));
        }
        if self.h_grid < 8 {
            return Err(FockError::Domain(format!("h grid of {} points, need at least 8", self.h_grid)));
        }
        NormSpec::second(self.p, self.alpha, self.unit).with_quad(self.quad).validate()
    }

    fn spec(&self) -> NormSpec {
        NormSpec::second(self.p, self.alpha, self.unit).with_quad(self.quad)
    }
}

/// `(int_{C_I} |Delta_h^k f|^p e^{-p alpha |z|^2/2} dA)^{1/p}` without the
/// norm prefactor.
pub fn weighted_difference_norm(f: &SliceSeries, q: &ModulusQuery, h: f64) -> Result<f64> {
    let degree = slice_norm_degree(f, q.p, q.alpha, q.unit, &q.quad)?;
    let d = difference_series(f, q.k, h, q.unit, degree);
    let spec = q.spec();
    let pref = (q.alpha * q.p / (2.0 * PI)).powf(1.0 / q.p);
    Ok(norm_value(&d, &spec)? / pref)
}

/// `omega_k(f; delta)` as a max over `h = j delta / h_grid`, `|j| <= h_grid`.
pub fn modulus(f: &SliceSeries, q: &ModulusQuery) -> Result<f64> {
    q.validate()?;
    if q.delta == 0.0 {
        return Ok(0.0);
    }
    let degree = slice_norm_degree(f, q.p, q.alpha, q.unit, &q.quad)?;
    let spec = q.spec();
    let pref = (q.alpha * q.p / (2.0 * PI)).powf(1.0 / q.p);
    let mut best = 0.0f64;
    for j in 1..=q.h_grid {
        let h = q.delta * j as f64 / q.h_grid as f64;
        for s in [h, -h] {
            let d = difference_series(f, q.k, s, q.unit, degree);
            best = best.max(norm_value(&d, &spec)? / pref);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Projection,
    Gram,
    Descent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestApproxResult {
    pub n: usize,
    pub value: f64,
    pub minimizer: SliceSeries,
    pub method: Method,
    pub iterations: usize,
}

/// `ln |a_k|` for `k <= limit`, exact where the coefficient is representable.
fn ln_coeff_moduli(f: &SliceSeries, limit: usize) -> Vec<f64> {
    let bounds = f.ln_abs_coeffs(limit);
    f.coeffs_to(limit)
        .into_iter()
        .zip(bounds)
        .map(|(a, b)| {
            let m = a.norm();
            if m > 1e-290 {
                m.ln()
            } else {
                b
            }
        })
        .collect()
}

/// `(sum_{k > n} |a_k|^2 k! / alpha^k)^{1/2}`.
pub fn parseval_tail(f: &SliceSeries, n: usize, alpha: f64) -> Result<f64> {
    let limit = f.degree().unwrap_or(PARSEVAL_LIMIT);
    if limit <= n {
        return Ok(0.0);
    }
    let ln = ln_coeff_moduli(f, limit);
    let term = |k: usize| 2.0 * ln[k] + ln_factorial(k) - k as f64 * alpha.ln();
    let total = ((n + 1)..=limit).map(term).fold(f64::NEG_INFINITY, log_add);
    if f.degree().is_none() {
        let last = ((limit - 8)..=limit).map(term).fold(f64::NEG_INFINITY, log_add);
        if !(last - total < 2.0 * 1e-17f64.ln()) {
            return Err(FockError::Truncation {
                radius: f64::NAN,
                cap: limit,
                tail: (0.5 * (last - total)).exp(),
            });
        }
    }
    Ok((0.5 * total).exp())
}

/// Exact best approximation in the second-kind Hilbert space: the Taylor
/// polynomial, with error from the coefficient tail.
pub fn best_approx_second(f: &SliceSeries, n: usize, alpha: f64) -> Result<BestApproxResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FockError::Domain(format!("alpha = {alpha} must be positive")));
    }
    Ok(BestApproxResult {
        n,
        value: parseval_tail(f, n, alpha)?,
        minimizer: f.taylor_truncate(n),
        method: Method::Projection,
        iterations: 0,
    })
}

/// Best approximation in the first-kind Hilbert space by solving the normal
/// equations of `q^0, ..., q^n`.
pub fn best_approx_first(f: &SliceSeries, n: usize, alpha: f64, quad: &QuadSettings) -> Result<BestApproxResult> {
    let mut family: Vec<SliceSeries> = (0..=n).map(SliceSeries::monomial).collect();
    family.push(f.clone());
    let g = gram_first(&family, alpha, quad)?;
    let gram: Vec<Vec<Quaternion>> = (0..=n)
        .map(|a| {
            (0..=n)
                .map(|b| {
                    let d = a.abs_diff(b);
                    if d % 2 == 1 || d >= 4 {
                        Quaternion::ZERO
                    } else {
                        g[a][b]
                    }
                })
                .collect()
        })
        .collect();
    let rhs: Vec<Quaternion> = (0..=n).map(|a| g[a][n + 1]).collect();
    let c = solve_hermitian(&gram, &rhs)?;
    let p = SliceSeries::from_coeffs(c);
    let value = norm_value(&f.sub(&p)?, &NormSpec::first(2.0, alpha).with_quad(*quad))?;
    Ok(BestApproxResult {
        n,
        value,
        minimizer: p,
        method: Method::Gram,
        iterations: 0,
    })
}

struct Objective {
    weights: Vec<f64>,
    values: Vec<Quaternion>,
    /// `basis[i * m + k]`: scaled weighted monomial `k` at node `i`.
    basis: Vec<Quaternion>,
    scales: Vec<f64>,
    m: usize,
    p: f64,
}

impl Objective {
    fn residual(&self, i: usize, u: &[Quaternion]) -> Quaternion {
        let row = &self.basis[i * self.m..(i + 1) * self.m];
        let mut r = self.values[i];
        for (z, c) in row.iter().zip(u) {
            r -= *z * *c;
        }
        r
    }

    fn value(&self, u: &[Quaternion]) -> f64 {
        (0..self.weights.len())
            .map(|i| self.weights[i] * self.residual(i, u).norm().powf(self.p))
            .sum()
    }

    fn gradient(&self, u: &[Quaternion]) -> Vec<Quaternion> {
        let mut g = vec![Quaternion::ZERO; self.m];
        for i in 0..self.weights.len() {
            let r = self.residual(i, u);
            let a = r.norm();
            if a == 0.0 {
                continue;
            }
            let c = -self.p * self.weights[i] * a.powf(self.p - 2.0);
            let row = &self.basis[i * self.m..(i + 1) * self.m];
            for (gk, z) in g.iter_mut().zip(row) {
                *gk += z.conj() * r * c;
            }
        }
        g
    }

    /// Minimizer of the reweighted quadratic `sum w |r|^{p-2} |residual|^2`
    /// built at `u`, with `|r|` clamped below by `IRLS_FLOOR max |r|`.
    fn reweighted(&self, u: &[Quaternion]) -> Option<Vec<Quaternion>> {
        let res: Vec<f64> = (0..self.weights.len()).map(|i| self.residual(i, u).norm()).collect();
        let floor = IRLS_FLOOR * res.iter().cloned().fold(0.0, f64::max);
        if !(floor > 0.0) {
            return None;
        }
        let m = self.m;
        let mut g = vec![vec![Quaternion::ZERO; m]; m];
        let mut rhs = vec![Quaternion::ZERO; m];
        for (i, r) in res.iter().enumerate() {
            let omega = self.weights[i] * r.max(floor).powf(self.p - 2.0);
            let row = &self.basis[i * m..(i + 1) * m];
            for a in 0..m {
                let ca = row[a].conj() * omega;
                rhs[a] += ca * self.values[i];
                for b in 0..m {
                    g[a][b] += ca * row[b];
                }
            }
        }
        solve_hermitian(&g, &rhs).ok()
    }
}

fn dot(a: &[Quaternion], b: &[Quaternion]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(*y)).sum()
}

/// Minimizes `||f - P||_{p,alpha,I}` over polynomials of degree `<= n` by
/// descent with Armijo backtracking from the Taylor polynomial.
pub fn best_approx_lp(
    f: &SliceSeries,
    n: usize,
    p: f64,
    alpha: f64,
    unit: ImaginaryUnit,
    tol: f64,
    quad: &QuadSettings,
) -> Result<BestApproxResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(FockError::Domain(format!("descent needs p >= 1, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(FockError::Domain(format!("tolerance {tol} must be positive")));
    }
    let samples = slice_samples(f, p, alpha, unit, quad)?;
    let m = n + 1;
    let nodes = samples.nodes.len();
    let mut basis = vec![Quaternion::ZERO; nodes * m];
    for (i, z) in samples.nodes.iter().enumerate() {
        let w = (-0.5 * alpha * z.norm_sqr()).exp();
        let mut zk = Quaternion::real(w);
        for k in 0..m {
            basis[i * m + k] = zk;
            zk = zk * *z;
        }
    }
    let scales: Vec<f64> = (0..m)
        .map(|k| {
            let s: f64 = (0..nodes).map(|i| samples.weights[i] * basis[i * m + k].norm().powf(p)).sum();
            s.powf(1.0 / p)
        })
        .collect();
    for i in 0..nodes {
        for k in 0..m {
            basis[i * m + k] = basis[i * m + k] * (1.0 / scales[k]);
        }
    }
    let obj = Objective {
        weights: samples.weights,
        values: samples.values,
        basis,
        scales,
        m,
        p,
    };
    let start: Vec<Quaternion> = f.coeffs_to(n).iter().zip(&obj.scales).map(|(a, s)| *a * *s).collect();
    let finish = |u: &[Quaternion], value: f64, iterations: usize| BestApproxResult {
        n,
        value: value.powf(1.0 / p),
        minimizer: SliceSeries::from_coeffs(u.iter().zip(&obj.scales).map(|(c, s)| *c * (1.0 / s)).collect()),
        method: Method::Descent,
        iterations,
    };

    let mut u = start;
    let mut phi = obj.value(&u);
    let mut g = obj.gradient(&u);
    let mut step = 1.0 / dot(&g, &g).sqrt().max(1e-300) * phi.max(1e-300);
    let mut quiet = 0;
    for it in 1..=DESCENT_MAX_ITER {
        let gg = dot(&g, &g);
        if phi == 0.0 || gg.sqrt() <= 1e-15 * phi {
            return Ok(finish(&u, phi, it - 1));
        }
        // Reweighted least-squares direction when it descends, otherwise
        // the gradient with a Barzilai-Borwein step.
        let (dir, mut t) = match obj.reweighted(&u) {
            Some(target) => {
                let d: Vec<Quaternion> = target.iter().zip(&u).map(|(a, b)| *a - *b).collect();
                if dot(&g, &d) < 0.0 {
                    (d, 1.0)
                } else {
                    (g.iter().map(|x| -*x).collect(), step)
                }
            }
            None => (g.iter().map(|x| -*x).collect::<Vec<_>>(), step),
        };
        let slope = dot(&g, &dir);
        let (next, next_phi) = loop {
            let cand: Vec<Quaternion> = u.iter().zip(&dir).map(|(x, d)| *x + *d * t).collect();
            let v = obj.value(&cand);
            if v <= phi + 1e-4 * t * slope {
                break (cand, v);
            }
            t *= 0.5;
            if t < 1e-300 {
                return Ok(finish(&u, phi, it));
            }
        };
        let next_g = obj.gradient(&next);
        let s: Vec<Quaternion> = next.iter().zip(&u).map(|(a, b)| *a - *b).collect();
        let y: Vec<Quaternion> = next_g.iter().zip(&g).map(|(a, b)| *a - *b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * step };
        let decrease = phi - next_phi;
        u = next;
        g = next_g;
        phi = next_phi;
        quiet = if decrease <= tol * phi { quiet + 1 } else { 0 };
        if quiet >= 3 {
            return Ok(finish(&u, phi, it));
        }
    }
    let best = finish(&u, phi, DESCENT_MAX_ITER);
    Err(FockError::SolverFailure {
        iterations: DESCENT_MAX_ITER,
        objective: best.value,
        best: best.minimizer.coeffs_to(n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    pub p: f64,
    pub alpha: f64,
    pub slice: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub theorem: String,
    pub params: ReportParams,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    /// Both sides vanish.
    pub degenerate: bool,
    pub grid: GridInfo,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        if self.degenerate {
            return true;
        }
        match (self.ratio, self.slack) {
            (_, Some(s)) => s >= 0.0,
            (Some(r), None) => r.is_finite(),
            (None, None) => false,
        }
    }
}

fn slice_name(unit: ImaginaryUnit) -> String {
    crate::fock::SliceChoice::Unit(unit).to_string()
}

fn grid_info(quad: &QuadSettings) -> GridInfo {
    GridInfo {
        radial: quad.radial,
        angular: quad.angular,
        sphere: None,
    }
}

/// `||I_{n,m,r} f - f||` against `omega_{m+1}(f; 1/n)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_jackson(
    f: &SliceSeries,
    n: usize,
    m: usize,
    p: f64,
    alpha: f64,
    unit: ImaginaryUnit,
    h_grid: usize,
    quad: &QuadSettings,
) -> Result<VerificationReport> {
    let op = jackson_op(n, m, p)?;
    let spec = NormSpec::second(p, alpha, unit).with_quad(*quad);
    let lhs = norm_value(&op.apply(f).sub(f)?, &spec)?;
    let query = ModulusQuery {
        h_grid,
        quad: *quad,
        ..ModulusQuery::new(m + 1, 1.0 / n as f64, p, alpha, unit)
    };
    let rhs = modulus(f, &query)?;
    let scale = norm_value(f, &spec)?;
    let degenerate = lhs <= ZERO_REL * scale && rhs <= ZERO_REL * scale;
    Ok(VerificationReport {
        theorem: "jackson-modulus".into(),
        params: ReportParams {
            n,
            m: Some(m),
            r: op.provenance.r(),
            p,
            alpha,
            slice: slice_name(unit),
            h_grid: Some(h_grid),
            method: None,
        },
        lhs,
        rhs,
        ratio: (!degenerate).then(|| lhs / rhs),
        slack: None,
        degenerate,
        grid: grid_info(quad),
    })
}

/// Constant `2^{(p-1)/p} (2^p + 1)^{1/p} + 1`.
pub fn vdp_constant(p: f64) -> f64 {
    2f64.powf((p - 1.0) / p) * (2f64.powf(p) + 1.0).powf(1.0 / p) + 1.0
}

/// `E_n(f)` in the second-kind norm: exact for `p = 2`, by descent otherwise.
pub fn best_approx(
    f: &SliceSeries,
    n: usize,
    p: f64,
    alpha: f64,
    unit: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<BestApproxResult> {
    if p == 2.0 {
        best_approx_second(f, n, alpha)
    } else {
        best_approx_lp(f, n, p, alpha, unit, DESCENT_TOL, quad)
    }
}

/// `||V_n f - f|| <= vdp_constant(p) E_n(f)`, reported with its slack.
pub fn verify_vdp(
    f: &SliceSeries,
    n: usize,
    p: f64,
    alpha: f64,
    unit: ImaginaryUnit,
    quad: &QuadSettings,
) -> Result<VerificationReport> {
    let op = vdp_op(n)?;
    let spec = NormSpec::second(p, alpha, unit).with_quad(*quad);
    let lhs = norm_value(&op.apply(f).sub(f)?, &spec)?;
    let best = best_approx(f, n, p, alpha, unit, quad)?;
    let rhs = vdp_constant(p) * best.value;
    let scale = norm_value(f, &spec)?;
    let degenerate = lhs <= ZERO_REL * scale && rhs <= ZERO_REL * scale;
    Ok(VerificationReport {
        theorem: "vdp-best-approx".into(),
        params: ReportParams {
            n,
            m: None,
            r: None,
            p,
            alpha,
            slice: slice_name(unit),
            h_grid: None,
            method: Some(best.method),
        },
        lhs,
        rhs,
        ratio: None,
        slack: Some(rhs - lhs),
        degenerate,
        grid: grid_info(quad),
    })
}
