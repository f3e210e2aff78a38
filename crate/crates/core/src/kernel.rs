//! Reproducing kernel sections `K_alpha(., q0) = sum alpha^k q^k conj(q0)^k / k!`
//! and least-squares fits by finite right-linear combinations of them.

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::linalg::solve_hermitian;
use crate::quat::Quaternion;
use crate::series::{ln_factorial, log_add, SliceSeries, DEGREE_CAP};

/// Relative size below which Gram and residual terms are dropped.
const TERM_TOL: f64 = 1e-20;

/// `K_alpha(r, q0)`.
pub fn kernel_eval(q0: Quaternion, alpha: f64, r: Quaternion) -> Result<Quaternion> {
    SliceSeries::kernel_section(q0, alpha).evaluate(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFit {
    pub centers: Vec<Quaternion>,
    pub coefficients: Vec<Quaternion>,
    /// `||f - sum_k K_alpha(., q_k) b_k||_{2,alpha,I}`, the same on every slice.
    pub residual: f64,
    /// Highest coefficient index carried.
    pub degree: usize,
}

fn working_degree(f: &SliceSeries, centers: &[Quaternion], alpha: f64) -> Result<usize> {
    let limit = 4 * DEGREE_CAP;
    let big = centers.iter().map(|q| q.norm_sqr()).fold(0.0, f64::max) * alpha;
    let ln_tol = TERM_TOL.ln();
    let section_degree = if big == 0.0 {
        0
    } else {
        (1..=limit)
            .find(|&j| j as f64 > big && j as f64 * big.ln() - ln_factorial(j) < big + ln_tol)
            .ok_or(FockError::Truncation {
                radius: big.sqrt(),
                cap: limit,
                tail: f64::NAN,
            })?
    };
    let f_degree = match f.degree() {
        Some(d) => d,
        None => {
            let ln = f.ln_abs_coeffs(limit);
            let terms: Vec<f64> = (0..=limit)
                .map(|k| 2.0 * ln[k] + ln_factorial(k) - k as f64 * alpha.ln())
                .collect();
            let mut suffix = vec![f64::NEG_INFINITY; limit + 2];
            for k in (0..=limit).rev() {
                suffix[k] = log_add(suffix[k + 1], terms[k]);
            }
            (0..=limit)
                .find(|&k| suffix[k + 1] < suffix[0] + 2.0 * ln_tol)
                .ok_or(FockError::Truncation {
                    radius: f64::NAN,
                    cap: limit,
                    tail: f64::NAN,
                })?
        }
    };
    Ok(section_degree.max(f_degree))
}

/// Coefficients `alpha^j conj(q0)^j / j!`, `j <= degree`.
fn section_coeffs(q0: Quaternion, alpha: f64, degree: usize) -> Vec<Quaternion> {
    let step = q0.conj() * alpha;
    let mut c = Quaternion::ONE;
    (0..=degree)
        .map(|j| {
            if j > 0 {
                c = c * step * (1.0 / j as f64);
            }
            c
        })
        .collect()
}

/// Least-squares fit of `f` by `sum_k K_alpha(., q_k) b_k` in the
/// second-kind Hilbert space.
///
/// Uses `<K(., q_k), K(., q_l)> = sum_j alpha^j q_k^j conj(q_l)^j / j!` and
/// `<K(., q_k), f> = f(q_k)`; the residual is summed from coefficients.
pub fn fit_with_sections(f: &SliceSeries, centers: &[Quaternion], alpha: f64) -> Result<KernelFit> {
    if centers.is_empty() {
        return Err(FockError::Domain("at least one center is needed".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FockError::Domain(format!("alpha = {alpha} must be positive")));
    }
    for (a, qa) in centers.iter().enumerate() {
        if !qa.is_finite() {
            return Err(FockError::Domain(format!("center {qa} is not finite")));
        }
        if centers[..a].contains(qa) {
            return Err(FockError::Domain(format!("center {qa} appears twice")));
        }
    }
    let degree = working_degree(f, centers, alpha)?;
    let n = centers.len();
    let sections: Vec<Vec<Quaternion>> = centers.iter().map(|q| section_coeffs(*q, alpha, degree)).collect();
    let gram: Vec<Vec<Quaternion>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let mut t = Quaternion::ONE;
                    let mut acc = Quaternion::ONE;
                    for j in 1..=degree {
                        t = centers[k] * t * centers[l].conj() * (alpha / j as f64);
                        acc += t;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let a = f.coeffs_to(degree);
    let rhs: Vec<Quaternion> = centers
        .iter()
        .map(|q| {
            let mut acc = Quaternion::ZERO;
            for c in a.iter().rev() {
                acc = *q * acc + *c;
            }
            acc
        })
        .collect();
    let b = solve_hermitian(&gram, &rhs)?;
    let mut res2 = 0.0;
    for j in 0..=degree {
        let mut c = a[j];
        for (s, bk) in sections.iter().zip(&b) {
            c -= s[j] * *bk;
        }
        let w = (0.5 * (ln_factorial(j) - j as f64 * alpha.ln())).exp();
        res2 += (c.norm() * w).powi(2);
    }
    if !res2.is_finite() {
        return Err(FockError::IntegrandOverflow {
            node: Quaternion::ZERO,
            value: res2,
        });
    }
    Ok(KernelFit {
        centers: centers.to_vec(),
        coefficients: b,
        residual: res2.sqrt(),
        degree,
    })
}

/// `n` equispaced real centers in `[a, b]`.
pub fn real_centers(a: f64, b: f64, n: usize) -> Vec<Quaternion> {
    match n {
        0 => Vec::new(),
        1 => vec![Quaternion::real(0.5 * (a + b))],
        _ => (0..n)
            .map(|k| Quaternion::real(a + (b - a) * k as f64 / (n - 1) as f64))
            .collect(),
    }
}
