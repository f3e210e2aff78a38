//! Quaternionic Hermitian systems through their real left-multiplication
//! embedding.

use nalgebra::{DMatrix, DVector};

use crate::error::{FockError, Result};
use crate::quat::Quaternion;

/// Condition numbers above this are reported instead of solved through.
pub const MAX_CONDITION: f64 = 1e13;

/// `4 x 4` matrix of `v -> q v`.
pub fn left_matrix(q: Quaternion) -> [[f64; 4]; 4] {
    let Quaternion { w, x, y, z } = q;
    [
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ]
}

fn embed(g: &[Vec<Quaternion>], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4 * n, 4 * n);
    for a in 0..n {
        for b in 0..n {
            let l = left_matrix(g[a][b]);
            for i in 0..4 {
                for j in 0..4 {
                    m[(4 * a + i, 4 * b + j)] = l[i][j];
                }
            }
        }
    }
    // Average with the transpose to remove quadrature asymmetry.
    (&m + m.transpose()) * 0.5
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `sum_b G[a][b] c_b = rhs_a` for a Hermitian positive definite
/// quaternion matrix `G`.
///
/// After symmetric diagonal scaling, fails with the smallest leading minor
/// whose condition number exceeds [`MAX_CONDITION`].
pub fn solve_hermitian(g: &[Vec<Quaternion>], rhs: &[Quaternion]) -> Result<Vec<Quaternion>> {
    let n = rhs.len();
    if g.len() != n || g.iter().any(|row| row.len() != n) {
        return Err(FockError::Domain("Gram matrix and right-hand side sizes differ".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Jacobi scaling: solve for d_a c_a with G'[a][b] = G[a][b] / (d_a d_b).
    let d: Vec<f64> = (0..n).map(|a| g[a][a].w.max(0.0).sqrt()).collect();
    if let Some(a) = d.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(FockError::IllConditioned {
            minor: a + 1,
            condition: f64::INFINITY,
        });
    }
    let scaled: Vec<Vec<Quaternion>> = (0..n)
        .map(|a| (0..n).map(|b| g[a][b] * (1.0 / (d[a] * d[b]))).collect())
        .collect();
    let m = embed(&scaled, n);
    let full = condition(&m);
    if !(full <= MAX_CONDITION) {
        for s in 1..=n {
            let c = condition(&m.view((0, 0), (4 * s, 4 * s)).into_owned());
            if !(c <= MAX_CONDITION) {
                return Err(FockError::IllConditioned { minor: s, condition: c });
            }
        }
        return Err(FockError::IllConditioned { minor: n, condition: full });
    }
    let chol = m.cholesky().ok_or(FockError::IllConditioned {
        minor: n,
        condition: full,
    })?;
    let b = DVector::from_iterator(
        4 * n,
        rhs.iter().zip(&d).flat_map(|(q, s)| (*q * (1.0 / s)).to_array()),
    );
    let x = chol.solve(&b);
    Ok((0..n)
        .map(|k| Quaternion::new(x[4 * k], x[4 * k + 1], x[4 * k + 2], x[4 * k + 3]) * (1.0 / d[k]))
        .collect())
}
