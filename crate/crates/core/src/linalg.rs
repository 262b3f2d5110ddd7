//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::point::SymMatrix;

/// Default stopping rule: off-diagonal Frobenius mass ≤ `EIG_TOL · ‖z‖_F`.
pub const EIG_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// `z = V diag(values) Vᵀ`, with `values` sorted by decreasing magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the unit eigenvector for `values[j]`.
    pub vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn side(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        let n = self.side();
        (0..n).map(|i| self.vectors[i * n + j]).collect()
    }

    /// Rebuilds `V diag(values) Vᵀ` with replacement eigenvalues.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymMatrix {
        SymMatrix::from_spectrum(values, &self.vectors)
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.reconstruct_with(&self.values)
    }
}

pub fn eig_sym(z: &SymMatrix, tol: f64) -> Result<EigenDecomposition> {
    eig_sym_dense(z.side(), &z.to_dense(), tol)
}

/// Jacobi on a dense row-major symmetric matrix. Only the upper triangle is
/// trusted; the input is symmetrized on entry.
pub fn eig_sym_dense(n: usize, dense: &[f64], tol: f64) -> Result<EigenDecomposition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if dense.len() != n * n {
        return Err(Error::mismatch(
            format!("{} entries", n * n),
            format!("{}", dense.len()),
        ));
    }
    if dense.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = dense[i * n + j];
            a[j * n + i] = dense[i * n + j];
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = tol * total;
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut converged = total == 0.0 || off(&a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {:.3e})",
                off(&a)
            )));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off(&a) <= threshold;
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: equal magnitudes keep their diagonal order.
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .abs()
            .partial_cmp(&a[i * n + i].abs())
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Eigenvalues of a symmetric matrix sorted by decreasing magnitude.
pub fn eigenvalues(z: &SymMatrix) -> Result<Vec<f64>> {
    Ok(eig_sym(z, EIG_TOL)?.values)
}

/// Extreme eigenvalues `(min, max)` of a dense symmetric matrix.
pub(crate) fn extreme_eigenvalues(n: usize, dense: &[f64]) -> Result<(f64, f64)> {
    let e = eig_sym_dense(n, dense, EIG_TOL)?;
    let lo = e.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = e.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}
