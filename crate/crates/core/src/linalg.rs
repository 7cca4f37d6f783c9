//! Least-squares utilities for tall design matrices.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{FacesError, Result};

/// Thin SVD of `a`, computed through a QR factorisation when `a` is tall.
struct ThinSvd {
    /// `m x r` left factor.
    u: DMatrix<f64>,
    singular_values: DVector<f64>,
    /// `r x k` right factor (transposed).
    v_t: DMatrix<f64>,
}

fn thin_svd(a: &DMatrix<f64>) -> ThinSvd {
    let (m, k) = a.shape();
    if m > 2 * k {
        let qr = a.clone().qr();
        let q = qr.q();
        let r = qr.r();
        let svd = r.svd(true, true);
        ThinSvd {
            u: q * svd.u.expect("requested U"),
            singular_values: svd.singular_values,
            v_t: svd.v_t.expect("requested V^T"),
        }
    } else {
        let svd = a.clone().svd(true, true);
        ThinSvd {
            u: svd.u.expect("requested U"),
            singular_values: svd.singular_values,
            v_t: svd.v_t.expect("requested V^T"),
        }
    }
}

fn rank_tolerance(shape: (usize, usize), singular_values: &DVector<f64>) -> f64 {
    let smax = singular_values.iter().copied().fold(0.0, f64::max);
    shape.0.max(shape.1) as f64 * f64::EPSILON * smax
}

/// Numerical rank with the usual `max(m, n) * eps * sigma_max` threshold.
pub fn matrix_rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let svd = thin_svd(a);
    let tol = rank_tolerance(a.shape(), &svd.singular_values);
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

/// Moore-Penrose pseudoinverse of a matrix with full column rank.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pinv: DMatrix<f64>,
}

impl LeastSquares {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let (m, k) = a.shape();
        if m < k || k == 0 {
            return Err(FacesError::RankDeficient {
                rank: m.min(k),
                columns: k,
            });
        }
        let svd = thin_svd(a);
        let tol = rank_tolerance(a.shape(), &svd.singular_values);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank < k {
            return Err(FacesError::RankDeficient { rank, columns: k });
        }
        let mut v_sinv = svd.v_t.transpose();
        for (j, s) in svd.singular_values.iter().enumerate() {
            let mut col = v_sinv.column_mut(j);
            col /= *s;
        }
        Ok(Self {
            pinv: v_sinv * svd.u.transpose(),
        })
    }

    pub fn pinv(&self) -> &DMatrix<f64> {
        &self.pinv
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.pinv.ncols() {
            return Err(FacesError::LengthMismatch {
                expected: self.pinv.ncols(),
                found: b.len(),
            });
        }
        let x = &self.pinv * DVector::from_column_slice(b);
        Ok(x.iter().copied().collect())
    }

    /// Maximum absolute row sum of the pseudoinverse.
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.pinv)
    }
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A^+||_inf` for a matrix with full column rank.
pub fn pinv_inf_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(LeastSquares::new(a)?.inf_norm())
}

/// Non-negative least squares `min ||A x - b||_2` subject to `x >= 0` (Lawson-Hanson).
pub fn nnls(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(FacesError::LengthMismatch {
            expected: m,
            found: b.len(),
        });
    }
    let bv = DVector::from_column_slice(b);
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = alloc::vec![false; n];
    let tol = 10.0 * f64::EPSILON * inf_norm(a).max(1.0) * (m.max(n) as f64);
    let max_outer = 3 * n + 10;

    let solve_passive = |passive: &[bool]| -> DVector<f64> {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let mut z = DVector::<f64>::zeros(n);
        if cols.is_empty() {
            return z;
        }
        let sub = a.select_columns(&cols);
        let svd = sub.svd(true, true);
        if let Ok(sol) = svd.solve(&bv, 1e-14) {
            for (i, &j) in cols.iter().enumerate() {
                z[j] = sol[i];
            }
        }
        z
    };

    for _ in 0..max_outer {
        let w = a.transpose() * (&bv - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else { break };
        if w[t] <= tol {
            break;
        }
        passive[t] = true;
        loop {
            let z = solve_passive(&passive);
            let active_negative: Vec<usize> = (0..n).filter(|&j| passive[j] && z[j] <= 0.0).collect();
            if active_negative.is_empty() {
                x = z;
                break;
            }
            let alpha = active_negative
                .iter()
                .map(|&j| x[j] / (x[j] - z[j]))
                .fold(f64::INFINITY, f64::min);
            x += (z - &x) * alpha;
            for j in 0..n {
                if passive[j] && x[j] <= tol {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Ok(x.iter().map(|v| v.max(0.0)).collect())
}
