//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Determinant as sign and natural log of the modulus, so large systems never overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLogDet {
    /// -1, 0 or +1.
    pub sign: f64,
    pub log_abs: f64,
}

impl SignedLogDet {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

pub fn signed_log_det(m: &DMatrix<f64>) -> SignedLogDet {
    if m.nrows() == 0 {
        return SignedLogDet { sign: 1.0, log_abs: 0.0 };
    }
    let lu = m.clone().lu();
    let mut sign: f64 = lu.p().determinant();
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return SignedLogDet {
                sign: 0.0,
                log_abs: f64::NEG_INFINITY,
            };
        }
        if d < 0.0 {
            sign = -sign;
        }
        log_abs += d.abs().ln();
    }
    SignedLogDet { sign, log_abs }
}

/// Number of strictly negative eigenvalues of a symmetric matrix.
pub fn negative_count(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().filter(|&&l| l < 0.0).count()
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Smallest over largest singular value (0 for an empty or zero matrix).
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// A singular value counts as zero when it is at most `rel_tol` times the largest one,
/// or at most `abs_tol`.
pub fn null_space(a: &DMatrix<f64>, rel_tol: f64, abs_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let thresh = (rel_tol * smax).max(abs_tol);
    let picked: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thresh)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if picked.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&picked)
    }
}

/// Orthonormal basis of the column space of `a` (singular values above `rel_tol * max`).
pub fn range_space(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let picked: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax > 0.0 && s > rel_tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if picked.is_empty() {
        DMatrix::zeros(rows, 0)
    } else {
        DMatrix::from_columns(&picked)
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Flips `v` so that its first entry with magnitude above `1e-9 * max|v|` is positive.
pub fn fix_sign(v: &mut DVector<f64>) {
    let scale = v.amax();
    if let Some(x) = v.iter().find(|x| x.abs() > 1e-9 * scale).copied() {
        if x < 0.0 {
            v.neg_mut();
        }
    }
}
