//! Dense complex linear algebra helpers shared by the slice and angle
//! machinery: SVD-based orthonormalization, operator norms, Hermitian
//! eigendecompositions, null spaces, and minimal-norm least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Singular values of `m`, sorted descending. Empty for an empty matrix.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator 2-norm (largest singular value); 0 for an empty matrix.
pub fn operator_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis for the column span of `m`; columns whose singular value
/// falls below `rel_tol` times the largest are discarded.
pub fn orthonormalize_cols(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("svd with u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]];
    if smax == 0.0 {
        return CMat::zeros(m.nrows(), 0);
    }
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| svd.singular_values[j] > rel_tol * smax)
        .collect();
    let mut out = CMat::zeros(m.nrows(), kept.len());
    for (col, &j) in kept.iter().enumerate() {
        out.set_column(col, &u.column(j));
    }
    out
}

/// Orthonormal basis of the right null space `{x : m·x = 0}`, deciding rank
/// with the absolute singular-value threshold `tol_abs`.
pub fn null_space(m: &CMat, tol_abs: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // The thin SVD only carries min(nrows, ncols) right directions; for a
    // wide matrix the remaining kernel directions are the orthogonal
    // complement of the thin V block.
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd with v_t requested");
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= tol_abs)
        .collect();
    let thin = vt.nrows();
    let extra = if thin < n {
        let v = vt.adjoint(); // n × thin
        let residual = CMat::identity(n, n) - &v * v.adjoint();
        // Singular values of the residual projector are exactly 0 or 1.
        orthonormalize_cols(&residual, 0.5)
    } else {
        CMat::zeros(n, 0)
    };
    let mut out = CMat::zeros(n, kept.len() + extra.ncols());
    for (col, &j) in kept.iter().enumerate() {
        out.set_column(col, &vt.row(j).adjoint());
    }
    for col in 0..extra.ncols() {
        out.set_column(kept.len() + col, &extra.column(col));
    }
    out
}

/// Eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return Vec::new();
    }
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(m: &CMat) -> Option<(f64, f64)> {
    let vals = hermitian_eigenvalues(m);
    Some((*vals.first()?, *vals.last()?))
}

/// Minimal-norm least-squares solution of `a·x = b` via the pseudo-inverse,
/// with singular values below `rel_tol`·σ_max treated as zero.
pub fn pinv_solve(a: &CMat, b: &CVec, rel_tol: f64) -> CVec {
    assert_eq!(a.nrows(), b.len());
    if a.ncols() == 0 {
        return CVec::zeros(0);
    }
    if a.nrows() == 0 {
        return CVec::zeros(a.ncols());
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    let mut x = CVec::zeros(a.ncols());
    if smax == 0.0 {
        return x;
    }
    for j in 0..svd.singular_values.len() {
        let s = svd.singular_values[j];
        if s > rel_tol * smax {
            let uj = u.column(j);
            let coeff = uj.dotc(b) / Complex64::from(s);
            x += vt.row(j).adjoint() * coeff;
        }
    }
    x
}

/// `b · b^H`, the orthogonal projection onto the column span of an
/// orthonormal `b`.
pub fn projection_from_basis(b: &CMat, ambient: usize) -> CMat {
    if b.ncols() == 0 {
        return CMat::zeros(ambient, ambient);
    }
    assert_eq!(b.nrows(), ambient);
    b * b.adjoint()
}

/// Max-abs entry of `m − m^H`, a cheap Hermitian-ness check.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Frobenius inner-product distance `‖a − b‖_F`.
pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
