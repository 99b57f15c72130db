//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Deterministic orthonormal basis of the orthogonal complement of `normal`.
///
/// Gram-Schmidt over the canonical basis vectors in index order; exactly one
/// of them (the one most parallel to `normal`) drops out. The result is a
/// `d x (d-1)` matrix whose columns form the basis. Reproducibility matters:
/// traced arrangements are expressed in this frame and serialized
/// intermediates must be stable.
pub fn complement_frame(normal: &DVector<f64>) -> DMatrix<f64> {
    let d = normal.len();
    assert!(d >= 1);
    if d == 1 {
        return DMatrix::zeros(1, 0);
    }
    let n = normal / normal.norm();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    for i in 0..d {
        if cols.len() == d - 1 {
            break;
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v -= &n * n[i];
        for c in &cols {
            let proj = c.dot(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / norm);
        }
    }
    assert_eq!(cols.len(), d - 1, "complement frame construction failed");
    DMatrix::from_columns(&cols)
}

/// Numerical rank of a family of row vectors, by singular values.
///
/// A singular value counts when it exceeds `threshold` times the largest one
/// (absolute `threshold` for families of unit vectors is equivalent up to
/// scale, since the largest singular value is at least 1).
pub fn family_rank(vectors: &[DVector<f64>], threshold: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let d = vectors[0].len();
    let m = vectors.len();
    let mat = DMatrix::from_fn(m, d, |i, j| vectors[i][j]);
    let svd = mat.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > threshold * smax.max(1.0))
        .count()
}

/// Solve the square system `A x = b`, returning `None` when `A` is singular
/// relative to `threshold` (smallest singular value below `threshold` times
/// the largest).
pub fn solve_square(a: &DMatrix<f64>, b: &DVector<f64>, threshold: f64) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax <= 0.0 || smin <= threshold * smax.max(1.0) {
        return None;
    }
    svd.solve(b, 0.0).ok()
}
