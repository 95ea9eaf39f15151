//! SVD-based rank decisions and subspace comparisons.
//!
//! Every rank is decided against `tau = max_dim * eps * max(sigma_max, reference) * factor`.
//! A decision is *stable* when no singular value lies in `(tau/10, 10 tau]`; unstable
//! decisions signal that the sampled point sits near a rank boundary and should be redrawn.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::liealg::Matrix;
use crate::math::sqrt;

#[derive(Clone, Debug, PartialEq)]
pub struct RankDecision {
    pub rank: usize,
    pub tolerance: f64,
    pub stable: bool,
    /// Descending.
    pub singular_values: Vec<f64>,
}

impl RankDecision {
    /// Distance, in decades, from the threshold to the nearest singular value.
    pub fn margin_decades(&self) -> f64 {
        self.singular_values
            .iter()
            .map(|&s| crate::math::abs(crate::math::log10(s.max(f64::MIN_POSITIVE) / self.tolerance)))
            .fold(f64::INFINITY, f64::min)
    }
}

fn decide(singular_values: Vec<f64>, max_dim: usize, reference: f64, factor: f64) -> RankDecision {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let scale = smax.max(reference);
    let tolerance = max_dim.max(1) as f64 * f64::EPSILON * scale * factor;
    let rank = singular_values.iter().filter(|&&s| s > tolerance).count();
    let stable = tolerance == 0.0
        || !singular_values.iter().any(|&s| s > tolerance / 10.0 && s <= tolerance * 10.0);
    RankDecision { rank, tolerance, stable, singular_values }
}

/// Thin singular value decomposition `m = u diag(s) v^T` with `s` descending.
///
/// `v` is a full orthogonal `ncols × ncols` matrix, so its trailing columns span the
/// null space; `s` has one entry per column of `m` (zeros past the rank). Columns of `u`
/// belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Slower than bidiagonalization but accurate for
/// clustered and tiny singular values, which is what rank decisions depend on.
pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = Matrix::identity(cols, cols);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..rows {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || crate::math::abs(gamma) <= f64::EPSILON * sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (crate::math::abs(zeta) + sqrt(1.0 + zeta * zeta));
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols).map(|c| a.column(c).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = Matrix::zeros(rows, cols);
    let mut v_sorted = Matrix::zeros(cols, cols);
    for (c, &k) in order.iter().enumerate() {
        v_sorted.set_column(c, &v.column(k));
        if norms[k] > 0.0 {
            u.set_column(c, &(a.column(k) / norms[k]));
        }
    }
    Svd { u, singular_values: order.iter().map(|&k| norms[k]).collect(), v: v_sorted }
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * x - s * y;
        m[(r, q)] = s * x + c * y;
    }
}

/// Singular values in descending order (`min(rows, cols)` of them).
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s = svd(m).singular_values;
    s.truncate(m.nrows().min(m.ncols()));
    s
}

pub fn numerical_rank(m: &Matrix, reference: f64, factor: f64) -> RankDecision {
    decide(singular_values(m), m.nrows().max(m.ncols()), reference, factor)
}

/// Orthonormal basis (columns) of the null space of `m`.
pub fn null_space(m: &Matrix, reference: f64, factor: f64) -> (Matrix, RankDecision) {
    let cols = m.ncols();
    if cols == 0 {
        return (Matrix::zeros(0, 0), decide(Vec::new(), m.nrows(), reference, factor));
    }
    if m.nrows() == 0 {
        return (Matrix::identity(cols, cols), decide(Vec::new(), cols, reference, factor));
    }
    let mut f = svd(m);
    f.singular_values.truncate(m.nrows().min(cols));
    let decision = decide(f.singular_values, m.nrows().max(cols), reference, factor);
    let basis = f.v.columns(decision.rank, cols - decision.rank).into_owned();
    (basis, decision)
}

/// Orthonormal basis (columns) of the column space of `m`.
pub fn column_space(m: &Matrix, reference: f64, factor: f64) -> (Matrix, RankDecision) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (Matrix::zeros(rows, 0), decide(Vec::new(), rows.max(cols), reference, factor));
    }
    let mut f = svd(m);
    f.singular_values.truncate(rows.min(cols));
    let decision = decide(f.singular_values, rows.max(cols), reference, factor);
    (f.u.columns(0, decision.rank).into_owned(), decision)
}

/// Column space of `[a | b]`.
pub fn span_union(a: &Matrix, b: &Matrix, reference: f64, factor: f64) -> (Matrix, RankDecision) {
    let rows = a.nrows().max(b.nrows());
    let mut m = Matrix::zeros(rows, a.ncols() + b.ncols());
    if a.ncols() > 0 {
        m.view_mut((0, 0), a.shape()).copy_from(a);
    }
    if b.ncols() > 0 {
        m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    }
    column_space(&m, reference, factor)
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Largest sine of the principal angles between `span(a)` and `span(b)` measured
/// from `a`: zero iff `span(a) ⊆ span(b)`. Both inputs must have orthonormal columns.
pub fn containment_residual(a: &Matrix, b: &Matrix) -> f64 {
    if a.ncols() == 0 {
        return 0.0;
    }
    if b.ncols() == 0 {
        return 1.0;
    }
    let residual = a - b * (b.transpose() * a);
    spectral_norm(&residual).min(1.0)
}

/// Symmetric subspace distance; `1` when the dimensions differ.
pub fn subspace_distance(a: &Matrix, b: &Matrix) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    containment_residual(a, b).max(containment_residual(b, a))
}

pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn frobenius(m: &Matrix) -> f64 {
    sqrt(m.iter().map(|x| x * x).sum())
}

/// Maximal absolute entry of `m - m^T`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_outer_product() {
        let u = Matrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let v = Matrix::from_row_slice(1, 4, &[1.0, -1.0, 0.5, 2.0]);
        let d = numerical_rank(&(u * v), 0.0, 1e4);
        assert_eq!(d.rank, 1);
        assert!(d.stable);
    }

    #[test]
    fn near_threshold_is_unstable() {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![1.0, 1e-11]));
        let d = numerical_rank(&m, 0.0, 1e4);
        // tau = 2 * eps * 1e4 ~ 4.4e-12, and 1e-11 is within a decade
        assert!(!d.stable);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (n, d) = null_space(&m, 0.0, 1e4);
        assert_eq!(d.rank, 1);
        assert_eq!(n.ncols(), 2);
        assert!((m * &n).abs().max() < 1e-14);
        assert!((n.transpose() * &n - Matrix::identity(2, 2)).abs().max() < 1e-14);
    }

    #[test]
    fn containment() {
        let e1 = Matrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let e12 = Matrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(containment_residual(&e1, &e12) < 1e-15);
        assert!(containment_residual(&e12, &e1) > 0.5);
        assert_eq!(subspace_distance(&e1, &e12), 1.0);
    }

    #[test]
    fn svd_with_clustered_values() {
        // [Q | Q R] with orthonormal Q: singular values sqrt(1 + ...) in clusters and exact zeros
        let raw = crate::liealg::sample_square(17, 15).columns(0, 11).into_owned();
        let q = column_space(&raw, 0.0, 1e4).0;
        let mut m = Matrix::zeros(15, 14);
        m.columns_mut(0, 11).copy_from(&q);
        m.columns_mut(11, 3).copy_from(&q.columns(0, 3));
        let f = svd(&m);
        let recomposed = &f.u * Matrix::from_diagonal(&nalgebra::DVector::from_vec(f.singular_values.clone())) * f.v.transpose();
        assert!((recomposed - &m).abs().max() < 1e-13);
        assert!((f.v.transpose() * &f.v - Matrix::identity(14, 14)).abs().max() < 1e-13);
        let (span, d) = column_space(&m, 1.0, 1e4);
        assert_eq!(d.rank, 11);
        assert!(containment_residual(&q, &span) < 1e-13);
    }
}
