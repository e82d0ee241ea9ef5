//! SVD-based rank, range, nullspace and least-squares routines.
//!
//! Every dimension decision goes through one relative rule: a singular value
//! counts as nonzero when `σ > tol·σ_max`. With `σ_max = 0` the rank is zero.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Thin singular value decomposition `A = U·diag(σ)·Vh` with `σ` descending.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub vh: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singular_values.len();
        let mut us = self.u.as_dmatrix().clone();
        for j in 0..k {
            let s = self.singular_values[j];
            us.column_mut(j).iter_mut().for_each(|z| *z *= s);
        }
        ComplexMatrix::from_dmatrix(us * self.vh.as_dmatrix())
    }

    /// Number of singular values above `tol·σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        rank_from_singular_values(&self.singular_values, tol)
    }
}

pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Thin SVD with singular values sorted in descending order.
pub fn svd(a: &ComplexMatrix) -> SvdResult {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return SvdResult {
            u: ComplexMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            vh: ComplexMatrix::zeros(0, n),
        };
    }
    let dec = a.as_dmatrix().clone().svd(true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let sv = dec.singular_values;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let u_sorted = DMatrix::from_fn(m, k, |i, j| u[(i, order[j])]);
    let vh_sorted = DMatrix::from_fn(k, n, |i, j| vt[(order[i], j)]);
    SvdResult {
        u: ComplexMatrix::from_dmatrix(u_sorted),
        singular_values: order.iter().map(|&i| sv[i]).collect(),
        vh: ComplexMatrix::from_dmatrix(vh_sorted),
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a
        .as_dmatrix()
        .clone()
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn numerical_rank(a: &ComplexMatrix, tol: f64) -> usize {
    rank_from_singular_values(&singular_values(a), tol)
}

/// SVD whose `vh` is a full `n x n` unitary, padding wide inputs with zero rows.
fn svd_full_right(a: &ComplexMatrix) -> SvdResult {
    let (m, n) = a.shape();
    if m >= n {
        return svd(a);
    }
    let mut padded = DMatrix::zeros(n, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a.as_dmatrix());
    svd(&ComplexMatrix::from_dmatrix(padded))
}

/// Orthonormal basis (as columns) of `{x : A·x = 0}` under the relative rule.
pub fn nullspace(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = a.cols();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    if a.rows() == 0 {
        return ComplexMatrix::identity(n);
    }
    let dec = svd_full_right(a);
    let r = dec.rank(tol);
    dec.vh.block(r, 0, n - r, n).adjoint()
}

/// Orthonormal basis of the column space of `a` under the relative rule.
pub fn range_basis(a: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let dec = svd(a);
    let r = dec.rank(tol);
    dec.u.columns(0, r)
}

/// Minimum-norm least-squares solution with the default rank tolerance.
pub fn lstsq(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    lstsq_with_tol(a, b, DEFAULT_RANK_TOL)
}

/// Minimum-norm least-squares solution via the SVD pseudo-inverse.
pub fn lstsq_with_tol(a: &ComplexMatrix, b: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    if a.rows() != b.len() {
        return Err(Error::Shape(format!(
            "lstsq: matrix has {} rows, right-hand side has {}",
            a.rows(),
            b.len()
        )));
    }
    let dec = svd(a);
    let r = dec.rank(tol);
    let bv = DVector::from_column_slice(b);
    let u = dec.u.as_dmatrix().columns(0, r);
    let mut coeffs = u.adjoint() * bv;
    for (c, s) in coeffs.iter_mut().zip(&dec.singular_values) {
        *c /= *s;
    }
    let x = dec.vh.as_dmatrix().rows(0, r).adjoint() * coeffs;
    Ok(x.iter().copied().collect())
}

/// Rotates each column by a unit phase so its largest-modulus entry is real
/// and positive. Makes SVD-derived bases reproducible and readable.
pub fn canonicalize_column_phases(q: &mut ComplexMatrix) {
    for j in 0..q.cols() {
        let mut best = Complex64::new(0.0, 0.0);
        for i in 0..q.rows() {
            let z = q.get(i, j);
            if z.norm() > best.norm() * (1.0 + 1e-12) {
                best = z;
            }
        }
        if best.norm() == 0.0 {
            continue;
        }
        let phase = best.conj() / best.norm();
        for i in 0..q.rows() {
            q.set(i, j, q.get(i, j) * phase);
        }
    }
}

/// Orthonormal bases of `ran G` and its orthogonal complement.
#[derive(Debug, Clone)]
pub struct RangeDecomposition {
    /// `n x r`, spans the column space of `G`.
    pub q1: ComplexMatrix,
    /// `n x (n − r)`, spans `(ran G)^⊥`; zero columns when `G` has full rank.
    pub q2: ComplexMatrix,
}

impl RangeDecomposition {
    pub fn rank(&self) -> usize {
        self.q1.cols()
    }

    pub fn dim(&self) -> usize {
        self.q1.rows()
    }

    /// The unitary `[Q1 Q2]`.
    pub fn frame(&self) -> ComplexMatrix {
        self.q1
            .hstack(&self.q2)
            .expect("frame blocks share row count")
    }
}

pub fn range_decomposition(g: &ComplexMatrix, tol: f64) -> Result<RangeDecomposition> {
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::Shape(format!(
            "range decomposition needs a nonempty square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let n = g.rows();
    let dec = svd(g);
    let r = dec.rank(tol);
    if r == 0 {
        return Err(Error::DegenerateInput("G is zero within tolerance".into()));
    }
    let mut q1 = dec.u.columns(0, r);
    let mut q2 = dec.u.columns(r, n - r);
    canonicalize_column_phases(&mut q1);
    canonicalize_column_phases(&mut q2);
    Ok(RangeDecomposition { q1, q2 })
}
