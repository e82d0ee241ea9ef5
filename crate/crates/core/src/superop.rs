//! Linear maps on `M_n(ℂ)` as `n² x n²` matrices acting on column-stacked
//! vectorizations, with `vec(A·X·B) = (Bᵀ ⊗ A)·vec(X)`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, DEFAULT_RANK_TOL};

/// Column-stacking vectorization: `vec([[a, c], [b, d]]) = (a, b, c, d)`.
pub fn vec(x: &ComplexMatrix) -> Vec<Complex64> {
    x.column_major().to_vec()
}

/// Inverse of [`vec`].
pub fn unvec(v: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::Shape(format!(
            "cannot unvec length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_dmatrix(
        nalgebra::DMatrix::from_column_slice(rows, cols, v),
    ))
}

/// Column vector `vec(x)` as an `(rows·cols) x 1` matrix.
pub fn vec_column(x: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(nalgebra::DMatrix::from_column_slice(
        x.rows() * x.cols(),
        1,
        x.column_major(),
    ))
}

/// A linear map `Φ: M_n(ℂ) → M_n(ℂ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    n: usize,
    matrix: ComplexMatrix,
}

impl SuperOperator {
    pub fn new(n: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (n * n, n * n) {
            return Err(Error::Shape(format!(
                "superoperator on {n}x{n} matrices needs a {0}x{0} matrix, got {1}x{2}",
                n * n,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { n, matrix })
    }

    /// Rebuilds a superoperator from `vec` of its `n² x n²` matrix.
    pub fn from_vec(n: usize, v: &[Complex64]) -> Result<Self> {
        Self::new(n, unvec(v, n * n, n * n)?)
    }

    /// Tabulates an arbitrary linear map by its action on matrix units.
    pub fn from_map(n: usize, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        let mut cols = Vec::with_capacity(n * n * n * n);
        for unit in ComplexMatrix::units(n, n) {
            let image = f(&unit);
            if image.shape() != (n, n) {
                return Err(Error::Shape("map output must be n x n".into()));
            }
            cols.extend_from_slice(image.column_major());
        }
        Self::from_vec(n, &cols)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            matrix: ComplexMatrix::identity(n * n),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            matrix: ComplexMatrix::zeros(n * n, n * n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `vec` of the `n² x n²` matrix; the coordinates used by constraint rows.
    pub fn to_vec(&self) -> Vec<Complex64> {
        vec(&self.matrix)
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.shape() != (self.n, self.n) {
            return Err(Error::Shape(format!(
                "superoperator on {0}x{0} applied to {1}x{2}",
                self.n,
                x.rows(),
                x.cols()
            )));
        }
        let out = &self.matrix * &vec_column(x);
        unvec(out.column_major(), self.n, self.n)
    }

    /// Composition `self ∘ rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Self::new(self.n, self.matrix.try_matmul(&rhs.matrix)?)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            n: self.n,
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self {
            n: self.n,
            matrix: &self.matrix - &rhs.matrix,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n: self.n,
            matrix: self.matrix.scale(s),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

#[derive(Serialize, Deserialize)]
struct SuperOperatorJson {
    n: usize,
    matrix: ComplexMatrix,
}

impl Serialize for SuperOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SuperOperatorJson {
            n: self.n,
            matrix: self.matrix.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SuperOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SuperOperatorJson::deserialize(deserializer)?;
        SuperOperator::new(raw.n, raw.matrix).map_err(serde::de::Error::custom)
    }
}

fn require_square(a: &ComplexMatrix, what: &str) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "{what} needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.rows())
}

/// `X ↦ A·X`, i.e. `Iₙ ⊗ A`.
pub fn lift_left(a: &ComplexMatrix) -> Result<SuperOperator> {
    let n = require_square(a, "lift_left")?;
    SuperOperator::new(n, ComplexMatrix::identity(n).kron(a))
}

/// `X ↦ X·B`, i.e. `Bᵀ ⊗ Iₙ`.
pub fn lift_right(b: &ComplexMatrix) -> Result<SuperOperator> {
    let n = require_square(b, "lift_right")?;
    SuperOperator::new(n, b.transpose().kron(&ComplexMatrix::identity(n)))
}

/// `X ↦ A·X·B`, i.e. `Bᵀ ⊗ A`.
pub fn lift_sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<SuperOperator> {
    let n = require_square(a, "lift_sandwich")?;
    if b.shape() != (n, n) {
        return Err(Error::Shape(
            "lift_sandwich factors must share dimension".into(),
        ));
    }
    SuperOperator::new(n, b.transpose().kron(a))
}

/// Inner derivation `ad_T: X ↦ X·T − T·X`.
pub fn lift_inner_derivation(t: &ComplexMatrix) -> Result<SuperOperator> {
    Ok(lift_right(t)?.sub(&lift_left(t)?))
}

/// The `n⁴ x n²` matrix of the linear map `vec(T) ↦ vec(ad_T)`.
pub fn inner_derivation_map(n: usize) -> ComplexMatrix {
    let mut data = Vec::with_capacity(n.pow(6));
    for unit in ComplexMatrix::units(n, n) {
        let ad = lift_inner_derivation(&unit).expect("unit is square");
        data.extend_from_slice(ad.matrix.column_major());
    }
    ComplexMatrix::from_dmatrix(nalgebra::DMatrix::from_column_slice(n.pow(4), n * n, &data))
}

/// Orthonormal columns spanning a subspace of `ℂ^ambient_dim`.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    basis: ComplexMatrix,
}

impl SubspaceBasis {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: ComplexMatrix) -> Self {
        Self { basis }
    }

    /// Orthonormal basis of the span of the given columns.
    pub fn span_of(vectors: &ComplexMatrix, tol: f64) -> Self {
        if vectors.cols() == 0 {
            return Self {
                basis: ComplexMatrix::zeros(vectors.rows(), 0),
            };
        }
        Self {
            basis: linalg::range_basis(vectors, tol),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Basis vector `j` reshaped as a superoperator on `n x n` matrices.
    pub fn superoperator(&self, n: usize, j: usize) -> Result<SuperOperator> {
        SuperOperator::from_vec(n, self.basis.columns(j, 1).column_major())
    }

    /// Superoperator for the coefficient vector `coeffs` in this basis.
    pub fn combination(&self, n: usize, coeffs: &[Complex64]) -> Result<SuperOperator> {
        if coeffs.len() != self.dim() {
            return Err(Error::Shape(
                "coefficient count differs from subspace dimension".into(),
            ));
        }
        let c = ComplexMatrix::from_dmatrix(nalgebra::DMatrix::from_column_slice(
            coeffs.len(),
            1,
            coeffs,
        ));
        let v = &self.basis * &c;
        SuperOperator::from_vec(n, v.column_major())
    }

    /// `‖(I − P)v‖₂` where `P` projects onto this subspace.
    pub fn distance_to(&self, v: &[Complex64]) -> f64 {
        let col = ComplexMatrix::from_dmatrix(nalgebra::DMatrix::from_column_slice(v.len(), 1, v));
        self.residual_of(&col).frobenius_norm()
    }

    /// `(I − UU†)·V` for a block of column vectors `V`.
    fn residual_of(&self, v: &ComplexMatrix) -> ComplexMatrix {
        let coeffs = &self.basis.adjoint() * v;
        v - &(&self.basis * &coeffs)
    }

    /// `‖(I − UU†)·inner‖₂`: zero iff `inner ⊆ self`.
    pub fn containment_gap(&self, inner: &Self) -> f64 {
        if inner.dim() == 0 {
            return 0.0;
        }
        self.residual_of(&inner.basis).spectral_norm()
    }

    /// Principal angles in radians, ascending, `min(dim U, dim V)` of them.
    ///
    /// Cosines come from `svd(U†V)` and sines from `svd((I − UU†)V)` (roles
    /// swapped when `V` is larger), combined with `atan2` so small angles
    /// keep full relative accuracy.
    pub fn principal_angles(&self, other: &Self) -> Vec<f64> {
        let (big, small) = if other.dim() <= self.dim() {
            (self, other)
        } else {
            (other, self)
        };
        let k = small.dim();
        if k == 0 {
            return Vec::new();
        }
        let cosines = linalg::singular_values(&(&big.basis.adjoint() * &small.basis));
        let mut sines = linalg::singular_values(&big.residual_of(&small.basis));
        sines.reverse();
        (0..k)
            .map(|i| {
                let c = cosines.get(i).copied().unwrap_or(0.0).min(1.0);
                let s = sines.get(i).copied().unwrap_or(0.0).min(1.0);
                s.atan2(c)
            })
            .collect()
    }

    pub fn max_principal_angle(&self, other: &Self) -> f64 {
        self.principal_angles(other).into_iter().fold(0.0, f64::max)
    }
}

/// Orthonormal basis of `{vec(ad_T) : T ∈ M_n}`; dimension `n² − 1` for `n ≥ 2`.
pub fn derivation_basis(n: usize) -> SubspaceBasis {
    derivation_basis_with_tol(n, DEFAULT_RANK_TOL)
}

pub fn derivation_basis_with_tol(n: usize, tol: f64) -> SubspaceBasis {
    SubspaceBasis::span_of(&inner_derivation_map(n), tol)
}

/// Verdict and maximal Leibniz defect of a superoperator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivationCheck {
    pub verdict: bool,
    pub residual: f64,
}

/// Checks `Φ(ST) = Φ(S)T + SΦ(T)` on all pairs of matrix units. The defect
/// is bilinear in `(S, T)`, so units suffice.
pub fn is_derivation(phi: &SuperOperator, tol: f64) -> DerivationCheck {
    let n = phi.n();
    let units: Vec<ComplexMatrix> = ComplexMatrix::units(n, n).collect();
    let images: Vec<ComplexMatrix> = units
        .iter()
        .map(|u| phi.apply(u).expect("unit has size n"))
        .collect();
    let index = |i: usize, j: usize| i + j * n;
    let zero = ComplexMatrix::zeros(n, n);
    let mut residual: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let a = index(i, j);
            for l in 0..n {
                for k in 0..n {
                    let b = index(k, l);
                    // E_ij·E_kl = δ_jk·E_il
                    let product_image = if j == k { &images[index(i, l)] } else { &zero };
                    let defect =
                        &(product_image - &(&images[a] * &units[b])) - &(&units[a] * &images[b]);
                    residual = residual.max(defect.frobenius_norm());
                }
            }
        }
    }
    DerivationCheck {
        verdict: residual <= tol,
        residual,
    }
}
