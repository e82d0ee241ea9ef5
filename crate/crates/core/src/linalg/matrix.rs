use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix with `f64` components.
///
/// Entries are always finite. Zero-sized dimensions are allowed so that an
/// empty orthogonal complement can be represented as an `n x 0` matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(idx) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite(idx));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Matrix unit `E_ij` of shape `rows x cols` (zero-based indices).
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(rows, cols);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        Self(m)
    }

    /// All matrix units of the given shape, ordered by column-stacked index.
    pub fn units(rows: usize, cols: usize) -> impl Iterator<Item = Self> {
        (0..cols).flat_map(move |j| (0..rows).map(move |i| Self::unit(rows, cols, i, j)))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.0[(i, j)] = z;
    }

    /// Row-major copy of the entries.
    pub fn row_major(&self) -> Vec<Complex64> {
        let (r, c) = self.shape();
        (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }

    /// Column-major view of the entries.
    pub fn column_major(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn try_matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diagonal().iter().sum()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows() == 0 || self.cols() == 0 {
            return 0.0;
        }
        super::decomp::singular_values(self)
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    /// Copy of the `rows x cols` sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((r0, c0), (rows, cols)).into_owned())
    }

    /// Columns `c0..c0+count`.
    pub fn columns(&self, c0: usize, count: usize) -> Self {
        self.block(0, c0, self.rows(), count)
    }

    /// `[self rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows() != rhs.rows() {
            return Err(Error::Shape(format!(
                "hstack row mismatch: {} vs {}",
                self.rows(),
                rhs.rows()
            )));
        }
        let mut m = DMatrix::zeros(self.rows(), self.cols() + rhs.cols());
        m.view_mut((0, 0), self.shape()).copy_from(&self.0);
        m.view_mut((0, self.cols()), rhs.shape()).copy_from(&rhs.0);
        Ok(Self(m))
    }

    /// Vertically stacks a list of blocks with equal column counts.
    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols());
        if let Some(bad) = blocks.iter().find(|b| b.cols() != cols) {
            return Err(Error::Shape(format!(
                "vstack column mismatch: {} vs {cols}",
                bad.cols()
            )));
        }
        let rows = blocks.iter().map(Self::rows).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let mut r0 = 0;
        for b in blocks {
            m.view_mut((r0, 0), b.shape()).copy_from(&b.0);
            r0 += b.rows();
        }
        Ok(Self(m))
    }

    /// Assembles a 2x2 block matrix `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows() != b.rows()
            || c.rows() != d.rows()
            || a.cols() != c.cols()
            || b.cols() != d.cols()
        {
            return Err(Error::Shape("inconsistent 2x2 block shapes".into()));
        }
        let top = a.hstack(b)?;
        let bottom = c.hstack(d)?;
        Self::vstack(&[top, bottom])
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    /// Frobenius distance `‖self − rhs‖_F`; panics on shape mismatch.
    pub fn distance(&self, rhs: &Self) -> f64 {
        (self - rhs).frobenius_norm()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

/// Exact-definition product; returns a shape error on mismatch.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.try_matmul(b)
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint()
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// Operator impls panic on shape mismatch, like nalgebra; fallible paths use `try_matmul`.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.row_major();
        MatrixJson {
            rows: self.rows(),
            cols: self.cols(),
            re: entries.iter().map(|z| z.re).collect(),
            im: Some(entries.iter().map(|z| z.im).collect()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(deserializer)?;
        let im = raw.im.unwrap_or_else(|| vec![0.0; raw.re.len()]);
        if im.len() != raw.re.len() {
            return Err(D::Error::custom(format!(
                "re has {} entries but im has {}",
                raw.re.len(),
                im.len()
            )));
        }
        let entries = raw
            .re
            .iter()
            .zip(&im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_row_major(raw.rows, raw.cols, entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_times_a_is_a() {
        let a = ComplexMatrix::from_row_major(
            2,
            2,
            vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0), c(4.0, 0.0)],
        )
        .unwrap();
        assert_eq!(matmul(&ComplexMatrix::identity(2), &a).unwrap(), a);
    }

    #[test]
    fn matrix_unit_product() {
        let e21 = ComplexMatrix::unit(2, 2, 1, 0);
        let e12 = ComplexMatrix::unit(2, 2, 0, 1);
        assert_eq!(matmul(&e21, &e12).unwrap(), ComplexMatrix::unit(2, 2, 1, 1));
    }

    #[test]
    fn times_zero_is_zero() {
        let a = ComplexMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 + 1.0));
        assert!(matmul(&a, &ComplexMatrix::zeros(2, 4)).unwrap().is_zero());
    }

    #[test]
    fn matmul_shape_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn adjoint_examples() {
        let i = ComplexMatrix::from_row_major(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(adjoint(&i).get(0, 0), c(0.0, -1.0));
        assert_eq!(
            adjoint(&ComplexMatrix::identity(3)),
            ComplexMatrix::identity(3)
        );
        assert_eq!(
            adjoint(&ComplexMatrix::unit(2, 2, 0, 1)),
            ComplexMatrix::unit(2, 2, 1, 0)
        );
    }

    #[test]
    fn rejects_non_finite() {
        let err = ComplexMatrix::from_row_major(1, 2, vec![c(0.0, 0.0), c(f64::NAN, 0.0)]);
        assert!(matches!(err, Err(Error::NonFinite(1))));
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0)]),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn json_im_optional() {
        let m: ComplexMatrix =
            serde_json::from_str(r#"{"rows":1,"cols":2,"re":[1.5,-2]}"#).unwrap();
        assert_eq!(m.get(0, 1), c(-2.0, 0.0));
        let bad =
            serde_json::from_str::<ComplexMatrix>(r#"{"rows":1,"cols":2,"re":[1,2],"im":[1]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn units_follow_column_stacking() {
        let units: Vec<_> = ComplexMatrix::units(2, 2).collect();
        assert_eq!(units[1], ComplexMatrix::unit(2, 2, 1, 0));
        assert_eq!(units[2], ComplexMatrix::unit(2, 2, 0, 1));
    }
}
