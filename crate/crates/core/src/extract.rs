//! Block decomposition of a superoperator relative to `ℋ = ran G ⊕ (ran G)^⊥`,
//! the identity battery satisfied by maps derivable at `G`, recovery of the
//! implementing operator of an inner derivation, and the intertwining solver
//! `Y·φ(W) = ψ(Y)·W ⟹ φ(W) = D·W, ψ(Y) = Y·D`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Complex64, ComplexMatrix, RangeDecomposition};
use crate::superop::{self, inner_derivation_map, is_derivation, vec_column, SuperOperator};

/// One of the four corners of a 2x2 block matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corner {
    B11,
    B12,
    B21,
    B22,
}

impl Corner {
    pub const ALL: [Corner; 4] = [Corner::B11, Corner::B12, Corner::B21, Corner::B22];

    fn index(self) -> usize {
        self as usize
    }

    /// `(row offset, col offset, rows, cols)` for rank `r` in dimension `n`.
    fn geometry(self, r: usize, n: usize) -> (usize, usize, usize, usize) {
        let m = n - r;
        match self {
            Corner::B11 => (0, 0, r, r),
            Corner::B12 => (0, r, r, m),
            Corner::B21 => (r, 0, m, r),
            Corner::B22 => (r, r, m, m),
        }
    }

    /// Global column-stacked indices of this corner, in local column-stacked order.
    fn vec_indices(self, r: usize, n: usize) -> Vec<usize> {
        let (r0, c0, rows, cols) = self.geometry(r, n);
        (0..cols)
            .flat_map(|j| (0..rows).map(move |i| (r0 + i) + (c0 + j) * n))
            .collect()
    }
}

/// Linear map between two corner blocks, as a matrix on column-stacked blocks.
#[derive(Debug, Clone)]
pub struct BlockMap {
    pub input_shape: (usize, usize),
    pub output_shape: (usize, usize),
    pub matrix: ComplexMatrix,
}

impl BlockMap {
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.shape(), self.input_shape, "block map input shape");
        let out = &self.matrix * &vec_column(x);
        superop::unvec(out.column_major(), self.output_shape.0, self.output_shape.1)
            .expect("shape by construction")
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }
}

/// The sixteen corner-to-corner maps of `Φ` in the frame `[Q1 Q2]`.
///
/// `A_ij`, `B_ij`, `C_ij`, `D_ij` take input in corner 11, 12, 21, 22
/// respectively and produce corner `ij` of the output.
#[derive(Debug, Clone)]
pub struct BlockMaps {
    pub r: usize,
    pub n: usize,
    pub frame: RangeDecomposition,
    maps: Vec<BlockMap>,
    /// `Φ` conjugated into block coordinates.
    pub rotated: SuperOperator,
}

impl BlockMaps {
    pub fn map(&self, input: Corner, output: Corner) -> &BlockMap {
        &self.maps[input.index() * 4 + output.index()]
    }

    pub fn a(&self, out: Corner) -> &BlockMap {
        self.map(Corner::B11, out)
    }

    pub fn b(&self, out: Corner) -> &BlockMap {
        self.map(Corner::B12, out)
    }

    pub fn c(&self, out: Corner) -> &BlockMap {
        self.map(Corner::B21, out)
    }

    pub fn d(&self, out: Corner) -> &BlockMap {
        self.map(Corner::B22, out)
    }

    pub fn corank(&self) -> usize {
        self.n - self.r
    }

    /// Splits an `n x n` block-coordinate matrix into its corner blocks.
    pub fn split(&self, x: &ComplexMatrix) -> [ComplexMatrix; 4] {
        Corner::ALL.map(|c| {
            let (r0, c0, rows, cols) = c.geometry(self.r, self.n);
            x.block(r0, c0, rows, cols)
        })
    }

    /// Sum of all block-map contributions for a block-coordinate input.
    pub fn reassemble(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let parts = self.split(x);
        let mut out = Corner::ALL.map(|c| {
            let (_, _, rows, cols) = c.geometry(self.r, self.n);
            ComplexMatrix::zeros(rows, cols)
        });
        for input in Corner::ALL {
            for output in Corner::ALL {
                let contribution = self.map(input, output).apply(&parts[input.index()]);
                out[output.index()] = &out[output.index()] + &contribution;
            }
        }
        let [o11, o12, o21, o22] = out;
        ComplexMatrix::from_blocks(&o11, &o12, &o21, &o22).expect("corner shapes")
    }
}

/// Decomposes `Φ` into its sixteen block maps relative to `ran G ⊕ (ran G)^⊥`.
pub fn block_maps(phi: &SuperOperator, g: &ComplexMatrix, tol: f64) -> Result<BlockMaps> {
    let n = phi.n();
    if g.shape() != (n, n) {
        return Err(Error::Shape("G and Φ act on different dimensions".into()));
    }
    let frame = linalg::range_decomposition(g, tol)?;
    let r = frame.rank();
    if r == n {
        return Err(Error::FullRank(
            "G has full rank; no block split exists, use recover_implementing directly".into(),
        ));
    }
    let q = frame.frame();
    // Ψ(X) = Q†·Φ(Q·X·Q†)·Q
    let into_frame = superop::lift_sandwich(&q, &q.adjoint())?;
    let out_of_frame = superop::lift_sandwich(&q.adjoint(), &q)?;
    let rotated = out_of_frame.compose(phi)?.compose(&into_frame)?;
    let mut maps = Vec::with_capacity(16);
    for input in Corner::ALL {
        let cols = input.vec_indices(r, n);
        let (_, _, ir, ic) = input.geometry(r, n);
        for output in Corner::ALL {
            let rows = output.vec_indices(r, n);
            let (_, _, or, oc) = output.geometry(r, n);
            let matrix = ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| {
                rotated.matrix().get(rows[i], cols[j])
            });
            maps.push(BlockMap {
                input_shape: (ir, ic),
                output_shape: (or, oc),
                matrix,
            });
        }
    }
    Ok(BlockMaps {
        r,
        n,
        frame,
        maps,
        rotated,
    })
}

/// Named residual of one identity in the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

/// Least-squares `(A, D)` from `A11(X) = XA − AX`, `D22(R) = RD − DR` and
/// `B12(Y) = YD − AY` over matrix units. The system is singular exactly along
/// `(A, D) ↦ (A + cI, D + cI)`; the minimum-norm solution is returned.
pub fn solve_corner_operators(bm: &BlockMaps) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (r, m) = (bm.r, bm.corank());
    let (na, nd) = (r * r, m * m);
    let id_r = ComplexMatrix::identity(r);
    let id_m = ComplexMatrix::identity(m);
    let mut row_blocks = Vec::new();
    let mut rhs: Vec<Complex64> = Vec::new();
    let pad = |left: Option<&ComplexMatrix>, right: Option<&ComplexMatrix>, rows: usize| {
        let l = left
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(rows, na));
        let rt = right
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(rows, nd));
        l.hstack(&rt).expect("equal rows")
    };
    for x in ComplexMatrix::units(r, r) {
        let coeff = &id_r.kron(&x) - &x.transpose().kron(&id_r);
        row_blocks.push(pad(Some(&coeff), None, na));
        rhs.extend(superop::vec(&bm.a(Corner::B11).apply(&x)));
    }
    for q in ComplexMatrix::units(m, m) {
        let coeff = &id_m.kron(&q) - &q.transpose().kron(&id_m);
        row_blocks.push(pad(None, Some(&coeff), nd));
        rhs.extend(superop::vec(&bm.d(Corner::B22).apply(&q)));
    }
    for y in ComplexMatrix::units(r, m) {
        let on_d = id_m.kron(&y);
        let on_a = -&y.transpose().kron(&id_r);
        row_blocks.push(pad(Some(&on_a), Some(&on_d), r * m));
        rhs.extend(superop::vec(&bm.b(Corner::B12).apply(&y)));
    }
    let system = ComplexMatrix::vstack(&row_blocks)?;
    let sol = linalg::lstsq(&system, &rhs)?;
    let a = superop::unvec(&sol[..na], r, r)?;
    let d = superop::unvec(&sol[na..], m, m)?;
    Ok((a, d))
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Evaluates every block identity satisfied by a map derivable at `G ≠ 0`
/// with `rank G < n`. Residuals are maxima over matrix-unit inputs and pass
/// when `residual ≤ tol·(1 + ‖Φ‖_F)·(1 + ‖G‖_F)`. Identities involving the
/// implementing corners `A`, `D` use [`solve_corner_operators`].
pub fn block_identities(bm: &BlockMaps, g: &ComplexMatrix, tol: f64) -> Result<Vec<IdentityCheck>> {
    use Corner::*;
    let (r, m) = (bm.r, bm.corank());
    let q1 = &bm.frame.q1;
    let e = &(&q1.adjoint() * g) * q1;
    let f = &(&q1.adjoint() * g) * &bm.frame.q2;
    let id1 = ComplexMatrix::identity(r);
    let id2 = ComplexMatrix::identity(m);
    let xs: Vec<_> = ComplexMatrix::units(r, r).collect();
    let ys: Vec<_> = ComplexMatrix::units(r, m).collect();
    let ws: Vec<_> = ComplexMatrix::units(m, r).collect();
    let rs: Vec<_> = ComplexMatrix::units(m, m).collect();
    let (a_op, d_op) = solve_corner_operators(bm)?;

    let a11_i = bm.a(B11).apply(&id1);
    let a12_i = bm.a(B12).apply(&id1);
    let a21_i = bm.a(B21).apply(&id1);
    let d21_i = bm.d(B21).apply(&id2);

    let zero_map = |map: &BlockMap, inputs: &[ComplexMatrix]| {
        max_over(inputs.iter().map(|x| map.apply(x).frobenius_norm()))
    };
    let pairwise =
        |left: &[ComplexMatrix],
         right: &[ComplexMatrix],
         f: &dyn Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix| {
            max_over(
                left.iter()
                    .flat_map(|a| right.iter().map(move |b| f(a, b).frobenius_norm())),
            )
        };
    let single = |inputs: &[ComplexMatrix], f: &dyn Fn(&ComplexMatrix) -> ComplexMatrix| {
        max_over(inputs.iter().map(|x| f(x).frobenius_norm()))
    };

    // invertible test operators on the corank block
    let upper = ComplexMatrix::from_fn(m, m, |i, j| {
        if i < j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let invertible_rs = [id2.clone(), &id2.scale_real(2.0) + &upper];

    let mut out: Vec<(String, f64)> = vec![
        ("A22 = 0".into(), zero_map(bm.a(B22), &xs)),
        ("B21 = 0".into(), zero_map(bm.b(B21), &ys)),
        ("C12 = 0".into(), zero_map(bm.c(B12), &ws)),
        ("D11 = 0".into(), zero_map(bm.d(B11), &rs)),
        (
            "B11(F) = A11(I)E + F·R⁻¹·D21(R) for invertible R".into(),
            max_over(invertible_rs.iter().map(|rr| {
                let rinv = ComplexMatrix::from_dmatrix(
                    rr.as_dmatrix().clone().try_inverse().expect("invertible"),
                );
                let rhs = &(&a11_i * &e) + &(&(&f * &rinv) * &bm.d(B21).apply(rr));
                bm.b(B11).apply(&f).distance(&rhs)
            })),
        ),
        (
            "A11(I)F + B11(Y)F − A12(YW) + C12(W) + Y·B22(F) + Y·C22(W) = 0".into(),
            pairwise(&ys, &ws, &|y, w| {
                let mut s = &(&a11_i * &f) + &(&bm.b(B11).apply(y) * &f);
                s = &s - &bm.a(B12).apply(&(y * w));
                s = &s + &bm.c(B12).apply(w);
                s = &s + &(y * &bm.b(B22).apply(&f));
                &s + &(y * &bm.c(B22).apply(w))
            }),
        ),
        ("A11(I)·F = 0".into(), (&a11_i * &f).frobenius_norm()),
        (
            "A12(YW) = Y·C22(W)".into(),
            pairwise(&ys, &ws, &|y, w| {
                &bm.a(B12).apply(&(y * w)) - &(y * &bm.c(B22).apply(w))
            }),
        ),
        (
            "B12(YR) = B12(Y)R + Y·D22(R) − A11(I)YR".into(),
            pairwise(&ys, &rs, &|y, rr| {
                let rhs = &(&(&bm.b(B12).apply(y) * rr) + &(y * &bm.d(B22).apply(rr)))
                    - &(&(&a11_i * y) * rr);
                &bm.b(B12).apply(&(y * rr)) - &rhs
            }),
        ),
        (
            "D12(R) = −A12(I)R".into(),
            single(&rs, &|rr| &bm.d(B12).apply(rr) + &(&a12_i * rr)),
        ),
        (
            "B11(XV)V + XV·B22(V) = 0".into(),
            pairwise(&xs, &ys, &|x, v| {
                let xv = x * v;
                &(&bm.b(B11).apply(&xv) * v) + &(&xv * &bm.b(B22).apply(v))
            }),
        ),
        (
            "B12(XV) = X·B12(V) + A11(X)V".into(),
            pairwise(&xs, &ys, &|x, v| {
                let rhs = &(x * &bm.b(B12).apply(v)) + &(&bm.a(B11).apply(x) * v);
                &bm.b(B12).apply(&(x * v)) - &rhs
            }),
        ),
        (
            "B22(V) = A21(I)V".into(),
            single(&ys, &|v| &bm.b(B22).apply(v) - &(&a21_i * v)),
        ),
        (
            "B11(Y) = Y·D21(I)".into(),
            single(&ys, &|y| &bm.b(B11).apply(y) - &(y * &d21_i)),
        ),
        (
            "D21(R) = R·D21(I)".into(),
            single(&rs, &|rr| &bm.d(B21).apply(rr) - &(rr * &d21_i)),
        ),
        (
            "C11(W) = −A12(I)W".into(),
            single(&ws, &|w| &bm.c(B11).apply(w) + &(&a12_i * w)),
        ),
        (
            "A12(X) = X·A12(I)".into(),
            single(&xs, &|x| &bm.a(B12).apply(x) - &(x * &a12_i)),
        ),
        (
            "C22(W) = W·A12(I)".into(),
            single(&ws, &|w| &bm.c(B22).apply(w) - &(w * &a12_i)),
        ),
        (
            "A21(X) = A21(I)X".into(),
            single(&xs, &|x| &bm.a(B21).apply(x) - &(&a21_i * x)),
        ),
        (
            "C21(W) = WA − DW".into(),
            single(&ws, &|w| {
                &bm.c(B21).apply(w) - &(&(w * &a_op) - &(&d_op * w))
            }),
        ),
        (
            "B12(Y) = YD − AY".into(),
            single(&ys, &|y| {
                &bm.b(B12).apply(y) - &(&(y * &d_op) - &(&a_op * y))
            }),
        ),
        (
            "D22(R) = RD − DR".into(),
            single(&rs, &|rr| {
                &bm.d(B22).apply(rr) - &(&(rr * &d_op) - &(&d_op * rr))
            }),
        ),
        ("A11(I) = 0".into(), a11_i.frobenius_norm()),
        (
            "D22 is a derivation".into(),
            is_derivation(&SuperOperator::new(m, bm.d(B22).matrix.clone())?, 0.0).residual,
        ),
        (
            "A11 is a derivation".into(),
            is_derivation(&SuperOperator::new(r, bm.a(B11).matrix.clone())?, 0.0).residual,
        ),
        (
            "D21(I) = −A21(I)".into(),
            (&d21_i + &a21_i).frobenius_norm(),
        ),
    ];

    // assembled conclusion: Ψ(X) = X·T_b − T_b·X with T_b = [[A, A12(I)], [D21(I), D]]
    let tb = ComplexMatrix::from_blocks(&a_op, &a12_i, &d21_i, &d_op)?;
    let ad_tb = superop::lift_inner_derivation(&tb)?;
    out.push((
        "Φ(X) = X·T − T·X with T = [[A, A12(I)], [D21(I), D]]".into(),
        max_over(ComplexMatrix::units(bm.n, bm.n).map(|x| {
            bm.rotated
                .apply(&x)
                .expect("n x n")
                .distance(&ad_tb.apply(&x).expect("n x n"))
        })),
    ));

    let scale = (1.0 + bm.rotated.frobenius_norm()) * (1.0 + g.frobenius_norm());
    Ok(out
        .into_iter()
        .map(|(name, residual)| IdentityCheck {
            name,
            residual,
            pass: residual <= tol * scale,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    TraceZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    LeastSquares,
    #[serde(rename = "paper_faithful")]
    Blockwise,
}

/// `T` with `Φ ≈ ad_T`, canonicalized to trace zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplementingOperator {
    #[serde(rename = "T")]
    pub t: ComplexMatrix,
    pub gauge: Gauge,
    /// `‖Φ − ad_T‖_F / max(1, ‖Φ‖_F)`.
    pub residual: f64,
    pub method: RecoveryMethod,
}

fn trace_zero(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let shift = t.trace() / n as f64;
    t - &ComplexMatrix::identity(n).scale(shift)
}

fn derivation_residual(phi: &SuperOperator, t: &ComplexMatrix) -> Result<f64> {
    let ad = superop::lift_inner_derivation(t)?;
    Ok(ad.sub(phi).frobenius_norm() / phi.frobenius_norm().max(1.0))
}

/// Minimum-norm least-squares `T` for `min_T ‖ad_T − Φ‖_F`, shifted to trace zero.
pub fn recover_implementing(phi: &SuperOperator, tol: f64) -> Result<ImplementingOperator> {
    let n = phi.n();
    let sol = linalg::lstsq_with_tol(&inner_derivation_map(n), &phi.to_vec(), tol)?;
    let t = trace_zero(&superop::unvec(&sol, n, n)?);
    let residual = derivation_residual(phi, &t)?;
    Ok(ImplementingOperator {
        t,
        gauge: Gauge::TraceZero,
        residual,
        method: RecoveryMethod::LeastSquares,
    })
}

/// Block-by-block reconstruction of `T`: `B = A12(I)`, `C = D21(I)`, and
/// `(A, D)` from one joint least-squares solve; then `T = Q·[[A, B], [C, D]]·Q†`
/// shifted to trace zero. Cross-checked against [`recover_implementing`].
pub fn blockwise_recover(
    phi: &SuperOperator,
    g: &ComplexMatrix,
    tol: f64,
) -> Result<ImplementingOperator> {
    let bm = block_maps(phi, g, tol)?;
    let b = bm.a(Corner::B12).apply(&ComplexMatrix::identity(bm.r));
    let c = bm
        .d(Corner::B21)
        .apply(&ComplexMatrix::identity(bm.corank()));
    let (a, d) = solve_corner_operators(&bm)?;
    let tb = ComplexMatrix::from_blocks(&a, &b, &c, &d)?;
    let q = bm.frame.frame();
    let t = trace_zero(&(&(&q * &tb) * &q.adjoint()));
    let residual = derivation_residual(phi, &t)?;
    let blockwise = ImplementingOperator {
        t,
        gauge: Gauge::TraceZero,
        residual,
        method: RecoveryMethod::Blockwise,
    };

    let least_squares = recover_implementing(phi, linalg::DEFAULT_RANK_TOL)?;
    let disagreement =
        blockwise.t.distance(&least_squares.t) / least_squares.t.frobenius_norm().max(1.0);
    if residual > tol || disagreement > tol {
        return Err(Error::ExtractionInconsistent {
            blockwise_residual: residual,
            least_squares_residual: least_squares.residual,
            disagreement,
            blockwise: Box::new(blockwise),
            least_squares: Box::new(least_squares),
        });
    }
    Ok(blockwise)
}

/// Recovered `D` with the residuals of both conclusions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntertwiningSolution {
    #[serde(rename = "D")]
    pub d: ComplexMatrix,
    pub hypothesis_residual: f64,
    pub phi_residual: f64,
    pub psi_residual: f64,
    pub scale: f64,
}

/// Given `φ` on `k x h` matrices and `ψ` on `h x k` matrices (as matrices on
/// column-stacked inputs) with `Y·φ(W) = ψ(Y)·W` for all `Y, W`, finds the
/// `k x k` operator `D` with `φ(W) = D·W` and `ψ(Y) = Y·D`.
///
/// The hypothesis is checked on every pair of matrix units first.
pub fn solve_intertwining(
    phi: &ComplexMatrix,
    psi: &ComplexMatrix,
    h: usize,
    k: usize,
    tol: f64,
) -> Result<IntertwiningSolution> {
    let kh = k * h;
    if h == 0 || k == 0 {
        return Err(Error::Shape("h and k must be positive".into()));
    }
    if phi.shape() != (kh, kh) || psi.shape() != (kh, kh) {
        return Err(Error::Shape(format!(
            "maps must be {kh}x{kh} for h={h}, k={k}; got {}x{} and {}x{}",
            phi.rows(),
            phi.cols(),
            psi.rows(),
            psi.cols()
        )));
    }
    let apply = |map: &ComplexMatrix, x: &ComplexMatrix, rows: usize, cols: usize| {
        let out = map * &vec_column(x);
        superop::unvec(out.column_major(), rows, cols).expect("shape by construction")
    };
    let scale = 1.0 + phi.frobenius_norm() + psi.frobenius_norm();
    let w_units: Vec<_> = ComplexMatrix::units(k, h).collect();
    let y_units: Vec<_> = ComplexMatrix::units(h, k).collect();
    let phi_w: Vec<_> = w_units.iter().map(|w| apply(phi, w, k, h)).collect();
    let psi_y: Vec<_> = y_units.iter().map(|y| apply(psi, y, h, k)).collect();
    let unit_index = |idx: usize, rows: usize| (idx % rows, idx / rows);

    let mut worst = (0.0, 0, 0);
    for (yi, y) in y_units.iter().enumerate() {
        for (wi, w) in w_units.iter().enumerate() {
            let res = (y * &phi_w[wi]).distance(&(&psi_y[yi] * w));
            if res > worst.0 {
                worst = (res, yi, wi);
            }
        }
    }
    let (hypothesis_residual, yi, wi) = worst;
    if hypothesis_residual > tol * scale {
        return Err(Error::HypothesisViolated {
            residual: hypothesis_residual,
            y_unit: unit_index(yi, h),
            w_unit: unit_index(wi, k),
        });
    }

    let id_k = ComplexMatrix::identity(k);
    let blocks: Vec<_> = w_units.iter().map(|w| w.transpose().kron(&id_k)).collect();
    let system = ComplexMatrix::vstack(&blocks)?;
    let rhs: Vec<Complex64> = phi_w.iter().flat_map(superop::vec).collect();
    let d = superop::unvec(&linalg::lstsq(&system, &rhs)?, k, k)?;

    let phi_residual = max_over(
        w_units
            .iter()
            .zip(&phi_w)
            .map(|(w, pw)| pw.distance(&(&d * w))),
    );
    let psi_residual = max_over(
        y_units
            .iter()
            .zip(&psi_y)
            .map(|(y, py)| py.distance(&(y * &d))),
    );
    for (what, residual) in [("φ(W) = D·W", phi_residual), ("ψ(Y) = Y·D", psi_residual)] {
        if residual > tol * scale {
            return Err(Error::NumericalTolerance {
                what,
                residual,
                bound: tol * scale,
            });
        }
    }
    Ok(IntertwiningSolution {
        d,
        hypothesis_residual,
        phi_residual,
        psi_residual,
        scale,
    })
}

/// `(φ, ψ)` with `φ(W) = D·W` on `k x h` and `ψ(Y) = Y·D` on `h x k`.
pub fn intertwining_pair(d: &ComplexMatrix, h: usize) -> (ComplexMatrix, ComplexMatrix) {
    let k = d.rows();
    let phi = ComplexMatrix::identity(h).kron(d);
    let psi = d.transpose().kron(&ComplexMatrix::identity(h));
    debug_assert_eq!(phi.shape(), (k * h, k * h));
    (phi, psi)
}
