//! Generators of factorization pairs `(S, T)` with `S·T = G`.
//!
//! Three sampling families feed the constraint solver: invertible `S`
//! (sufficient for any `G ≠ 0`), zero-product pairs for `G = 0`, and
//! structured block substitutions written in the coordinates of
//! `ℋ = ran G ⊕ (ran G)^⊥`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::{self, log_uniform_scalar, random_matrix_from, rng};
use crate::linalg::{svd, ComplexMatrix, RangeDecomposition};

/// Condition-number cap handed to [`random::random_invertible`].
pub const PAIR_COND_MAX: f64 = 1e6;

/// A factorization `S·T ≈ G` together with its residual `‖S·T − G‖_F`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorizationPair {
    #[serde(rename = "S")]
    pub s: ComplexMatrix,
    #[serde(rename = "T")]
    pub t: ComplexMatrix,
    pub residual: f64,
}

impl FactorizationPair {
    pub fn new(s: ComplexMatrix, t: ComplexMatrix, g: &ComplexMatrix) -> Result<Self> {
        let product = s.try_matmul(&t)?;
        if product.shape() != g.shape() {
            return Err(Error::Shape("pair product and G differ in shape".into()));
        }
        let residual = product.distance(g);
        Ok(Self { s, t, residual })
    }
}

/// `‖S·T − G‖_F ≤ tol·(1 + ‖G‖_F)`.
pub fn verify_pair(p: &FactorizationPair, g: &ComplexMatrix, tol: f64) -> bool {
    match p.s.try_matmul(&p.t) {
        Ok(st) if st.shape() == g.shape() => st.distance(g) <= tol * (1.0 + g.frobenius_norm()),
        _ => false,
    }
}

fn solve_left(s: &ComplexMatrix, g: &ComplexMatrix) -> ComplexMatrix {
    let t = s
        .as_dmatrix()
        .clone()
        .lu()
        .solve(g.as_dmatrix())
        .expect("factor is invertible by construction");
    ComplexMatrix::from_dmatrix(t)
}

fn require_square(g: &ComplexMatrix) -> Result<usize> {
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::Shape(format!(
            "G must be square and nonempty, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    Ok(g.rows())
}

/// Pair number `index` of the invertible family: `S = random_invertible`, `T = S⁻¹G`.
pub fn invertible_pair(g: &ComplexMatrix, seed: u64, index: u64) -> Result<FactorizationPair> {
    let n = require_square(g)?;
    let s = random::random_invertible(n, random::sub_seed(seed, index), PAIR_COND_MAX);
    let t = solve_left(&s, g);
    FactorizationPair::new(s, t, g)
}

pub fn pairs_invertible(
    g: &ComplexMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<FactorizationPair>> {
    (0..count as u64)
        .map(|i| invertible_pair(g, seed, i))
        .collect()
}

/// Pair number `index` with a plain Gaussian `S` (generically invertible, not
/// shift-constructed) and `T = S⁻¹G`.
pub fn gaussian_pair(g: &ComplexMatrix, seed: u64, index: u64) -> Result<FactorizationPair> {
    let n = require_square(g)?;
    let s = random::random_matrix(n, n, random::sub_seed(seed, index));
    let t = solve_left(&s, g);
    FactorizationPair::new(s, t, g)
}

/// Pair number `index` with `S·T = 0` and both factors nonzero.
pub fn zero_product_pair(n: usize, seed: u64, index: u64) -> Result<FactorizationPair> {
    if n < 2 {
        return Err(Error::Unsupported("zero-product pairs need n >= 2".into()));
    }
    use rand::Rng;
    let mut r = rng(random::sub_seed(seed, index));
    let rank = r.random_range(1..n);
    let dec = svd(&random_matrix_from(&mut r, n, n));
    let mut s = dec.u.columns(0, rank);
    for j in 0..rank {
        let scaled = s.columns(j, 1).scale_real(dec.singular_values[j]);
        for i in 0..n {
            s.set(i, j, scaled.get(i, 0));
        }
    }
    let s = &s * &dec.vh.block(0, 0, rank, n);
    let kernel = dec.vh.block(rank, 0, n - rank, n).adjoint();
    let t = &kernel * &random_matrix_from(&mut r, n - rank, n);
    FactorizationPair::new(s, t, &ComplexMatrix::zeros(n, n))
}

pub fn pairs_zero_product(n: usize, count: usize, seed: u64) -> Result<Vec<FactorizationPair>> {
    (0..count as u64)
        .map(|i| zero_product_pair(n, seed, i))
        .collect()
}

/// Block substitution families for rank-deficient `G = [[E, F], [0, 0]]`.
///
/// In block coordinates every scheme has `S = [[X, Y], [0, 0]]` and
/// `T = [[U, V], [W, R]]` with `XU + YW = E` and `XV + YR = F`. Parameters
/// `X₀, R₀` are invertible, `Y₀, V₀, W₀` arbitrary, `λ, μ` nonzero reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockScheme {
    /// `X = X₀, Y = λF, U = X⁻¹E, V = 0, W = 0, R = λ⁻¹I`.
    CornerInverse,
    /// `X = I, Y = λY₀, U = E, V = F, W = 0, R = 0`.
    FreeY,
    /// `X = I, Y = F·(λR₀)⁻¹, U = E, V = 0, W = 0, R = λR₀`.
    FactoredF,
    /// `X = I, Y = λY₀, W = λW₀, U = E − YW, V = F, R = 0`.
    CoupledW,
    /// `X = I, Y = λY₀, R = μR₀, U = E, V = F − YR, W = 0`.
    ResidualV,
    /// `X = λI, Y = μ(F − λV₀), U = λ⁻¹E, V = V₀, W = 0, R = μ⁻¹I`.
    /// (Taking `V = F − YR` instead would break `XV + YR = F`.)
    ScalarCorners,
    /// `X = λX₀, V = μV₀, Y = F − XV, U = X⁻¹E, W = 0, R = I`.
    ScaledXV,
    /// `X = I, V = V₀, Y = F − V, U = E, W = 0, R = I`.
    UnitCorners,
    /// `X = λI, Y = Y₀, R = R₀, U = λ⁻¹E, V = λ⁻¹(F − YR), W = 0`.
    ScalarXResidualV,
    /// `X = λX₀, Y = 0, U = X⁻¹E, V = X⁻¹F, W = W₀, R = 0`.
    ZeroY,
    /// Same substitution as `ScaledXV` without the scalars: `X = X₀, V = V₀`.
    UnscaledXV,
}

impl BlockScheme {
    pub const ALL: [BlockScheme; 11] = [
        BlockScheme::CornerInverse,
        BlockScheme::FreeY,
        BlockScheme::FactoredF,
        BlockScheme::CoupledW,
        BlockScheme::ResidualV,
        BlockScheme::ScalarCorners,
        BlockScheme::ScaledXV,
        BlockScheme::UnitCorners,
        BlockScheme::ScalarXResidualV,
        BlockScheme::ZeroY,
        BlockScheme::UnscaledXV,
    ];
}

/// Free parameters of a structured substitution, in block shapes
/// `x: r×r`, `y, v: r×m`, `w: m×r`, `r: m×m` with `m = n − r`.
#[derive(Debug, Clone)]
pub struct SchemeParams {
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
    pub r: ComplexMatrix,
    pub lambda: f64,
    pub mu: f64,
}

impl SchemeParams {
    /// Seeded parameters: `x` and `r` invertible, scalars log-uniform in `[0.5, 2]`.
    pub fn sample(rank: usize, corank: usize, seed: u64) -> Self {
        let mut g = rng(seed);
        use rand::Rng;
        let x_seed = g.random();
        let r_seed = g.random();
        Self {
            x: random::random_invertible(rank, x_seed, PAIR_COND_MAX),
            y: random_matrix_from(&mut g, rank, corank),
            v: random_matrix_from(&mut g, rank, corank),
            w: random_matrix_from(&mut g, corank, rank),
            r: random::random_invertible(corank, r_seed, PAIR_COND_MAX),
            lambda: log_uniform_scalar(&mut g),
            mu: log_uniform_scalar(&mut g),
        }
    }
}

fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.as_dmatrix()
        .clone()
        .try_inverse()
        .map(ComplexMatrix::from_dmatrix)
        .ok_or_else(|| Error::DegenerateInput("scheme parameter must be invertible".into()))
}

/// `S` and `T` of a structured scheme in block coordinates relative to `frame`.
pub fn structured_blocks(
    g: &ComplexMatrix,
    frame: &RangeDecomposition,
    scheme: BlockScheme,
    p: &SchemeParams,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = require_square(g)?;
    if frame.dim() != n {
        return Err(Error::Shape("frame dimension differs from G".into()));
    }
    let (rk, m) = (frame.rank(), frame.q2.cols());
    if m == 0 {
        return Err(Error::Unsupported(
            "structured schemes need rank-deficient G".into(),
        ));
    }
    if p.x.shape() != (rk, rk)
        || p.y.shape() != (rk, m)
        || p.v.shape() != (rk, m)
        || p.w.shape() != (m, rk)
        || p.r.shape() != (m, m)
    {
        return Err(Error::Shape(
            "scheme parameters do not match block shapes".into(),
        ));
    }
    if p.lambda == 0.0 || p.mu == 0.0 {
        return Err(Error::DegenerateInput(
            "scheme scalars must be nonzero".into(),
        ));
    }
    let e = &(&frame.q1.adjoint() * g) * &frame.q1;
    let f = &(&frame.q1.adjoint() * g) * &frame.q2;
    let id1 = ComplexMatrix::identity(rk);
    let id2 = ComplexMatrix::identity(m);
    let (lam, mu) = (p.lambda, p.mu);
    let zero_y = ComplexMatrix::zeros(rk, m);
    let zero_w = ComplexMatrix::zeros(m, rk);
    let zero_r = ComplexMatrix::zeros(m, m);

    // (X, Y, U, V, W, R)
    let (x, y, u, v, w, r) = match scheme {
        BlockScheme::CornerInverse => {
            let u = &inverse(&p.x)? * &e;
            (
                p.x.clone(),
                f.scale_real(lam),
                u,
                zero_y.clone(),
                zero_w,
                id2.scale_real(1.0 / lam),
            )
        }
        BlockScheme::FreeY => (id1, p.y.scale_real(lam), e, f, zero_w, zero_r),
        BlockScheme::FactoredF => {
            let r = p.r.scale_real(lam);
            let y = &f * &inverse(&r)?;
            (id1, y, e, zero_y.clone(), zero_w, r)
        }
        BlockScheme::CoupledW => {
            let y = p.y.scale_real(lam);
            let w = p.w.scale_real(lam);
            let u = &e - &(&y * &w);
            (id1, y, u, f, w, zero_r)
        }
        BlockScheme::ResidualV => {
            let y = p.y.scale_real(lam);
            let r = p.r.scale_real(mu);
            let v = &f - &(&y * &r);
            (id1, y, e, v, zero_w, r)
        }
        BlockScheme::ScalarCorners => {
            let y = (&f - &p.v.scale_real(lam)).scale_real(mu);
            (
                id1.scale_real(lam),
                y,
                e.scale_real(1.0 / lam),
                p.v.clone(),
                zero_w,
                id2.scale_real(1.0 / mu),
            )
        }
        BlockScheme::ScaledXV | BlockScheme::UnscaledXV => {
            let (x, v) = if scheme == BlockScheme::ScaledXV {
                (p.x.scale_real(lam), p.v.scale_real(mu))
            } else {
                (p.x.clone(), p.v.clone())
            };
            let y = &f - &(&x * &v);
            let u = &inverse(&x)? * &e;
            (x, y, u, v, zero_w, id2)
        }
        BlockScheme::UnitCorners => {
            let y = &f - &p.v;
            (id1, y, e, p.v.clone(), zero_w, id2)
        }
        BlockScheme::ScalarXResidualV => {
            let v = (&f - &(&p.y * &p.r)).scale_real(1.0 / lam);
            (
                id1.scale_real(lam),
                p.y.clone(),
                e.scale_real(1.0 / lam),
                v,
                zero_w,
                p.r.clone(),
            )
        }
        BlockScheme::ZeroY => {
            let x = p.x.scale_real(lam);
            let xinv = inverse(&x)?;
            let u = &xinv * &e;
            let v = &xinv * &f;
            (x, zero_y.clone(), u, v, p.w.clone(), zero_r)
        }
    };
    let s_blocks = ComplexMatrix::from_blocks(
        &x,
        &y,
        &ComplexMatrix::zeros(m, rk),
        &ComplexMatrix::zeros(m, m),
    )?;
    let t_blocks = ComplexMatrix::from_blocks(&u, &v, &w, &r)?;
    Ok((s_blocks, t_blocks))
}

/// One structured pair with explicit parameters, rotated back to standard
/// coordinates via `[Q1 Q2]`.
pub fn structured_pair(
    g: &ComplexMatrix,
    frame: &RangeDecomposition,
    scheme: BlockScheme,
    params: &SchemeParams,
) -> Result<FactorizationPair> {
    let (sb, tb) = structured_blocks(g, frame, scheme, params)?;
    let q = frame.frame();
    let s = &(&q * &sb) * &q.adjoint();
    let t = &(&q * &tb) * &q.adjoint();
    FactorizationPair::new(s, t, g)
}

/// `count` seeded pairs from one structured scheme.
pub fn pairs_structured(
    g: &ComplexMatrix,
    frame: &RangeDecomposition,
    scheme: BlockScheme,
    count: usize,
    seed: u64,
) -> Result<Vec<FactorizationPair>> {
    if frame.rank() == 0 || frame.q2.cols() == 0 {
        return Err(Error::Unsupported(
            "structured schemes need 0 < rank G < n".into(),
        ));
    }
    (0..count as u64)
        .map(|i| {
            let params =
                SchemeParams::sample(frame.rank(), frame.q2.cols(), random::sub_seed(seed, i));
            structured_pair(g, frame, scheme, &params)
        })
        .collect()
}
