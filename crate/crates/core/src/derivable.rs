//! The linear system "Φ is derivable at G" and its solution space.
//!
//! For a pair `(S, T)` with `ST = G` the condition `Φ(G) = Φ(S)T + SΦ(T)`
//! is linear in the `n² x n²` matrix `M` of `Φ`:
//!
//! ```text
//! [ vec(G)ᵀ ⊗ I − vec(S)ᵀ ⊗ (Tᵀ ⊗ I) − vec(T)ᵀ ⊗ (I ⊗ S) ] · vec(M) = 0
//! ```
//!
//! Sampling pairs and stacking these `n² x n⁴` row blocks approximates the
//! universal quantifier over all factorizations; [`saturate`] stops once the
//! nullspace dimension is stable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factory::{self, BlockScheme, FactorizationPair, SchemeParams};
use crate::linalg::{self, random::sub_seed, ComplexMatrix, RangeDecomposition, DEFAULT_RANK_TOL};
use crate::superop::{derivation_basis_with_tol, SubspaceBasis, SuperOperator};

/// Default tolerance for principal angles and containment.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-7;

/// Pairs must factor `G` to this relative accuracy before they become rows.
pub const PAIR_TOL: f64 = 1e-9;

/// Constraint rows contributed by one factorization pair (unnormalized).
pub fn constraint_rows(p: &FactorizationPair, g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !factory::verify_pair(p, g, PAIR_TOL) {
        let residual =
            p.s.try_matmul(&p.t)
                .map(|st| st.distance(g))
                .unwrap_or(f64::INFINITY);
        return Err(Error::InvalidPair {
            residual,
            bound: PAIR_TOL * (1.0 + g.frobenius_norm()),
        });
    }
    let n = g.rows();
    let id_n = ComplexMatrix::identity(n);
    let id_nn = ComplexMatrix::identity(n * n);
    let row = |m: &ComplexMatrix| {
        ComplexMatrix::from_row_major(1, n * n, m.column_major().to_vec()).expect("finite")
    };
    let g_part = row(g).kron(&id_nn);
    let s_part = row(&p.s).kron(&p.t.transpose().kron(&id_n));
    let t_part = row(&p.t).kron(&id_n.kron(&p.s));
    Ok(&(&g_part - &s_part) - &t_part)
}

fn pair_weight(p: &FactorizationPair) -> f64 {
    1.0 / (1.0 + p.s.frobenius_norm() * p.t.frobenius_norm())
}

/// Stacked, normalized constraint rows with the pair ordinal of each block.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub n: usize,
    pub rows: ComplexMatrix,
    /// Pair ordinal for each consecutive block of `n²` rows.
    pub provenance: Vec<usize>,
}

impl ConstraintSystem {
    pub fn block(&self, k: usize) -> ComplexMatrix {
        let nn = self.n * self.n;
        self.rows.block(k * nn, 0, nn, self.rows.cols())
    }

    /// Largest row-block residual at `Φ`, relative to `max(1, ‖Φ‖_F)`.
    pub fn residual(&self, phi: &SuperOperator) -> f64 {
        let v = ComplexMatrix::from_row_major(self.rows.cols(), 1, phi.to_vec()).expect("finite");
        let applied = &self.rows * &v;
        let nn = self.n * self.n;
        let worst = (0..self.provenance.len())
            .map(|k| applied.block(k * nn, 0, nn, 1).frobenius_norm())
            .fold(0.0, f64::max);
        worst / phi.frobenius_norm().max(1.0)
    }
}

/// Knobs for [`saturate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturateOptions {
    pub batch: usize,
    pub max_pairs: usize,
    pub tol: f64,
}

impl SaturateOptions {
    /// `batch = 4n`, `max_pairs = 40n²`, `tol = 1e-9`.
    pub fn for_dim(n: usize) -> Self {
        Self {
            batch: 4 * n,
            max_pairs: 40 * n * n,
            tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Sampling families that can feed a saturation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFamily {
    /// Shift-constructed invertible `S`, `T = S⁻¹G`.
    Invertible,
    /// Gaussian `S`, `T = S⁻¹G`.
    Gaussian,
    /// `S·T = 0` with both factors nonzero (only meaningful for `G = 0`).
    ZeroProduct,
    /// Block substitutions cycling through every [`BlockScheme`].
    Structured,
}

impl PairFamily {
    fn tag(self) -> u64 {
        match self {
            PairFamily::Invertible => 0,
            PairFamily::Gaussian => 1,
            PairFamily::ZeroProduct => 2,
            PairFamily::Structured => 3,
        }
    }
}

/// Orthonormal basis of the sampled solution space plus saturation data.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    pub n: usize,
    pub basis: SubspaceBasis,
    pub saturated: bool,
    pub pairs_used: usize,
    /// Nullspace dimension after each batch.
    pub dim_history: Vec<usize>,
    /// Smallest retained singular value over `σ_max` (1 when the rank is 0).
    pub sigma_min_kept: f64,
    /// Largest discarded singular value over `σ_max` (0 when none).
    pub sigma_max_dropped: f64,
    /// Worst `‖ST − G‖_F` among the pairs used.
    pub max_pair_residual: f64,
}

impl SolutionSpace {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Distance from `vec(Φ)/‖Φ‖` to the solution space.
    pub fn relative_distance(&self, phi: &SuperOperator) -> f64 {
        let norm = phi.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.basis.distance_to(&phi.to_vec()) / norm
    }
}

/// Default families: zero-product pairs for `G = 0`, invertible pairs otherwise.
pub fn default_families(g: &ComplexMatrix, tol: f64) -> Vec<PairFamily> {
    if linalg::numerical_rank(g, tol) == 0 {
        vec![PairFamily::ZeroProduct]
    } else {
        vec![PairFamily::Invertible]
    }
}

/// Saturates with the default families for `G`.
pub fn saturate(
    g: &ComplexMatrix,
    seed: u64,
    opts: &SaturateOptions,
) -> Result<(SolutionSpace, ConstraintSystem)> {
    saturate_with(g, seed, opts, &default_families(g, opts.tol))
}

struct Sampler<'a> {
    g: &'a ComplexMatrix,
    seed: u64,
    families: &'a [PairFamily],
    frame: Option<RangeDecomposition>,
}

impl Sampler<'_> {
    fn pair(&self, ordinal: usize) -> Result<FactorizationPair> {
        let family = self.families[ordinal % self.families.len()];
        let index = (ordinal / self.families.len()) as u64;
        let family_seed = if family == PairFamily::Invertible {
            self.seed
        } else {
            sub_seed(self.seed, 1000 + family.tag())
        };
        match family {
            PairFamily::Invertible => factory::invertible_pair(self.g, family_seed, index),
            PairFamily::Gaussian => factory::gaussian_pair(self.g, family_seed, index),
            PairFamily::ZeroProduct => {
                factory::zero_product_pair(self.g.rows(), family_seed, index)
            }
            PairFamily::Structured => {
                let frame = self
                    .frame
                    .as_ref()
                    .expect("frame computed for structured family");
                let scheme = BlockScheme::ALL[index as usize % BlockScheme::ALL.len()];
                let params = SchemeParams::sample(
                    frame.rank(),
                    frame.q2.cols(),
                    sub_seed(family_seed, index),
                );
                factory::structured_pair(self.g, frame, scheme, &params)
            }
        }
    }
}

/// Appends normalized constraint batches until the nullspace dimension is
/// unchanged over two consecutive batches or `max_pairs` is reached.
///
/// Only an `n⁴ x n⁴` triangular factor of the stacked rows is kept between
/// batches (QR compression), so the singular values used for the rank
/// decision are those of the full stacked system.
pub fn saturate_with(
    g: &ComplexMatrix,
    seed: u64,
    opts: &SaturateOptions,
    families: &[PairFamily],
) -> Result<(SolutionSpace, ConstraintSystem)> {
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::Shape("G must be square and nonempty".into()));
    }
    if families.is_empty() || opts.batch == 0 {
        return Err(Error::Unsupported(
            "saturation needs at least one family and a positive batch".into(),
        ));
    }
    let n = g.rows();
    let unknowns = n.pow(4);
    let frame = if families.contains(&PairFamily::Structured) {
        Some(linalg::range_decomposition(g, opts.tol)?)
    } else {
        None
    };
    let sampler = Sampler {
        g,
        seed,
        families,
        frame,
    };

    let mut blocks: Vec<ComplexMatrix> = Vec::new();
    let mut provenance = Vec::new();
    let mut factor: Option<ComplexMatrix> = None;
    let mut history = Vec::new();
    let mut unchanged = 0;
    let mut pairs_used = 0;
    let mut max_pair_residual: f64 = 0.0;
    let mut current_dim = unknowns;

    while pairs_used < opts.max_pairs && unchanged < 2 {
        let count = opts.batch.min(opts.max_pairs - pairs_used);
        let batch: Vec<(usize, f64, ComplexMatrix)> = (pairs_used..pairs_used + count)
            .into_par_iter()
            .map(|ordinal| {
                let p = sampler.pair(ordinal)?;
                let rows = constraint_rows(&p, g)?.scale_real(pair_weight(&p));
                Ok((ordinal, p.residual, rows))
            })
            .collect::<Result<_>>()?;
        pairs_used += count;

        let mut stack = Vec::with_capacity(count + 1);
        stack.extend(factor.take());
        for (ordinal, residual, rows) in batch {
            max_pair_residual = max_pair_residual.max(residual);
            provenance.push(ordinal);
            stack.push(rows.clone());
            blocks.push(rows);
        }
        let stacked = ComplexMatrix::vstack(&stack)?;
        let compressed = if stacked.rows() > unknowns {
            ComplexMatrix::from_dmatrix(stacked.into_dmatrix().qr().r())
        } else {
            stacked
        };
        let dim = unknowns - linalg::numerical_rank(&compressed, opts.tol);
        factor = Some(compressed);
        if dim == current_dim && !history.is_empty() {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        current_dim = dim;
        history.push(dim);
    }

    let factor = factor.expect("at least one batch");
    let sv = linalg::singular_values(&factor);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = linalg::decomp::rank_from_singular_values(&sv, opts.tol);
    let (sigma_min_kept, sigma_max_dropped) = if smax == 0.0 {
        (1.0, 0.0)
    } else {
        (
            if rank > 0 { sv[rank - 1] / smax } else { 1.0 },
            sv.get(rank).map_or(0.0, |s| s / smax),
        )
    };
    let basis = SubspaceBasis::from_orthonormal(linalg::nullspace(&factor, opts.tol));
    let space = SolutionSpace {
        n,
        basis,
        saturated: unchanged >= 2,
        pairs_used,
        dim_history: history,
        sigma_min_kept,
        sigma_max_dropped,
        max_pair_residual,
    };
    let system = ConstraintSystem {
        n,
        rows: ComplexMatrix::vstack(&blocks)?,
        provenance,
    };
    Ok((space, system))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AllDerivablePoint,
    NotAllDerivablePoint,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub dim_solution: usize,
    pub dim_derivation: usize,
    pub containment_derivation_in_solution: bool,
    pub max_principal_angle: f64,
    pub verdict: Verdict,
}

/// Compares a solution space `u` with the derivation space `v`.
pub fn compare_subspaces(
    u: &SubspaceBasis,
    v: &SubspaceBasis,
    angle_tol: f64,
) -> Result<ComparisonReport> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::Shape(format!(
            "ambient dimensions differ: {} vs {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let containment = u.containment_gap(v) <= angle_tol;
    let max_angle = u.max_principal_angle(v);
    let verdict = if u.dim() == v.dim() && max_angle <= angle_tol {
        Verdict::AllDerivablePoint
    } else if u.dim() > v.dim() && containment {
        Verdict::NotAllDerivablePoint
    } else {
        Verdict::Inconclusive
    };
    Ok(ComparisonReport {
        dim_solution: u.dim(),
        dim_derivation: v.dim(),
        containment_derivation_in_solution: containment,
        max_principal_angle: max_angle,
        verdict,
    })
}

/// Outcome of one verification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub g_rank: usize,
    pub dim_solution: usize,
    pub dim_derivation: usize,
    pub containment: bool,
    pub max_principal_angle: f64,
    pub verdict: Verdict,
    pub theorem_consistent: bool,
    pub pairs_used: usize,
    pub seed: u64,
    pub tol: f64,
    pub angle_tol: f64,
    /// Wall time; `None` keeps reports byte-reproducible.
    pub runtime_ms: Option<u64>,
    pub saturated: bool,
    pub sigma_min_kept: f64,
    pub sigma_max_dropped: f64,
    pub max_pair_residual: f64,
}

impl VerificationReport {
    pub fn is_inconclusive(&self) -> bool {
        !self.saturated || self.verdict == Verdict::Inconclusive
    }
}

/// Saturates at `G`, compares with the derivation space and checks that the
/// outcome matches the characterization "all-derivable iff `G ≠ 0`".
///
/// Unsaturated runs come back with verdict `inconclusive` and
/// `theorem_consistent = false` rather than as an error so that callers can
/// still emit the report.
pub fn verify_all_derivable(
    g: &ComplexMatrix,
    seed: u64,
    opts: &SaturateOptions,
    angle_tol: f64,
) -> Result<(VerificationReport, SolutionSpace, ConstraintSystem)> {
    if !g.is_square() || g.rows() < 2 {
        return Err(Error::Unsupported(
            "verification needs a square G with n >= 2".into(),
        ));
    }
    let n = g.rows();
    let g_rank = linalg::numerical_rank(g, opts.tol);
    let (space, system) = saturate(g, seed, opts)?;
    let derivations = derivation_basis_with_tol(n, opts.tol);
    let mut cmp = compare_subspaces(&space.basis, &derivations, angle_tol)?;
    if !space.saturated {
        cmp.verdict = Verdict::Inconclusive;
    }
    let theorem_consistent = (g_rank > 0 && cmp.verdict == Verdict::AllDerivablePoint)
        || (g_rank == 0 && cmp.verdict == Verdict::NotAllDerivablePoint);
    let report = VerificationReport {
        n,
        g_rank,
        dim_solution: cmp.dim_solution,
        dim_derivation: cmp.dim_derivation,
        containment: cmp.containment_derivation_in_solution,
        max_principal_angle: cmp.max_principal_angle,
        verdict: cmp.verdict,
        theorem_consistent,
        pairs_used: space.pairs_used,
        seed,
        tol: opts.tol,
        angle_tol,
        runtime_ms: None,
        saturated: space.saturated,
        sigma_min_kept: space.sigma_min_kept,
        sigma_max_dropped: space.sigma_max_dropped,
        max_pair_residual: space.max_pair_residual,
    };
    Ok((report, space, system))
}

/// Dimensions and alignment of the invertible-only and augmented solution spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub dim_invertible_only: usize,
    pub dim_augmented: usize,
    pub max_principal_angle: f64,
    pub augmented_family: PairFamily,
    pub equivalent: bool,
}

/// Saturates once with invertible-`S` pairs only and once with additional
/// pairs from outside that family: structured block substitutions when `G`
/// is rank-deficient, Gaussian `S` when `G` is invertible (every factor of an
/// invertible `G` is invertible, so no structured family exists there).
pub fn invertible_only_comparison(
    g: &ComplexMatrix,
    seed: u64,
    opts: &SaturateOptions,
    angle_tol: f64,
) -> Result<EquivalenceReport> {
    let rank = linalg::numerical_rank(g, opts.tol);
    if rank == 0 {
        return Err(Error::DegenerateInput(
            "invertible-only equivalence needs G != 0".into(),
        ));
    }
    let extra = if rank < g.rows() {
        PairFamily::Structured
    } else {
        PairFamily::Gaussian
    };
    let (only, _) = saturate_with(g, seed, opts, &[PairFamily::Invertible])?;
    let (augmented, _) =
        saturate_with(g, sub_seed(seed, 1), opts, &[PairFamily::Invertible, extra])?;
    for run in [&only, &augmented] {
        if !run.saturated {
            return Err(Error::Inconclusive {
                pairs_used: run.pairs_used,
                history: run.dim_history.clone(),
            });
        }
    }
    let angle = only.basis.max_principal_angle(&augmented.basis);
    Ok(EquivalenceReport {
        dim_invertible_only: only.dim(),
        dim_augmented: augmented.dim(),
        max_principal_angle: angle,
        augmented_family: extra,
        equivalent: only.dim() == augmented.dim() && angle <= angle_tol,
    })
}

pub fn invertible_only_equivalence(
    g: &ComplexMatrix,
    seed: u64,
    opts: &SaturateOptions,
    angle_tol: f64,
) -> Result<bool> {
    Ok(invertible_only_comparison(g, seed, opts, angle_tol)?.equivalent)
}

/// `‖block·vec(Φ)‖` for one row block.
pub fn block_residual(block: &ComplexMatrix, phi: &SuperOperator) -> f64 {
    let v = ComplexMatrix::from_row_major(block.cols(), 1, phi.to_vec()).expect("finite");
    (block * &v).frobenius_norm()
}
