//! Numerical laboratory for maps that are derivable at a point `G` of `M_n(ℂ)`:
//! a map `Φ` is derivable at `G` when `Φ(G) = Φ(S)T + SΦ(T)` for every `ST = G`.
//!
//! The crate computes the space of such maps from sampled factorizations,
//! compares it with the derivations `X ↦ XT − TX`, recovers implementing
//! operators, evaluates the block identities these maps satisfy and solves
//! the intertwining problem `Y·φ(W) = ψ(Y)·W`.

pub mod cli;
pub mod derivable;
pub mod error;
pub mod extract;
pub mod factory;
pub mod json;
pub mod linalg;
pub mod superop;

pub use derivable::{
    saturate, verify_all_derivable, SaturateOptions, SolutionSpace, Verdict, VerificationReport,
};
pub use error::{Error, Result};
pub use extract::{block_identities, blockwise_recover, recover_implementing, solve_intertwining};
pub use linalg::{Complex64, ComplexMatrix};
pub use superop::{SubspaceBasis, SuperOperator};
