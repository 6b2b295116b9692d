//! Kubo-Ando mean calculus on finite-dimensional matrix algebras.
//!
//! The crate works with dense complex Hermitian matrices and provides:
//!
//! - [`hermitian`]: Hermitian values, spectral decomposition, Loewner-order
//!   predicates, spectral function calculus and projection primitives.
//! - [`monotone`]: representing functions of Kubo-Ando connections, their
//!   discrete Löwner measures, transposes and the h-part decomposition.
//! - [`means`]: evaluation of `A σ B` by the spectral formula and by the
//!   integral (parallel-sum quadrature) route, boundary handling via an
//!   ε-ladder, and the projection-norm formulas.
//! - [`order`]: effect intervals, disjoint pairs, maximality detection and
//!   the order-from-projection-norms criterion.
//! - [`preserver`]: candidate maps on the positive definite cone and the
//!   stage-by-stage pipeline that certifies whether a norm-of-mean
//!   preserving map extends to a Jordan *-isomorphism.
//! - [`verify`]: reusable property batteries shared by the CLI and the
//!   acceptance suite.
//!
//! All values are immutable after construction and every operation is a
//! pure function, so everything here is safe to call concurrently.

pub mod error;
pub mod hermitian;
pub mod json;
pub mod means;
pub mod monotone;
pub mod order;
pub mod preserver;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use hermitian::{
    cone_membership, loewner_leq, max_lambda_compression, range_projection, spectral_apply,
    spectral_projection_below, ConeMembership, HermitianMatrix, Projection,
    SpectralDecomposition, TolerancePolicy,
};
pub use means::{EpsLadder, MeanDescriptor};
pub use monotone::{DiscreteMeasure, HPart, RepresentingFunction};
