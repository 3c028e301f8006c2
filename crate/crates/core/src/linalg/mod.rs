//! Dense linear algebra for small dimensions: exact rational matrices for
//! sequence evaluation, float matrices for norms and spectral bounds.

mod float;
mod matrix;
mod scalar;
mod span;

pub use float::{
    bracket_with_trend, dominant_pair_estimate, spectral_radius_bracket, spectral_radius_lower,
    spectral_radius_schur, DominantPair, FMat, ScaledMat,
};
pub use matrix::{dot, mat_mul, mat_norm, scalars_from_i64, unit_vector, Matrix, NormKind};
pub use scalar::Scalar;
pub use span::{rank, solve_in_span, Echelon, Insert};
