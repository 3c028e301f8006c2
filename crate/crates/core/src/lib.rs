//! k-regular sequences, their kernel bases, and joint spectral radius bounds.
//!
//! A k-regular sequence is given by a linear representation
//! `f(n) = wᵀ·A_{i_0}·…·A_{i_s}·v` over the base-`k` digits of `n`. When the
//! matrices come from a basis of the span of the k-kernel, the growth exponent
//! `limsup log|f(n)| / log n` equals `log_k` of the joint spectral radius of
//! `{A_0, …, A_{k−1}}`. This crate computes both sides of that identity and
//! the explicit index families along which the growth is realised.

pub mod error;
pub mod growth;
pub mod jsr;
pub mod kernel;
pub mod linalg;
pub mod rep;
mod serde_float;
pub mod witness;

pub use error::{Error, Result};
pub use growth::{estimate_growth, verify_theorem, GrowthEstimate};
pub use jsr::{branch_and_bound, BnbOptions, JsrBracket, MatrixSet};
pub use kernel::{extract_basis, guess_regular, minimize, KernelBasis};
pub use linalg::{Matrix, NormKind, Scalar};
pub use rep::{catalog, DigitWord, LinearRep, Provenance, SequenceOracle};
pub use witness::{build_witness, WitnessFamily};
