//! Arithmetic regularity over F2^n.
//!
//! * [`gf2`]: vectors, subspaces, cosets and coordinate blocks over F2.
//! * [`fourier`]: spectra of bounded functions on affine subspaces and
//!   `eps`-regularity checks.
//! * [`instance`]: the tower-type construction that has no nonzero regular subspace.
//! * [`witness`]: irregularity certificates for that construction.
//! * [`decompose`]: energy-increment search for a regular subspace.
//! * [`rounding`]: randomized rounding to binary functions.

pub mod decompose;
pub mod error;
pub mod exact;
pub mod fourier;
pub mod gf2;
pub mod instance;
pub mod rng;
pub mod rounding;
pub mod witness;

pub use error::{Error, Result};
pub use exact::Epsilon;
pub use fourier::{FunctionTable, RegularityReport};
pub use gf2::{AffineSubspace, BlockStructure, F2Vector, Subspace, DEFAULT_DENSE_LIMIT};
