//! Orthotrees of hyperbolic surfaces: exact ortho-spectra, Basmajian and
//! Bridgeman identity certificates, and the distance relations between
//! geodesics and horocycles that drive them.

pub mod farey;
pub mod halfplane;
pub mod identities;
pub mod orthotree;
pub mod relations;
pub mod scalar;
pub mod topograph;
pub mod verify;
pub mod weights;

pub use num_rational::BigRational;
pub use scalar::{cast, Mp, Real, Scalar};

/// Exact rational scalar.
pub type Exact = BigRational;
pub type F64 = f64;
pub type F128 = Mp<128>;
pub type F256 = Mp<256>;
