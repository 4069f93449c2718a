//! Certification of isometric embeddings into L_q spaces.
//!
//! Given a norm on R^n (n in {2, 3} for the full pipeline), this crate
//! expands H(x) = N(x)^q in real spherical harmonics, inverts the zonal
//! kernel |<x, xi>|^q through its Funk-Hecke eigenvalues to obtain the
//! representing density b_H with
//!
//! ```text
//! H(x) = int_{S^{n-1}} |<x, xi>|^q b_H(xi) d xi,
//! ```
//!
//! and decides embeddability of the space into L_q: a non-negative density
//! is exactly a Levy representation, hence an isometric embedding. Two tests
//! are layered: a sufficient closed-form bound on |b_H - c(q)| (cheap,
//! conservative) and a direct positivity scan of the computed density. A
//! feasibility search over the perturbation size lambda constructs a single
//! non-Hilbertian space embeddable into L_q for every q in a compact sample
//! set Q avoiding the even integers.
//!
//! The crate is generic over the floating-point scalar (see [`scalar::Real`]);
//! the `*64` aliases below pin the production `f64` instantiation.

// Domain guards are written as `!(x > 0)` so that NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod funk_hecke;
pub mod harmonics;
pub mod inversion;
pub mod sampling;
pub mod scalar;
pub mod specfun;
pub mod sphere;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type SphereGrid64 = sphere::SphereGrid<f64>;
pub type IntervalRule64 = sphere::IntervalRule<f64>;
pub type HarmonicCoefficients64 = harmonics::HarmonicCoefficients<f64>;
pub type EigenvalueTable64 = funk_hecke::EigenvalueTable<f64>;
pub type BoundConstants64 = funk_hecke::BoundConstants<f64>;
pub type DensityResult64 = inversion::DensityResult<f64>;
pub type NormSpec64 = certify::NormSpec<f64>;
pub type QSet64 = certify::QSet<f64>;
pub type EmbeddingCertificate64 = certify::EmbeddingCertificate<f64>;

/// `f32` instantiations, for quick low-precision scans.
pub type SphereGrid32 = sphere::SphereGrid<f32>;
pub type HarmonicCoefficients32 = harmonics::HarmonicCoefficients<f32>;
