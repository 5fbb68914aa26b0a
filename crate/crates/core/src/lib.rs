//! Numerical toolkit for dually flat information geometry.
//!
//! The crate is organised around a strictly convex [`Potential`] `F` on an
//! open convex domain. Everything else is derived from it:
//!
//! - [`convex`]: gradients, Hessians, cubic tensors, Legendre-Fenchel
//!   conjugation and the Crouzeix identity.
//! - [`divergence`]: Bregman, canonical and skew Jensen parameter divergences,
//!   and the f-divergence family with its generator algebra.
//! - [`expfam`] / [`mixfam`]: exponential families (cumulant potentials) and
//!   mixture families with prescribed components (negative-entropy potentials,
//!   exact and Monte-Carlo).
//! - [`flat`]: dual geodesics, m-bisectors, Bregman projections onto affine
//!   submanifolds, Pythagorean residuals and alternating projections.
//! - [`fisher`]: Fisher information in several representations, skewness
//!   tensor, expected α-connections, Levi-Civita symbols, Fisher-Rao
//!   distances and Cramér-Rao checks.
//! - [`hypothesis`]: Bhattacharyya distance, Chernoff information and MAP
//!   error simulation.
//! - [`clustering`]: Bregman k-means with k-means++ seeding.

pub mod clustering;
pub mod convex;
pub mod diff;
pub mod divergence;
pub mod error;
pub mod expfam;
pub mod fisher;
pub mod flat;
pub mod hypothesis;
pub mod mixfam;
pub mod model;
pub mod optim;
pub mod quadrature;
pub mod rng;
pub mod tensor;

pub use convex::{Domain, Potential};
pub use error::{Error, Result};
pub use expfam::ExponentialFamily;
pub use mixfam::{ComponentDensity, MixtureFamily, MonteCarloGenerator};
pub use model::StatisticalModel;
pub use tensor::Tensor3;
