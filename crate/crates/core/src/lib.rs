//! Stability functional `Λ_β(m)` for a system of `N` spinless fermions
//! interacting with one distinguished particle of mass `m` through point
//! interactions.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: closed-form integrands, weights and analytic bounds.
//! * [`quadrature`]: the semi-infinite radial integral with its interior
//!   logarithmic singularity, plus the angular oracle.
//! * [`optimize`]: the supremum over the reduced `(Q, b)` domain, mass scans,
//!   landscapes and critical masses.
//! * [`validate`]: independent numerical oracles for every reduction step and
//!   trial-function checks of the quadratic-form inequalities.
//!
//! All functions work at the normalisation `|s̃| = 1`; the functional is
//! invariant under a joint rescaling of all momenta.

pub mod error;
pub mod kernels;
pub mod optimize;
pub mod quadrature;
pub mod validate;

pub use error::{Error, Result};
pub use kernels::{Beta, MassRatio, ReducedPoint, UnreducedPoint, Vec3};
pub use optimize::{LambdaResult, ScanRow};
pub use quadrature::{Integral, QuadratureSpec};
pub use validate::{ProbeReport, TrialFunction};
