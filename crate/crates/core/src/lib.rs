//! Simulation of the symmetric continuous-variable entanglement distillation
//! protocol built from two-copy de-Gaussification and iterative Gaussification.
//!
//! The crate has two numerical layers that check each other:
//!
//! - [`gaussian`]: exact covariance-matrix calculus for the symmetric two-mode
//!   family parametrized by `(C, S)` or equivalently by a two-mode squeezed
//!   vacuum `r` sent through loss `T`.
//! - [`fock`]: truncated Fock-space states, channels, filters and
//!   measurements, applied by contracting only the affected modes.
//!
//! On top of these sit [`gaussify`] (the iterative Gaussification map and its
//! Gaussian fixed point), [`degauss`] (single-photon subtraction, local
//! Gaussian filters and the two-copy Mach-Zehnder filter) and [`protocol`]
//! (stages, `q` tuning, nested runs and figure data).
//!
//! Mode order in multimode tensors is copy-major with Alice before Bob inside
//! each copy: `A, B` for the first copy, `C, D` for the second.

pub mod degauss;
mod error;
pub mod fock;
pub mod gaussian;
pub mod gaussify;
pub mod protocol;
mod solve;
mod tolerance;

pub use error::{Error, Result};
pub use fock::{FockArray, FockKind, WeightedState};
pub use gaussian::{ChannelParametrization, CovarianceMatrix, GaussianOperation, SymmetricGaussianState};
pub use gaussify::SigmaElements;
pub use protocol::{ProtocolConfig, StageReport};
pub use tolerance::Tolerances;
