//! Small-noise overdamped Langevin dynamics and its Gaussian limit.
//!
//! The crate simulates `dX = -F(X) dt + sqrt(eps) sigma(X) dB`, solves the
//! Lyapunov equation `DF(0) S + S DF(0)^T = sigma(0) sigma(0)^T` for the
//! limiting covariance, and measures how far the (rescaled) invariant law
//! is from `N(0, S)` in Wasserstein distance.
//!
//! Modules, bottom-up:
//!
//! * [`linalg`]: dense small matrices, `expm`, Jacobi eigen/sqrt, Lyapunov solvers.
//! * [`model`]: problem definitions, the field expression language, hypothesis audit
//!   and the 1D Gibbs density oracle.
//! * [`sde`]: counter-based noise, Euler-Maruyama ensembles, exact OU sampling and
//!   synchronous couplings.
//! * [`transport`]: empirical Wasserstein distances and moment estimators.
//! * [`experiments`]: derived constants and one runner per claim being checked.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod model;
pub mod sde;
pub mod stats;
pub mod transport;

pub use error::{Error, EvalError, Result};
pub use experiments::{ConstantsReport, ExperimentConfig, ExperimentReport};
pub use linalg::Matrix;
pub use model::{FieldExpr, HypothesisAudit, ProblemSpec};
pub use sde::{EnsembleSnapshot, SimConfig};
pub use transport::{DistanceEstimate, GaussianMeasure, TransportPlan};
