//! One runner per claim, each returning an [`ExperimentReport`] whose verdicts can be
//! recomputed from the stored numbers.

mod config;
mod constants;
mod coupling;
mod covariance;
mod gibbs;
mod moments;
mod report;
mod scaling;

pub use config::{ExperimentConfig, PairDoc, Resolved};
pub use constants::{constants, ConstantsReport};
pub use coupling::{run_coupling_contraction, run_linearization_gap, DEFAULT_COUPLING_TIMES, DEFAULT_GAP_EPSILONS};
pub use covariance::run_covariance_decay;
pub use gibbs::run_gibbs_crosscheck;
pub use moments::{run_ou_moment_suite, run_second_moment, DEFAULT_TRANSIENT_TIMES};
pub use report::{Cell, CellBuilder, ExperimentReport, Provenance, Relation, Verdict};
pub use scaling::{run_concentration, run_p_wasserstein, run_scaling_law, DEFAULT_EPSILONS};
