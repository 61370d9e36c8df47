//! Trajectory simulation.

mod config;
mod coupling;
mod ensemble;
mod ou;
mod rng;

pub use config::{default_dt, SimConfig, StepPlan, BLOWUP_THRESHOLD};
pub use coupling::{coupled_pair_linearization, coupled_pair_nonlinear, CouplingSeries};
pub use ensemble::{em_step, read_snapshots_csv, simulate_ensemble, write_snapshots_csv, EnsembleSnapshot};
pub use ou::{ou_exact_sample, ou_marginal, ou_pair_sq_distance};
pub use rng::{NoisePath, NoiseStream};
