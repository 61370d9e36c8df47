use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Small-noise Langevin experiments: constants, simulation and verdict reports.
#[derive(Debug, Parser)]
#[command(name = "langevin-gauss", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Problem definition (JSON).
    #[arg(long, value_name = "FILE", required_unless_present = "manifest")]
    pub problem: Option<PathBuf>,
    /// Runner settings (JSON); every key optional.
    #[arg(long, value_name = "FILE", conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Rerun from a manifest written by an earlier run.
    #[arg(long, value_name = "FILE", conflicts_with = "problem")]
    pub manifest: Option<PathBuf>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; every written path is relative to it.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Run noise levels at or above eps_star.
    #[arg(long)]
    pub override_eps_star: bool,
    /// Worker thread cap. Results do not depend on it.
    #[arg(long, env = "LANGEVIN_GAUSS_THREADS")]
    pub threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the hypotheses against the declared constants.
    Audit(Common),
    /// Print the derived constants (K, eps_star, C_star, ...).
    Constants(Common),
    /// Simulate an ensemble and dump snapshots.
    Sample(Common),
    /// Rescaled W2 to the Gaussian limit against K sqrt(eps).
    ScalingLaw(Common),
    /// Synchronous-coupling contraction.
    Coupling(Common),
    /// Transient and stationary second moments.
    SecondMoment(Common),
    /// Gap between the process and its linearisation.
    LinearizationGap(Common),
    /// Polynomial and exponential moments of exact OU draws.
    OuMoments(Common),
    /// Decay of the covariance flow to the Lyapunov solution.
    CovarianceDecay(Common),
    /// eps^-beta W_p(law, delta_0) as eps shrinks.
    Concentration(Common),
    /// W_p for several p at one noise level.
    Pwasserstein(Common),
    /// Monte Carlo against the 1D Gibbs quadrature.
    OracleGibbs(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Audit(_) => "audit",
            Command::Constants(_) => "constants",
            Command::Sample(_) => "sample",
            Command::ScalingLaw(_) => "scaling-law",
            Command::Coupling(_) => "coupling",
            Command::SecondMoment(_) => "second-moment",
            Command::LinearizationGap(_) => "linearization-gap",
            Command::OuMoments(_) => "ou-moments",
            Command::CovarianceDecay(_) => "covariance-decay",
            Command::Concentration(_) => "concentration",
            Command::Pwasserstein(_) => "pwasserstein",
            Command::OracleGibbs(_) => "oracle-gibbs",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Audit(c)
            | Command::Constants(c)
            | Command::Sample(c)
            | Command::ScalingLaw(c)
            | Command::Coupling(c)
            | Command::SecondMoment(c)
            | Command::LinearizationGap(c)
            | Command::OuMoments(c)
            | Command::CovarianceDecay(c)
            | Command::Concentration(c)
            | Command::Pwasserstein(c)
            | Command::OracleGibbs(c) => c,
        }
    }

    /// File stem of the outputs.
    pub fn stem(&self) -> String {
        self.name().replace('-', "_")
    }
}
