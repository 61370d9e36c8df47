use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;

/// Paths whose norm exceeds this are counted as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Noise level in `[0, 1]`; zero gives the deterministic flow.
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Increasing times in `[0, t_end]`, the last one equal to `t_end`.
    pub record_times: Vec<f64>,
    /// Initial state (default: the origin).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub override_eps_star: bool,
    /// Blow-ups are hard errors instead of exclusions.
    #[serde(default)]
    pub acceptance: bool,
}

/// Step grid derived from a config: `n_steps` equal steps of `dt_eff <= dt` and the step
/// index of every record time.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    pub n_steps: u64,
    pub dt_eff: f64,
    pub record_steps: Vec<u64>,
}

/// Default step `min(1e-3, 0.01 / delta, 0.01 / ‖DF(0)‖_F)`.
pub fn default_dt(spec: &ProblemSpec) -> f64 {
    let jn = spec.jacobian_at_zero().fro_norm();
    1e-3f64.min(0.01 / spec.constants().delta).min(if jn > 0.0 { 0.01 / jn } else { f64::INFINITY })
}

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

impl SimConfig {
    /// A config recording only at `t_end`.
    pub fn new(epsilon: f64, dt: f64, t_end: f64, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            epsilon,
            dt,
            t_end,
            n_paths,
            seed,
            record_times: vec![t_end],
            x0: None,
            override_eps_star: false,
            acceptance: false,
        }
    }

    pub fn with_record_times(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn acceptance(mut self) -> Self {
        self.acceptance = true;
        self
    }

    pub fn validate(&self, d: usize) -> Result<StepPlan> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(cfg_err("epsilon", format!("must lie in [0, 1], got {}", self.epsilon)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(cfg_err("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(cfg_err("t_end", format!("must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(cfg_err("dt", format!("dt = {} exceeds t_end = {}", self.dt, self.t_end)));
        }
        if self.n_paths < 2 {
            return Err(cfg_err("n_paths", "need at least 2 paths"));
        }
        let rt = &self.record_times;
        if rt.is_empty() {
            return Err(cfg_err("record_times", "must not be empty"));
        }
        if rt.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= self.t_end)) {
            return Err(cfg_err("record_times", "every time must lie in [0, t_end]"));
        }
        if rt.windows(2).any(|w| w[1] <= w[0]) {
            return Err(cfg_err("record_times", "must be strictly increasing"));
        }
        if rt[rt.len() - 1] != self.t_end {
            return Err(cfg_err("record_times", "must end at t_end"));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != d {
                return Err(cfg_err("x0", format!("expected {d} coordinates, got {}", x0.len())));
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(cfg_err("x0", "must be finite"));
            }
        }
        let n_steps = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as u64;
        let dt_eff = self.t_end / n_steps as f64;
        let record_steps = rt.iter().map(|t| (t / dt_eff).round() as u64).collect();
        Ok(StepPlan {
            n_steps,
            dt_eff,
            record_steps,
        })
    }

    /// Rejects `epsilon >= eps_star` unless overridden (with a warning).
    pub fn check_eps_star(&self, eps_star: f64) -> Result<()> {
        if self.epsilon < eps_star {
            return Ok(());
        }
        if self.override_eps_star {
            log::warn!(
                "epsilon {} is not below eps_star {eps_star}; bounds are not guaranteed",
                self.epsilon
            );
            Ok(())
        } else {
            Err(Error::EpsilonTooLarge {
                epsilon: self.epsilon,
                eps_star,
            })
        }
    }

    pub fn x0_or_origin(&self, d: usize) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![0.0; d])
    }
}
