use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::sde::default_dt;
use crate::transport::MIN_REPLICATES;

/// A starting pair `(x, x0)` for the contraction runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub x: Vec<f64>,
    pub x0: Vec<f64>,
}

/// Runner settings. Every key is optional; each runner reads the keys it needs and
/// falls back to its own defaults. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Single noise level (the p-Wasserstein runner).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Step sizes compared by the linearisation-gap runner; the last is the finest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    /// Fixed burn-in horizon replacing `max(t_eps, 10 / delta)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// Time grid for the OU moment suite and the covariance decay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Exponential-moment rates as multiples of `1 / C_star`, each in `(0, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Exact OU draws per time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Lower bound on the fitted log-log slope of the scaling law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gibbs_intervals: Option<usize>,
    /// Sampling radius of the hypothesis audit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub override_eps_star: bool,
    #[serde(default)]
    pub acceptance: bool,
}

fn bad(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn check_list(key: &str, v: &Option<Vec<f64>>, ok: impl Fn(f64) -> bool, what: &str) -> Result<()> {
    if let Some(v) = v {
        if v.is_empty() {
            return Err(bad(key, "must not be empty"));
        }
        if let Some(x) = v.iter().find(|x| !ok(**x)) {
            return Err(bad(key, format!("{x} is not {what}")));
        }
    }
    Ok(())
}

fn check_increasing(key: &str, v: &Option<Vec<f64>>) -> Result<()> {
    if let Some(v) = v {
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad(key, "must be strictly increasing"));
        }
    }
    Ok(())
}

/// Top-level key whose value alone fails to deserialize; `config` when the document
/// itself is malformed.
fn offending_key(text: &str) -> String {
    let Ok(serde_json::Value::Object(map)) = serde_json::from_str::<serde_json::Value>(text) else {
        return "config".into();
    };
    map.into_iter()
        .find(|(k, v)| {
            let one = serde_json::Value::Object([(k.clone(), v.clone())].into_iter().collect());
            serde_json::from_value::<ExperimentConfig>(one).is_err()
        })
        .map_or_else(|| "config".into(), |(k, _)| k)
}

pub(crate) const DEFAULT_N_PATHS: usize = 2000;
pub(crate) const DEFAULT_MIN_SLOPE: f64 = 0.45;

/// Settings shared by the simulation runners after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub seed: u64,
    pub dt: f64,
    pub n_paths: usize,
    pub replicates: usize,
    pub burn_in: Option<f64>,
    pub override_eps_star: bool,
    pub acceptance: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(&offending_key(text), e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every key that is present; problem-dependent checks happen in the runners.
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        check_list("epsilons", &self.epsilons, |e| pos(e) && e <= 1.0, "in (0, 1]")?;
        if let Some(e) = self.epsilon {
            if !(pos(e) && e <= 1.0) {
                return Err(bad("epsilon", format!("{e} is not in (0, 1]")));
            }
        }
        if let Some(dt) = self.dt {
            if !pos(dt) {
                return Err(bad("dt", format!("{dt} is not a positive step")));
            }
        }
        check_list("dt_list", &self.dt_list, pos, "a positive step")?;
        if let Some(n) = self.n_paths {
            if n < 2 {
                return Err(bad("n_paths", format!("need at least 2 paths, got {n}")));
            }
        }
        if let Some(t) = self.burn_in {
            if !pos(t) {
                return Err(bad("burn_in", format!("{t} is not a positive horizon")));
            }
        }
        check_list("record_times", &self.record_times, |t| t.is_finite() && t >= 0.0, "a finite time >= 0")?;
        check_increasing("record_times", &self.record_times)?;
        if let Some(pairs) = &self.pairs {
            if pairs.is_empty() {
                return Err(bad("pairs", "must not be empty"));
            }
            for (i, p) in pairs.iter().enumerate() {
                if p.x.is_empty() || p.x.len() != p.x0.len() {
                    return Err(bad(&format!("pairs[{i}]"), "x and x0 need the same nonzero length"));
                }
                if p.x.iter().chain(&p.x0).any(|v| !v.is_finite()) {
                    return Err(bad(&format!("pairs[{i}]"), "coordinates must be finite"));
                }
            }
        }
        if let Some(x0) = &self.x0 {
            if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
                return Err(bad("x0", "must be a nonempty list of finite numbers"));
            }
        }
        check_list("times", &self.times, |t| t.is_finite() && t >= 0.0, "a finite time >= 0")?;
        check_increasing("times", &self.times)?;
        check_list("lambdas", &self.lambdas, |l| l > 0.0 && l < 1.0, "in (0, 1) (units of 1/C_star)")?;
        if let Some(n) = self.n_samples {
            if n < 2 {
                return Err(bad("n_samples", format!("need at least 2 samples, got {n}")));
            }
        }
        if let Some(b) = self.beta {
            if !(b.is_finite() && b < 0.5) {
                return Err(bad("beta", format!("{b} must be below 1/2")));
            }
        }
        let in_p = |p: f64| (1.0..=2.0).contains(&p);
        if let Some(p) = self.p {
            if !in_p(p) {
                return Err(bad("p", format!("{p} is not in [1, 2]")));
            }
        }
        check_list("p_list", &self.p_list, in_p, "in [1, 2]")?;
        if let Some(r) = self.replicates {
            if r < MIN_REPLICATES {
                return Err(bad("replicates", format!("need at least {MIN_REPLICATES}, got {r}")));
            }
        }
        if let Some(s) = self.min_slope {
            if !s.is_finite() {
                return Err(bad("min_slope", "must be finite"));
            }
        }
        if let Some(r) = self.radius {
            if !pos(r) {
                return Err(bad("radius", format!("{r} is not a positive radius")));
            }
        }
        if let Some(n) = self.gibbs_intervals {
            if n < 100 || n % 2 == 1 {
                return Err(bad("gibbs_intervals", format!("need an even count >= 100, got {n}")));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, spec: &ProblemSpec) -> Resolved {
        Resolved {
            seed: self.seed.unwrap_or(0),
            dt: self.dt.unwrap_or_else(|| default_dt(spec)),
            n_paths: self.n_paths.unwrap_or(DEFAULT_N_PATHS),
            replicates: self.replicates.unwrap_or(MIN_REPLICATES),
            burn_in: self.burn_in,
            override_eps_star: self.override_eps_star,
            acceptance: self.acceptance,
        }
    }

    pub(crate) fn epsilons_or(&self, default: &[f64]) -> Vec<f64> {
        self.epsilons.clone().unwrap_or_else(|| default.to_vec())
    }
}
