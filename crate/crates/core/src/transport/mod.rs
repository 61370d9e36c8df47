//! Wasserstein distances between empirical measures and moment estimators.

mod assignment;
mod cloud;
mod empirical;
mod gaussian;
mod moments;
mod sliced;
mod sorted;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assignment::{solve_assignment, w_p_assignment, TransportPlan, ASSIGNMENT_MAX_N, ASSIGNMENT_WARN_N};
pub use cloud::PointCloud;
pub use empirical::{w2_empirical_vs_gaussian, wp_empirical_vs_gaussian, EmpiricalDistance, MIN_REPLICATES};
pub use gaussian::{w2_gaussian_closed_form, GaussianMeasure};
pub use moments::{exp_moment_estimate, moment_estimates, norm_power_mean, ExpMomentEstimate, MomentEstimate};
pub use sliced::w2_sliced;
pub use sorted::w_p_sorted_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sorted1d,
    Assignment,
    Sliced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub method: Method,
    pub n: usize,
    pub p: f64,
    pub resample_sd: f64,
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if (1.0..=2.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("p must lie in [1, 2], got {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_json_keys() {
        let e = DistanceEstimate {
            value: 0.5,
            method: Method::Sorted1d,
            n: 10,
            p: 2.0,
            resample_sd: 0.1,
        };
        let v: serde_json::Value = serde_json::to_value(e).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["method", "n", "p", "resample_sd", "value"]);
        assert_eq!(v["method"], "sorted1d");
    }
}
