use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{Error, Result};
use crate::stats::mean_se;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub order: u32,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpMomentEstimate {
    pub lambda: f64,
    pub mean: f64,
    pub se: f64,
    /// Share of the sum carried by the largest 1% of summands.
    pub top_share: f64,
    pub heavy_tail: bool,
}

/// `E‖x‖^k` for even `k` in `{2, 4, 6, 8}`.
pub fn moment_estimates(cloud: &PointCloud, orders: &[u32]) -> Result<Vec<MomentEstimate>> {
    if let Some(k) = orders.iter().find(|k| ![2, 4, 6, 8].contains(*k)) {
        return Err(Error::InvalidInput(format!("moment order {k} not in {{2, 4, 6, 8}}")));
    }
    let sq = cloud.sq_norms();
    Ok(orders
        .iter()
        .map(|&k| {
            let vals: Vec<f64> = sq.iter().map(|s| s.powi(k as i32 / 2)).collect();
            let (mean, se) = mean_se(&vals);
            MomentEstimate { order: k, mean, se }
        })
        .collect())
}

/// `E‖x‖^p` for real `p > 0`, with its standard error.
pub fn norm_power_mean(cloud: &PointCloud, p: f64) -> (f64, f64) {
    let vals: Vec<f64> = cloud.sq_norms().iter().map(|s| s.powf(0.5 * p)).collect();
    mean_se(&vals)
}

/// `E exp(lambda ‖x‖^2)`. Flags (and logs) a heavy tail when the top 1% of summands
/// carry more than half of the sum.
pub fn exp_moment_estimate(cloud: &PointCloud, lambda: f64) -> ExpMomentEstimate {
    let mut vals: Vec<f64> = cloud.sq_norms().iter().map(|s| (lambda * s).exp()).collect();
    let (mean, se) = mean_se(&vals);
    vals.sort_by(|a, b| b.total_cmp(a));
    let top = (vals.len() / 100).max(1);
    let total: f64 = vals.iter().sum();
    let top_share = if total > 0.0 { vals[..top].iter().sum::<f64>() / total } else { 0.0 };
    let heavy_tail = top_share > 0.5;
    if heavy_tail {
        log::warn!("exponential moment at lambda = {lambda}: top 1% of samples carry {top_share:.2} of the mass");
    }
    ExpMomentEstimate {
        lambda,
        mean,
        se,
        top_share,
        heavy_tail,
    }
}
