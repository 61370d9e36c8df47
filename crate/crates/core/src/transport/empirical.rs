//! Empirical `W_p` between a sample cloud and a Gaussian.
//!
//! The Gaussian side is itself sampled: `R` independent clouds `G_r` of the same size
//! as the sample cloud. Two Gaussian clouds are never at distance zero, so the same
//! `R` draws are paired with `R` further clouds `H_r` to measure that null distance,
//! and it is removed in squared units:
//!
//! `value = sqrt(max(0, m(cloud, G)^(2/p) - m(G, H)^(2/p)))`, `m = mean_r W_p^p`.
//!
//! `resample_sd` is the spread of `W_p(cloud, G_r)` over `r`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assignment::{w_p_assignment, ASSIGNMENT_MAX_N};
use super::sorted::{sorted_copy, sorted_cost};
use super::{check_p, DistanceEstimate, GaussianMeasure, Method, PointCloud};
use crate::error::{Error, Result};
use crate::sde::EnsembleSnapshot;
use crate::stats::{derive_seed, sample_sd};

pub const MIN_REPLICATES: usize = 20;
pub const MIN_CLOUD: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalDistance {
    pub estimate: DistanceEstimate,
    /// `mean_r W_p(cloud, G_r)`, no null correction.
    pub raw_mean: f64,
    /// `mean_r W_p(G_r, H_r)`.
    pub null_mean: f64,
    pub replicates: Vec<f64>,
}

fn pair_cost(a: &PointCloud, b: &PointCloud, sorted_a: Option<&[f64]>, p: f64) -> Result<f64> {
    if a.d() == 1 {
        let sa = match sorted_a {
            Some(s) => s.to_vec(),
            None => sorted_copy(a.as_slice())?,
        };
        let sb = sorted_copy(b.as_slice())?;
        Ok(sorted_cost(&sa, &sb, p))
    } else {
        let (est, _) = w_p_assignment(a, b, p)?;
        Ok(est.value.powf(p))
    }
}

/// See the module docs. `replicates >= 20`, cloud size >= 200.
pub fn wp_empirical_vs_gaussian(
    cloud: &PointCloud,
    g: &GaussianMeasure,
    p: f64,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalDistance> {
    check_p(p)?;
    let n = cloud.n();
    if n < MIN_CLOUD {
        return Err(Error::InvalidInput(format!("need at least {MIN_CLOUD} samples, got {n}")));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_REPLICATES} gaussian redraws, got {replicates}"
        )));
    }
    if cloud.d() != g.d() {
        return Err(Error::InvalidInput("cloud and gaussian differ in dimension".into()));
    }
    if cloud.d() > 1 && n > ASSIGNMENT_MAX_N {
        return Err(Error::InvalidInput(format!(
            "assignment limited to n <= {ASSIGNMENT_MAX_N}, got {n}"
        )));
    }
    let sorted_cloud = if cloud.d() == 1 { Some(sorted_copy(cloud.as_slice())?) } else { None };
    let costs: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<(f64, f64)> {
            let gr = g.sample(n, derive_seed(seed, "gaussian", r))?;
            let hr = g.sample(n, derive_seed(seed, "null", r))?;
            let c = pair_cost(cloud, &gr, sorted_cloud.as_deref(), p)?;
            let z = pair_cost(&gr, &hr, None, p)?;
            Ok((c, z))
        })
        .collect::<Result<_>>()?;
    let rf = replicates as f64;
    let m_c = costs.iter().map(|c| c.0).sum::<f64>() / rf;
    let m_0 = costs.iter().map(|c| c.1).sum::<f64>() / rf;
    let reps: Vec<f64> = costs.iter().map(|c| c.0.powf(1.0 / p)).collect();
    let raw_mean = reps.iter().sum::<f64>() / rf;
    let null_mean = costs.iter().map(|c| c.1.powf(1.0 / p)).sum::<f64>() / rf;
    let value = (m_c.powf(2.0 / p) - m_0.powf(2.0 / p)).max(0.0).sqrt();
    Ok(EmpiricalDistance {
        estimate: DistanceEstimate {
            value,
            method: if cloud.d() == 1 { Method::Sorted1d } else { Method::Assignment },
            n,
            p,
            resample_sd: sample_sd(&reps),
        },
        raw_mean,
        null_mean,
        replicates: reps,
    })
}

/// `W_2` of a snapshot against `g` with the default 20 redraws.
pub fn w2_empirical_vs_gaussian(cloud: &EnsembleSnapshot, g: &GaussianMeasure, seed: u64) -> Result<DistanceEstimate> {
    Ok(wp_empirical_vs_gaussian(&cloud.samples, g, 2.0, MIN_REPLICATES, seed)?.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn std_normal() -> GaussianMeasure {
        GaussianMeasure::centered(Matrix::scalar(1.0)).unwrap()
    }

    #[test]
    fn exact_cloud_is_at_the_noise_floor() {
        let g = std_normal();
        let cloud = g.sample(2000, 12345).unwrap();
        let e = wp_empirical_vs_gaussian(&cloud, &g, 2.0, 20, 1).unwrap();
        assert!(e.estimate.value <= 4.0 * e.estimate.resample_sd, "{e:?}");
        assert!(e.estimate.resample_sd > 0.0);
    }

    #[test]
    fn point_mass_is_at_distance_one() {
        let g = std_normal();
        let cloud = PointCloud::from_1d(vec![0.0; 2000]);
        let e = wp_empirical_vs_gaussian(&cloud, &g, 2.0, 20, 2).unwrap();
        assert!((e.estimate.value - 1.0).abs() < 0.05, "{e:?}");
    }

    #[test]
    fn shift_is_recovered() {
        let g = std_normal();
        let cloud = g.sample(2000, 777).unwrap().translated(&[0.5]);
        let e = wp_empirical_vs_gaussian(&cloud, &g, 2.0, 20, 3).unwrap();
        assert!((e.estimate.value - 0.5).abs() <= 4.0 * e.estimate.resample_sd + 0.02, "{e:?}");
    }

    #[test]
    fn small_clouds_rejected() {
        let g = std_normal();
        let cloud = PointCloud::from_1d(vec![0.0; 50]);
        assert!(wp_empirical_vs_gaussian(&cloud, &g, 2.0, 20, 1).is_err());
        let ok = PointCloud::from_1d(vec![0.0; 300]);
        assert!(wp_empirical_vs_gaussian(&ok, &g, 2.0, 5, 1).is_err());
    }
}
