//! Exact sampling of `dY = -A Y dt + sqrt(eps) S dB`.

use super::EnsembleSnapshot;
use crate::error::{Error, Result};
use crate::linalg::{covariance_flow, mat_exp, Matrix};
use crate::transport::GaussianMeasure;

/// Law of `Y_t` started at `x0`: `N(exp(-A t) x0, eps Sigma_t)`.
pub fn ou_marginal(a: &Matrix, s: &Matrix, epsilon: f64, t: f64, x0: &[f64]) -> Result<GaussianMeasure> {
    let d = a.require_square("ou drift")?;
    if x0.len() != d {
        return Err(Error::InvalidInput(format!("x0 has {} entries, expected {d}", x0.len())));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be finite and >= 0, got {t}")));
    }
    let mean = mat_exp(&(-a), t)?.mat_vec(x0);
    let q = s * &s.transpose();
    let sigma_t = covariance_flow(a, &q, &[t])?.sigmas.remove(0);
    GaussianMeasure::new(mean, sigma_t.scale(epsilon))
}

/// `n` exact draws from the OU marginal at time `t`. No discretisation is involved.
pub fn ou_exact_sample(
    a: &Matrix,
    s: &Matrix,
    epsilon: f64,
    t: f64,
    x0: &[f64],
    n: usize,
    seed: u64,
) -> Result<EnsembleSnapshot> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 samples".into()));
    }
    let g = ou_marginal(a, s, epsilon, t, x0)?;
    Ok(EnsembleSnapshot {
        time: t,
        samples: g.sample(n, seed)?,
        path_ids: (0..n as u64).collect(),
        problem: "ou".into(),
        epsilon,
        blown_up: 0,
    })
}

/// `‖exp(-A t) x‖^2`: the squared distance between two OU paths driven by the same noise.
pub fn ou_pair_sq_distance(a: &Matrix, x: &[f64], t: f64) -> Result<f64> {
    let v = mat_exp(&(-a), t)?.mat_vec(x);
    Ok(v.iter().map(|u| u * u).sum())
}
