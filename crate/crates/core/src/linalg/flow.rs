//! The OU covariance flow `dΣ/dt = -A Σ - Σ A^T + Q`, `Σ_0 = 0`.
//!
//! Computed twice: classical RK4 on the matrix ODE and the closed form
//! `Σ_t = Σ - exp(-A t) Σ exp(-A^T t)`. The two must agree.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{mat_exp, solve_lyapunov_kron, Matrix};
use crate::error::{Error, Result};

const AGREEMENT_HARD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceFlow {
    pub times: Vec<f64>,
    /// Closed-form `Σ_t` at each time.
    pub sigmas: Vec<Matrix>,
    /// RK4 `Σ_t` at each time.
    pub sigmas_rk4: Vec<Matrix>,
    pub sigma_inf: Matrix,
    /// `‖Σ_t - Σ‖_F`, computed as `‖exp(-At) Σ exp(-A^T t)‖_F` (no cancellation).
    pub dist_to_sigma_inf: Vec<f64>,
    /// Largest Frobenius gap between the two routes.
    pub max_route_gap: f64,
}

impl CovarianceFlow {
    /// CSV with columns `t, fro_dist_to_sigma_inf, s11, s12, ...` (row-major).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.sigma_inf.rows();
        let mut header = vec!["t".to_string(), "fro_dist_to_sigma_inf".to_string()];
        for i in 1..=d {
            for j in 1..=d {
                header.push(format!("s{i}{j}"));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for ((t, s), dist) in self.times.iter().zip(&self.sigmas).zip(&self.dist_to_sigma_inf) {
            let mut row = vec![crate::stats::fmt17(*t), crate::stats::fmt17(*dist)];
            row.extend(s.as_slice().iter().map(|v| crate::stats::fmt17(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn rhs(a: &Matrix, at: &Matrix, q: &Matrix, s: &Matrix) -> Matrix {
    let as_ = a * s;
    let sat = s * at;
    &(q - &as_) - &sat
}

pub fn covariance_flow(a: &Matrix, q: &Matrix, times: &[f64]) -> Result<CovarianceFlow> {
    let d = a.require_square("covariance_flow")?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidInput("covariance_flow: times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("covariance_flow: times must be increasing".into()));
    }
    let sigma_inf = solve_lyapunov_kron(a, q)?.sigma_inf;
    let at = a.transpose();
    let neg_a = -a;

    let mut sigmas = Vec::with_capacity(times.len());
    let mut dist = Vec::with_capacity(times.len());
    for &t in times {
        let e = mat_exp(&neg_a, t)?;
        let decay = &(&e * &sigma_inf) * &e.transpose();
        dist.push(decay.fro_norm());
        sigmas.push((&sigma_inf - &decay).symmetric_part());
    }

    let h_max = 1e-3 / a.fro_norm().max(1e-300);
    let mut sigmas_rk4 = Vec::with_capacity(times.len());
    let mut s = Matrix::zeros(d, d);
    let mut now = 0.0;
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(a, &at, q, &s);
                let k2 = rhs(a, &at, q, &(&s + &k1.scale(0.5 * h)));
                let k3 = rhs(a, &at, q, &(&s + &k2.scale(0.5 * h)));
                let k4 = rhs(a, &at, q, &(&s + &k3.scale(h)));
                let incr = &(&k1 + &k2.scale(2.0)) + &(&k3.scale(2.0) + &k4);
                s = &s + &incr.scale(h / 6.0);
            }
            now = t;
        }
        sigmas_rk4.push(s.symmetric_part());
    }

    let max_route_gap = sigmas
        .iter()
        .zip(&sigmas_rk4)
        .map(|(x, y)| (x - y).fro_norm())
        .fold(0.0, f64::max);
    if max_route_gap > AGREEMENT_HARD {
        return Err(Error::Disagreement {
            what: "covariance flow rk4 vs closed form",
            gap: max_route_gap,
        });
    }
    Ok(CovarianceFlow {
        times: times.to_vec(),
        sigmas,
        sigmas_rk4,
        sigma_inf,
        dist_to_sigma_inf: dist,
        max_route_gap,
    })
}
