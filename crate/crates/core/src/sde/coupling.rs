//! Synchronous couplings: two processes driven by one Brownian path.

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::ensemble::{account_blowups, escaped, map_paths, Stepper};
use super::rng::NoisePath;
use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::stats::mean_se;

/// Monte Carlo estimate of `E‖X_t - X'_t‖^2` at the record times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSeries {
    pub times: Vec<f64>,
    pub mean_sq: Vec<f64>,
    pub se: Vec<f64>,
    pub n: usize,
    pub blown_up: usize,
    pub dt: f64,
}

impl CouplingSeries {
    /// `sup_t sqrt(E gap^2)` over the recorded times.
    pub fn sup_rms(&self) -> f64 {
        self.mean_sq.iter().map(|m| m.max(0.0).sqrt()).fold(0.0, f64::max)
    }
}

fn collect(cfg: &SimConfig, dt: f64, paths: Vec<Option<Vec<f64>>>) -> Result<CouplingSeries> {
    let blown = paths.iter().filter(|p| p.is_none()).count();
    account_blowups(cfg, blown, cfg.n_paths)?;
    let alive: Vec<&Vec<f64>> = paths.iter().flatten().collect();
    let mut mean_sq = Vec::with_capacity(cfg.record_times.len());
    let mut se = Vec::with_capacity(cfg.record_times.len());
    for r in 0..cfg.record_times.len() {
        let col: Vec<f64> = alive.iter().map(|p| p[r]).collect();
        let (m, s) = mean_se(&col);
        mean_sq.push(m);
        se.push(s);
    }
    Ok(CouplingSeries {
        times: cfg.record_times.clone(),
        mean_sq,
        se,
        n: alive.len(),
        blown_up: blown,
        dt,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `X_t(x)` and `X_t(x0)` under identical noise; needs `eps <= delta / ell^2`.
pub fn coupled_pair_nonlinear(spec: &ProblemSpec, x: &[f64], x0: &[f64], cfg: &SimConfig) -> Result<CouplingSeries> {
    let d = spec.d();
    let plan = cfg.validate(d)?;
    if x.len() != d || x0.len() != d {
        return Err(Error::Config {
            key: "pairs".into(),
            message: format!("starting points need {d} coordinates"),
        });
    }
    let c = spec.constants();
    if c.ell > 0.0 {
        cfg.check_eps_star(c.delta / (c.ell * c.ell) * (1.0 + 1e-12))?;
    }
    let paths = map_paths(cfg.n_paths, |id| {
        let mut a = x.to_vec();
        let mut b = x0.to_vec();
        let mut noise = NoisePath::new(cfg.seed, id, d, plan.dt_eff);
        let mut sa = Stepper::new(spec, cfg.epsilon, plan.dt_eff);
        let mut sb = Stepper::new(spec, cfg.epsilon, plan.dt_eff);
        let mut dw = vec![0.0; d];
        let mut out = Vec::with_capacity(plan.record_steps.len());
        let mut next = 0;
        for k in 0..=plan.n_steps {
            while next < plan.record_steps.len() && plan.record_steps[next] == k {
                out.push(sq_dist(&a, &b));
                next += 1;
            }
            if k == plan.n_steps {
                break;
            }
            noise.next_into(&mut dw);
            if sa.step(&mut a, &dw).is_err() || sb.step(&mut b, &dw).is_err() || escaped(&a) || escaped(&b) {
                return None;
            }
        }
        Some(out)
    });
    collect(cfg, plan.dt_eff, paths)
}

/// Gap between the nonlinear process `X` and its linearisation
/// `dY = -DF(0) Y dt + sqrt(eps) sigma(0) dB`, both from `x0` (default 0) on the same
/// Euler grid with the same increments.
pub fn coupled_pair_linearization(spec: &ProblemSpec, cfg: &SimConfig, eps_star: f64) -> Result<CouplingSeries> {
    let d = spec.d();
    let plan = cfg.validate(d)?;
    cfg.check_eps_star(eps_star)?;
    let a = spec.jacobian_at_zero();
    let s0 = spec.sigma_at_zero();
    let x0 = cfg.x0_or_origin(d);
    let sqrt_eps = cfg.epsilon.sqrt();
    let dt = plan.dt_eff;
    let paths = map_paths(cfg.n_paths, |id| {
        let mut xs = x0.clone();
        let mut ys = x0.clone();
        let mut noise = NoisePath::new(cfg.seed, id, d, dt);
        let mut sx = Stepper::new(spec, cfg.epsilon, dt);
        let mut dw = vec![0.0; d];
        let mut ay = vec![0.0; d];
        let mut sy = vec![0.0; d];
        let mut out = Vec::with_capacity(plan.record_steps.len());
        let mut next = 0;
        for k in 0..=plan.n_steps {
            while next < plan.record_steps.len() && plan.record_steps[next] == k {
                out.push(sq_dist(&xs, &ys));
                next += 1;
            }
            if k == plan.n_steps {
                break;
            }
            noise.next_into(&mut dw);
            if sx.step(&mut xs, &dw).is_err() || escaped(&xs) {
                return None;
            }
            a.mat_vec_into(&ys, &mut ay);
            s0.mat_vec_into(&dw, &mut sy);
            for ((y, f), n) in ys.iter_mut().zip(&ay).zip(&sy) {
                *y += -f * dt + sqrt_eps * n;
            }
        }
        Some(out)
    });
    collect(cfg, dt, paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;

    #[test]
    fn identical_starts_stay_together() {
        let p = builtin("quartic1d", &[]).unwrap();
        let cfg = SimConfig::new(0.1, 1e-3, 1.0, 20, 1).with_record_times(vec![0.5, 1.0]);
        let s = coupled_pair_nonlinear(&p, &[0.3], &[0.3], &cfg).unwrap();
        assert!(s.mean_sq.iter().all(|m| *m == 0.0));
    }

    #[test]
    fn additive_linear_noise_cancels() {
        let p = builtin("linear1d", &[("a", 1.0)]).unwrap();
        let cfg = SimConfig::new(0.3, 1e-3, 2.0, 10, 1).with_record_times(vec![1.0, 2.0]);
        let s = coupled_pair_nonlinear(&p, &[1.0], &[-1.0], &cfg).unwrap();
        for (t, m) in s.times.iter().zip(&s.mean_sq) {
            // Euler factor (1 - dt)^(2 t / dt) against exp(-2t)
            let euler = 4.0 * (1.0 - 1e-3f64).powf(2.0 * t / 1e-3);
            assert!((m - euler).abs() < 1e-10);
            assert!((m - 4.0 * (-2.0 * t).exp()).abs() < 4.0 * (-2.0 * t).exp() * 4e-3);
        }
    }

    #[test]
    fn linear_problem_has_no_linearisation_gap() {
        let p = builtin("rotational2d", &[("delta", 1.0), ("omega", 2.0)]).unwrap();
        let cfg = SimConfig::new(0.05, 1e-3, 1.0, 20, 4).with_record_times(vec![0.5, 1.0]);
        let s = coupled_pair_linearization(&p, &cfg, 0.088).unwrap();
        assert!(s.sup_rms() <= 1e-12);
    }
}
