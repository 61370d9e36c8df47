//! Second-moment bounds for the nonlinear process and polynomial / exponential moment
//! bounds for the linearised OU process.

use super::config::ExperimentConfig;
use super::constants::constants;
use super::report::{ExperimentReport, Provenance};
use super::scaling::{gibbs_table, provenance};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::model::ProblemSpec;
use crate::sde::{ou_exact_sample, simulate_ensemble, SimConfig};
use crate::stats::{derive_seed, mean_se};
use crate::transport::{exp_moment_estimate, moment_estimates};

pub const DEFAULT_TRANSIENT_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// `E‖X_t(x)‖^2 <= ‖x‖^2 exp(-delta t) + eps C0 / delta` at the record times, and the
/// stationary bound `eps C0 / delta` after the burn-in (Monte Carlo and, when
/// available, Gibbs quadrature).
pub fn run_second_moment(spec: &ProblemSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = constants(spec)?;
    let r = cfg.resolve(spec);
    let d = spec.d();
    let eps = cfg.epsilons_or(&[0.1]);
    for &e in &eps {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::Config {
                key: "epsilons".into(),
                message: format!("{e} is not in (0, 1]"),
            });
        }
        if c.ell > 0.0 && e > c.delta / (c.ell * c.ell) && !r.override_eps_star {
            return Err(Error::EpsilonTooLarge {
                epsilon: e,
                eps_star: c.delta / (c.ell * c.ell),
            });
        }
    }
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![1.0; d]);
    if x0.len() != d {
        return Err(Error::Config {
            key: "x0".into(),
            message: format!("needs {d} coordinates"),
        });
    }
    let x0_sq: f64 = x0.iter().map(|v| v * v).sum();
    let transient = cfg.record_times.clone().unwrap_or_else(|| DEFAULT_TRANSIENT_TIMES.to_vec());
    let mut rep = ExperimentReport::new("second_moment", spec.name(), &["epsilon", "t"], provenance(&r));
    for &e in &eps {
        let stat = e * c.trace_q / c.delta;
        let t_burn = r.burn_in.unwrap_or_else(|| c.burn_in(e));
        let mut times = transient.clone();
        if times.last().is_none_or(|&t| t < t_burn) {
            times.push(t_burn);
        }
        let sim = SimConfig {
            override_eps_star: true,
            acceptance: r.acceptance,
            ..SimConfig::new(e, r.dt, t_burn.max(*times.last().expect("nonempty")), r.n_paths, r.seed)
        }
        .with_record_times(times)
        .with_x0(x0.clone());
        let snaps = simulate_ensemble(spec, &sim)?;
        let (last, rest) = snaps.split_last().expect("nonempty");
        for s in rest {
            let (m, se) = mean_se(&s.samples.sq_norms());
            rep.cell(&[e, s.time], "transient")
                .observed(m, se)
                .at_most(x0_sq * (-c.delta * s.time).exp() + stat, 3.0 * se);
        }
        let (m, se) = mean_se(&last.samples.sq_norms());
        rep.cell(&[e, last.time], "stationary").observed(m, se).at_most(stat, 3.0 * se);
        if let Some(table) = gibbs_table(spec, e, cfg)? {
            let g = table.expect(|x| x * x);
            rep.cell(&[e], "stationary_gibbs").observed(g, 0.0).at_most(stat, 0.0);
            rep.cell(&[e], "mc_vs_gibbs").observed(m, se).info(g);
        }
    }
    rep.constants = Some(c);
    Ok(rep)
}

/// Raw moments `E Q^n`, `n = 0..=k`, of `Q = sum_i mu_i xi_i^2` with `xi` standard
/// normal: cumulants `kappa_r = 2^(r-1) (r-1)! sum mu^r` and the usual recursion.
fn quadratic_form_moments(mu: &[f64], k: usize) -> Vec<f64> {
    let mut kappa = vec![0.0; k + 1];
    let mut fact = 1.0;
    for r in 1..=k {
        if r > 1 {
            fact *= (r - 1) as f64;
        }
        kappa[r] = 2f64.powi(r as i32 - 1) * fact * mu.iter().map(|m| m.powi(r as i32)).sum::<f64>();
    }
    let mut m = vec![1.0; k + 1];
    for n in 1..=k {
        let mut acc = 0.0;
        let mut binom = 1.0; // C(n-1, j-1)
        for j in 1..=n {
            acc += binom * kappa[j] * m[n - j];
            binom *= (n - j) as f64 / j as f64;
        }
        m[n] = acc;
    }
    m
}

/// `E ‖Z_t‖^{2j} <= C_star^j j!` and `E exp(lambda ‖Z_t‖^2) <= 1 / (1 - lambda C_star)`
/// for the OU process `dZ = -DF(0) Z dt + sigma(0) dB`, `Z_0 = 0`, sampled exactly.
/// The exact Gaussian values are checked too.
pub fn run_ou_moment_suite(spec: &ProblemSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = constants(spec)?;
    let seed = cfg.seed.unwrap_or(0);
    let n = cfg.n_samples.unwrap_or(100_000);
    let times = cfg.times.clone().unwrap_or_else(|| vec![1.0, 5.0]);
    let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let a = spec.jacobian_at_zero();
    let v = spec.sigma_at_zero();
    let d = spec.d();
    let mut rep = ExperimentReport::new(
        "ou_moments",
        spec.name(),
        &["t", "j", "lambda"],
        Provenance {
            seed,
            dt: None,
            n: Some(n),
            replicates: None,
        },
    );
    let fact = [1.0, 1.0, 2.0, 6.0, 24.0];
    for (i, &t) in times.iter().enumerate() {
        let snap = ou_exact_sample(a, v, 1.0, t, &vec![0.0; d], n, derive_seed(seed, "ou", i as u64))?;
        let sigma_t = snap_cov(a, v, t)?;
        let mu = sym_eigen(&sigma_t)?.values;
        let exact = quadratic_form_moments(&mu, 4);
        let est = moment_estimates(&snap.samples, &[2, 4, 6, 8])?;
        for (j, m) in (1..=4).zip(&est) {
            let jf = j as f64;
            rep.cell(&[t, jf], "poly_moment")
                .observed(m.mean, m.se)
                .at_most(c.c_star.powi(j) * fact[j as usize], 3.0 * m.se);
            rep.cell(&[t, jf], "poly_moment_exact").observed(m.mean, m.se).within(exact[j as usize], 3.0 * m.se);
        }
        for &l in &lambdas {
            let lambda = l / c.c_star;
            let e = exp_moment_estimate(&snap.samples, lambda);
            let note = if e.heavy_tail {
                format!("heavy tail: top 1% carries {:.2} of the sum", e.top_share)
            } else {
                String::new()
            };
            rep.cell(&[t, f64::NAN, lambda], "exp_moment")
                .observed(e.mean, e.se)
                .note(note.clone())
                .at_most(1.0 / (1.0 - lambda * c.c_star), 3.0 * e.se);
            let det: f64 = mu.iter().map(|m| 1.0 - 2.0 * lambda * m).product();
            if det > 0.0 {
                rep.cell(&[t, f64::NAN, lambda], "exp_moment_exact")
                    .observed(e.mean, e.se)
                    .note(note)
                    .within(det.powf(-0.5), 3.0 * e.se);
            }
        }
    }
    rep.constants = Some(c);
    Ok(rep)
}

fn snap_cov(a: &Matrix, v: &Matrix, t: f64) -> Result<Matrix> {
    let q = v * &v.transpose();
    Ok(crate::linalg::covariance_flow(a, &q, &[t])?.sigmas.remove(0))
}
