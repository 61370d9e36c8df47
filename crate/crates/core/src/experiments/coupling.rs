//! Synchronous-coupling runners: contraction of two nonlinear paths and the gap
//! between the process and its linearisation at the origin.

use super::config::ExperimentConfig;
use super::constants::constants;
use super::report::ExperimentReport;
use super::scaling::{check_epsilons, provenance};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::model::ProblemSpec;
use crate::sde::{coupled_pair_linearization, coupled_pair_nonlinear, ou_pair_sq_distance, SimConfig};
use crate::stats::ls_slope;

pub const DEFAULT_COUPLING_TIMES: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Two copies from `x` and `x0` driven by one Brownian path:
/// `E‖X_t(x) - X_t(x0)‖^2 <= exp(-(2 delta - eps ell^2) t) ‖x - x0‖^2`, the
/// root-mean-square form `<= exp(-delta t / 2) ‖x - x0‖`, and the same pair for the
/// linearisation `dY = -DF(0) Y dt + ...` where the gap is deterministic.
pub fn run_coupling_contraction(spec: &ProblemSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = constants(spec)?;
    let r = cfg.resolve(spec);
    let d = spec.d();
    let eps = cfg.epsilon.unwrap_or(0.1);
    if c.ell > 0.0 && eps > c.delta / (c.ell * c.ell) && !r.override_eps_star {
        return Err(Error::EpsilonTooLarge {
            epsilon: eps,
            eps_star: c.delta / (c.ell * c.ell),
        });
    }
    let times = cfg.record_times.clone().unwrap_or_else(|| DEFAULT_COUPLING_TIMES.to_vec());
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = match &cfg.pairs {
        Some(p) => p.iter().map(|p| (p.x.clone(), p.x0.clone())).collect(),
        None => vec![(vec![1.0; d], vec![-1.0; d])],
    };
    for (i, (x, x0)) in pairs.iter().enumerate() {
        if x.len() != d || x0.len() != d {
            return Err(Error::Config {
                key: format!("pairs[{i}]"),
                message: format!("points need {d} coordinates"),
            });
        }
    }
    let t_end = *times.last().expect("validated nonempty");
    let rate = 2.0 * c.delta - eps * c.ell * c.ell;
    let a = spec.jacobian_at_zero();
    let delta_a = sym_eigen(&a.symmetric_part())?.min();

    let mut rep = ExperimentReport::new("coupling", spec.name(), &["pair", "t"], provenance(&r));
    for (i, (x, x0)) in pairs.iter().enumerate() {
        let pi = i as f64;
        let d0 = sq_dist(x, x0);
        let sim = SimConfig {
            x0: None,
            override_eps_star: r.override_eps_star,
            acceptance: r.acceptance,
            ..SimConfig::new(eps, r.dt, t_end, r.n_paths, r.seed)
        }
        .with_record_times(times.clone());
        let series = coupled_pair_nonlinear(spec, x, x0, &sim)?;
        let mut fit = (Vec::new(), Vec::new());
        for ((&t, &m), &se) in series.times.iter().zip(&series.mean_sq).zip(&series.se) {
            rep.cell(&[pi, t], "mean_sq").observed(m, se).at_most((-rate * t).exp() * d0, 3.0 * se);
            let rms = m.max(0.0).sqrt();
            let se_rms = if rms > 0.0 { se / (2.0 * rms) } else { 0.0 };
            rep.cell(&[pi, t], "rms")
                .observed(rms, se_rms)
                .at_most((-0.5 * c.delta * t).exp() * d0.sqrt(), 3.0 * se_rms);
            if m > 0.0 && t > 0.0 {
                fit.0.push(t);
                fit.1.push(m.ln());
            }
            // the linearised pair moves deterministically
            let ou = ou_pair_sq_distance(a, &x.iter().zip(x0).map(|(u, v)| u - v).collect::<Vec<_>>(), t)?;
            rep.cell(&[pi, t], "ou_sq_dist")
                .observed(ou, 0.0)
                .at_most((-2.0 * delta_a * t).exp() * d0, 1e-10);
        }
        match ls_slope(&fit.0, &fit.1) {
            Some(s) => rep.cell(&[pi], "log_decay_slope").observed(s, 0.0).at_most(-rate, 0.1),
            None => rep
                .cell(&[pi], "log_decay_slope")
                .observed(f64::NAN, 0.0)
                .note("identical starting points")
                .info(-rate),
        }
    }
    rep.constants = Some(c);
    Ok(rep)
}

pub const DEFAULT_GAP_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// `sup_t sqrt(E‖X_t(0) - Y_t(0)‖^2) <= eps C + 5 dt` per noise level and step size,
/// with the log-log slope in `eps` at the finest step.
pub fn run_linearization_gap(spec: &ProblemSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let c = constants(spec)?;
    let r = cfg.resolve(spec);
    let mut eps = cfg.epsilons_or(&DEFAULT_GAP_EPSILONS);
    eps.sort_by(|a, b| b.total_cmp(a));
    check_epsilons(&eps, &c, &r, "epsilons")?;
    let mut dts = cfg.dt_list.clone().unwrap_or_else(|| vec![r.dt]);
    dts.sort_by(|a, b| b.total_cmp(a));
    let t_end = cfg.burn_in.unwrap_or(10.0 / c.delta);
    let times = cfg.record_times.clone().unwrap_or_else(|| {
        let k = 20;
        (1..=k).map(|i| t_end * i as f64 / k as f64).collect()
    });
    let linear = spec.is_ou();
    let mut rep = ExperimentReport::new("linearization_gap", spec.name(), &["epsilon", "dt"], provenance(&r));
    rep.provenance.dt = dts.last().copied();
    let mut finest = Vec::new();
    for (k, &dt) in dts.iter().enumerate() {
        for &e in &eps {
            let sim = SimConfig {
                x0: cfg.x0.clone(),
                override_eps_star: r.override_eps_star,
                acceptance: r.acceptance,
                ..SimConfig::new(e, dt, *times.last().unwrap_or(&t_end), r.n_paths, r.seed)
            }
            .with_record_times(times.clone());
            let series = coupled_pair_linearization(spec, &sim, c.eps_star)?;
            let sup = series.sup_rms();
            let se = series
                .mean_sq
                .iter()
                .zip(&series.se)
                .max_by(|a, b| a.0.total_cmp(b.0))
                .map_or(0.0, |(m, s)| if *m > 0.0 { s / (2.0 * m.sqrt()) } else { 0.0 });
            rep.cell(&[e, dt], "sup_gap").observed(sup, se).at_most(e * c.c_gap + 5.0 * dt, 0.0);
            if linear {
                rep.cell(&[e, dt], "sup_gap_linear").observed(sup, se).at_most(5.0 * dt, 0.0);
            }
            if k + 1 == dts.len() {
                finest.push((e, sup));
            }
        }
    }
    let dt_f = *dts.last().expect("nonempty");
    let usable: Vec<&(f64, f64)> = finest.iter().filter(|(_, s)| *s > 0.0).collect();
    let slope = ls_slope(
        &usable.iter().map(|c| c.0.ln()).collect::<Vec<_>>(),
        &usable.iter().map(|c| c.1.ln()).collect::<Vec<_>>(),
    );
    match slope {
        Some(s) if !linear && usable.len() == finest.len() => {
            rep.cell(&[f64::NAN, dt_f], "slope").observed(s, 0.0).at_least(0.9, 0.0);
            rep.cell(&[f64::NAN, dt_f], "slope").observed(s, 0.0).at_most(1.5, 0.0);
        }
        other => rep
            .cell(&[f64::NAN, dt_f], "slope")
            .observed(other.unwrap_or(f64::NAN), 0.0)
            .note("gap vanishes; slope not asserted")
            .info(1.0),
    }
    rep.constants = Some(c);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::PairDoc;
    use crate::model::builtin;

    #[test]
    fn identical_points_stay_together() {
        let spec = builtin("quartic1d", &[]).unwrap();
        let cfg = ExperimentConfig {
            pairs: Some(vec![PairDoc { x: vec![0.5], x0: vec![0.5] }]),
            n_paths: Some(50),
            ..Default::default()
        };
        let rep = run_coupling_contraction(&spec, &cfg).unwrap();
        assert!(rep.find("mean_sq").all(|c| c.observed == 0.0));
        assert!(rep.all_pass());
    }

    #[test]
    fn linear_pairs_decay_at_rate_two() {
        let spec = builtin("linear1d", &[]).unwrap();
        let cfg = ExperimentConfig {
            n_paths: Some(20),
            dt: Some(1e-4),
            ..Default::default()
        };
        let rep = run_coupling_contraction(&spec, &cfg).unwrap();
        let s = rep.find("log_decay_slope").next().unwrap().observed;
        // Euler factor (1 - dt)^2 per step
        assert!((s - 2.0 * (1.0f64 - 1e-4).ln() / 1e-4).abs() < 1e-6, "{s}");
        assert!(rep.all_pass(), "{:#?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn linear_gap_is_zero() {
        let spec = builtin("rotational2d", &[("omega", 2.0)]).unwrap();
        let cfg = ExperimentConfig {
            epsilons: Some(vec![0.05, 0.02]),
            n_paths: Some(20),
            burn_in: Some(2.0),
            ..Default::default()
        };
        let rep = run_linearization_gap(&spec, &cfg).unwrap();
        assert!(rep.find("sup_gap").all(|c| c.observed == 0.0));
        assert!(rep.all_pass());
    }
}
