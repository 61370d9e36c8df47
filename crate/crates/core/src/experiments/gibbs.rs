use super::config::ExperimentConfig;
use super::constants::constants;
use super::report::ExperimentReport;
use super::scaling::{check_epsilons, gibbs_table, provenance, rescaled_distance, stationary_snapshot, DEFAULT_EPSILONS};
use crate::error::{Error, Result};
use crate::model::{gibbs_for_problem, GridSpec, ProblemSpec};
use crate::stats::mean_se;
use crate::transport::GaussianMeasure;

/// Cross-check of the simulated invariant law against the 1D Gibbs density: second
/// moments and rescaled `W_2` to `N(0, Sigma)` per noise level, plus a grid refinement
/// check of the quadrature itself.
pub fn run_gibbs_crosscheck(spec: &ProblemSpec, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if spec.gibbs_temperature(1.0).is_none() {
        return Err(Error::InvalidProblem(format!(
            "`{}` has no Gibbs oracle (needs d = 1 and constant diffusion)",
            spec.name()
        )));
    }
    let c = constants(spec)?;
    let r = cfg.resolve(spec);
    let mut eps = cfg.epsilons_or(&DEFAULT_EPSILONS);
    eps.sort_by(|a, b| b.total_cmp(a));
    check_epsilons(&eps, &c, &r, "epsilons")?;
    let var = c.sigma_inf[(0, 0)];
    let target = GaussianMeasure::centered(c.sigma_inf.clone())?;
    let mut rep = ExperimentReport::new("oracle_gibbs", spec.name(), &["epsilon"], provenance(&r));
    for &e in &eps {
        let table = gibbs_table(spec, e, cfg)?.expect("checked above");
        let temp = spec.gibbs_temperature(e).expect("checked above");
        let n = table.x.len() - 1;
        let fine = gibbs_for_problem(spec, e, Some(GridSpec::auto(temp, spec.jacobian_at_zero()[(0, 0)], 2 * n)))?;
        let m2 = table.expect(|x| x * x);
        let m2_fine = fine.expect(|x| x * x);
        rep.cell(&[e], "gibbs_grid_refinement")
            .observed((m2 - m2_fine).abs(), 0.0)
            .at_most(1e-8 * m2.abs().max(1e-300), 0.0);

        let snap = stationary_snapshot(spec, &c, &r, e)?;
        let (m, se) = mean_se(&snap.samples.sq_norms());
        rep.cell(&[e], "second_moment").observed(m, se).within(m2, 4.0 * se);

        let w = rescaled_distance(&snap, &target, 2.0, &r)?.estimate;
        let exact = table.wasserstein_rescaled_to_gaussian(2.0, e, var)?;
        rep.cell(&[e], "w2").observed(w.value, w.resample_sd).within(exact, 4.0 * w.resample_sd + 0.02);
    }
    rep.constants = Some(c);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;

    #[test]
    fn rejects_two_dimensional_problem() {
        let spec = builtin("rotational2d", &[]).unwrap();
        assert!(run_gibbs_crosscheck(&spec, &ExperimentConfig::default()).is_err());
    }

    #[test]
    fn quartic_small_run() {
        let spec = builtin("quartic1d", &[]).unwrap();
        let cfg = ExperimentConfig {
            epsilons: Some(vec![0.2]),
            n_paths: Some(1000),
            dt: Some(2e-3),
            burn_in: Some(6.0),
            seed: Some(11),
            ..Default::default()
        };
        let rep = run_gibbs_crosscheck(&spec, &cfg).unwrap();
        assert!(rep.all_pass(), "{:#?}", rep.failures().collect::<Vec<_>>());
    }
}
