//! Sampling audit of the declared constants.
//!
//! Sampling can refute a declared constant, never prove it. Verdicts are `pass` only
//! where the check is decidable in closed form (linear drift, constant diffusion),
//! `inconclusive` when sampling found no violation, and `fail` with a witness
//! otherwise.

use serde::{Deserialize, Serialize};

use super::problem::{DeclaredConstants, Drift, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sym_eigen};
use crate::sde::NoiseStream;

/// A witness must violate its inequality by more than this.
pub const WITNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditVerdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Strong monotonicity with `delta`.
    A,
    /// Growth of `‖F‖` with `c0, c1`.
    B,
    /// Growth of `‖D^2 F‖` with the same `c0, c1`.
    #[serde(rename = "B_d2f")]
    BD2F,
    /// Frobenius-Lipschitz diffusion with `ell`.
    C,
    /// Ellipticity with `kappa`.
    D,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub verdict: AuditVerdict,
    pub declared: f64,
    /// Tightest constant seen: `delta_hat`, `c0_hat` (at the declared `c1`), `ell_hat`, `kappa_hat`.
    pub empirical: f64,
    /// One point (B, D) or a pair (A, C).
    pub witness: Option<Vec<Vec<f64>>>,
    /// Amount by which the witness breaks the inequality.
    pub violation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisAudit {
    pub checks: Vec<HypothesisCheck>,
    pub n_samples: usize,
    pub radius: f64,
    pub seed: u64,
}

impl HypothesisAudit {
    pub fn check(&self, h: Hypothesis) -> &HypothesisCheck {
        self.checks.iter().find(|c| c.hypothesis == h).expect("every hypothesis is audited")
    }

    pub fn any_failure(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == AuditVerdict::Fail)
    }
}

fn ball_point(rng: &mut NoiseStream, d: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let n = norm(&v).max(1e-300);
    let r = radius * rng.uniform().powf(1.0 / d as f64);
    for x in &mut v {
        *x *= r / n;
    }
    v
}

/// `<F(x) - F(y), x - y> - delta ‖x - y‖^2` (negative means violated).
pub fn monotonicity_gap(spec: &ProblemSpec, x: &[f64], y: &[f64], delta: f64) -> Result<f64> {
    let fx = spec.drift(x)?;
    let fy = spec.drift(y)?;
    let df: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(dot(&df, &dx) - delta * dot(&dx, &dx))
}

/// `c0 exp(c1 ‖x‖^2) - ‖F(x)‖`.
pub fn growth_gap(spec: &ProblemSpec, x: &[f64], c0: f64, c1: f64) -> Result<f64> {
    Ok(c0 * (c1 * dot(x, x)).exp() - norm(&spec.drift(x)?))
}

/// `c0 exp(c1 ‖x‖^2) - ‖D^2 F(x)‖`.
pub fn growth_gap_d2f(spec: &ProblemSpec, x: &[f64], c0: f64, c1: f64) -> Result<f64> {
    Ok(c0 * (c1 * dot(x, x)).exp() - spec.d2f_norm(x)?)
}

/// `ell ‖x - y‖ - ‖sigma(x) - sigma(y)‖_F`.
pub fn lipschitz_gap(spec: &ProblemSpec, x: &[f64], y: &[f64], ell: f64) -> Result<f64> {
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok(ell * norm(&dx) - (&spec.sigma(x)? - &spec.sigma(y)?).fro_norm())
}

/// `lambda_min(sigma sigma^T)(x) - kappa`.
pub fn ellipticity_gap(spec: &ProblemSpec, x: &[f64], kappa: f64) -> Result<f64> {
    let s = spec.sigma(x)?;
    Ok(sym_eigen(&(&s * &s.transpose()))?.min() - kappa)
}

pub fn audit_hypotheses(spec: &ProblemSpec, n_samples: usize, radius: f64, seed: u64) -> Result<HypothesisAudit> {
    audit_with_constants(spec, spec.constants(), n_samples, radius, seed)
}

/// Audits `spec`'s fields against an arbitrary declaration.
pub fn audit_with_constants(
    spec: &ProblemSpec,
    c: &DeclaredConstants,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<HypothesisAudit> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("audit needs n_samples >= 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("audit radius must be positive, got {radius}")));
    }
    let d = spec.d();
    let mut rng = NoiseStream::new(seed, 0);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples)
        .map(|_| (ball_point(&mut rng, d, radius), ball_point(&mut rng, d, radius)))
        .collect();
    let mut points: Vec<Vec<f64>> = vec![vec![0.0; d]];
    points.extend(pairs.iter().map(|p| p.0.clone()));

    let checks = vec![
        check_a(spec, c, &pairs)?,
        check_b(spec, c, &points, false)?,
        check_b(spec, c, &points, true)?,
        check_c(spec, c, &pairs)?,
        check_d(spec, c, &points)?,
    ];
    Ok(HypothesisAudit {
        checks,
        n_samples,
        radius,
        seed,
    })
}

fn sampled_verdict(worst_gap: f64) -> AuditVerdict {
    if worst_gap < -WITNESS_TOL {
        AuditVerdict::Fail
    } else {
        AuditVerdict::Inconclusive
    }
}

fn check_a(spec: &ProblemSpec, c: &DeclaredConstants, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<HypothesisCheck> {
    if let Drift::Linear(a) = spec.drift_kind() {
        let lam = sym_eigen(&a.symmetric_part())?.min();
        let ok = lam >= c.delta - WITNESS_TOL;
        // witness for a linear failure: the eigenvector of the smallest eigenvalue vs 0
        let witness = if ok {
            None
        } else {
            let e = sym_eigen(&a.symmetric_part())?;
            let v: Vec<f64> = (0..spec.d()).map(|i| e.vectors[(i, 0)]).collect();
            Some(vec![v, vec![0.0; spec.d()]])
        };
        return Ok(HypothesisCheck {
            hypothesis: Hypothesis::A,
            verdict: if ok { AuditVerdict::Pass } else { AuditVerdict::Fail },
            declared: c.delta,
            empirical: lam,
            violation: (c.delta - lam).max(0.0),
            witness,
        });
    }
    let mut delta_hat = f64::INFINITY;
    let mut best: Option<(f64, f64, usize)> = None; // (ratio, gap, index) among violators
    for (k, (x, y)) in pairs.iter().enumerate() {
        let dx2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if dx2 < 1e-12 {
            continue;
        }
        let gap = monotonicity_gap(spec, x, y, c.delta)?;
        let ratio = gap / dx2 + c.delta;
        delta_hat = delta_hat.min(ratio);
        if gap < -WITNESS_TOL && best.is_none_or(|b| ratio < b.0) {
            best = Some((ratio, gap, k));
        }
    }
    Ok(match best {
        Some((_, gap, k)) => HypothesisCheck {
            hypothesis: Hypothesis::A,
            verdict: AuditVerdict::Fail,
            declared: c.delta,
            empirical: delta_hat,
            witness: Some(vec![pairs[k].0.clone(), pairs[k].1.clone()]),
            violation: -gap,
        },
        None => HypothesisCheck {
            hypothesis: Hypothesis::A,
            verdict: sampled_verdict(0.0),
            declared: c.delta,
            empirical: delta_hat,
            witness: None,
            violation: 0.0,
        },
    })
}

fn check_b(spec: &ProblemSpec, c: &DeclaredConstants, points: &[Vec<f64>], second: bool) -> Result<HypothesisCheck> {
    let hypothesis = if second { Hypothesis::BD2F } else { Hypothesis::B };
    if let Drift::Linear(a) = spec.drift_kind() {
        if second {
            return Ok(HypothesisCheck {
                hypothesis,
                verdict: AuditVerdict::Pass,
                declared: c.c0,
                empirical: 0.0,
                witness: None,
                violation: 0.0,
            });
        }
        // sup_r ‖A‖_2 r exp(-c1 r^2) = ‖A‖_2 / sqrt(2 e c1), attained at r = 1/sqrt(2 c1)
        let op = sym_eigen(&(&a.transpose() * a))?.max().max(0.0).sqrt();
        let c0_hat = op / (2.0 * std::f64::consts::E * c.c1).sqrt();
        let ok = c0_hat <= c.c0 + WITNESS_TOL;
        let witness = if ok {
            None
        } else {
            let e = sym_eigen(&(&a.transpose() * a))?;
            let r = 1.0 / (2.0 * c.c1).sqrt();
            let d = spec.d();
            Some(vec![(0..d).map(|i| r * e.vectors[(i, d - 1)]).collect::<Vec<f64>>()])
        };
        let violation = match &witness {
            Some(w) => -growth_gap(spec, &w[0], c.c0, c.c1)?,
            None => 0.0,
        };
        return Ok(HypothesisCheck {
            hypothesis,
            verdict: if ok { AuditVerdict::Pass } else { AuditVerdict::Fail },
            declared: c.c0,
            empirical: c0_hat,
            witness,
            violation,
        });
    }
    let mut c0_hat: f64 = 0.0;
    let mut worst: Option<(f64, usize)> = None;
    for (k, x) in points.iter().enumerate() {
        let gap = if second {
            growth_gap_d2f(spec, x, c.c0, c.c1)?
        } else {
            growth_gap(spec, x, c.c0, c.c1)?
        };
        let value = c.c0 * (c.c1 * dot(x, x)).exp() - gap;
        c0_hat = c0_hat.max(value * (-c.c1 * dot(x, x)).exp());
        if worst.is_none_or(|w| gap < w.0) {
            worst = Some((gap, k));
        }
    }
    let (gap, k) = worst.expect("at least the origin is sampled");
    let verdict = sampled_verdict(gap);
    Ok(HypothesisCheck {
        hypothesis,
        verdict,
        declared: c.c0,
        empirical: c0_hat,
        witness: (verdict == AuditVerdict::Fail).then(|| vec![points[k].clone()]),
        violation: if verdict == AuditVerdict::Fail { -gap } else { 0.0 },
    })
}

fn check_c(spec: &ProblemSpec, c: &DeclaredConstants, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<HypothesisCheck> {
    if spec.constant_sigma().is_some() {
        return Ok(HypothesisCheck {
            hypothesis: Hypothesis::C,
            verdict: AuditVerdict::Pass,
            declared: c.ell,
            empirical: 0.0,
            witness: None,
            violation: 0.0,
        });
    }
    let mut ell_hat: f64 = 0.0;
    let mut worst: Option<(f64, usize)> = None;
    for (k, (x, y)) in pairs.iter().enumerate() {
        let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let n = norm(&dx);
        if n < 1e-12 {
            continue;
        }
        let gap = lipschitz_gap(spec, x, y, c.ell)?;
        ell_hat = ell_hat.max((c.ell * n - gap) / n);
        if worst.is_none_or(|w| gap < w.0) {
            worst = Some((gap, k));
        }
    }
    let (gap, k) = worst.unwrap_or((0.0, 0));
    let verdict = sampled_verdict(gap);
    Ok(HypothesisCheck {
        hypothesis: Hypothesis::C,
        verdict,
        declared: c.ell,
        empirical: ell_hat,
        witness: (verdict == AuditVerdict::Fail).then(|| vec![pairs[k].0.clone(), pairs[k].1.clone()]),
        violation: if verdict == AuditVerdict::Fail { -gap } else { 0.0 },
    })
}

fn check_d(spec: &ProblemSpec, c: &DeclaredConstants, points: &[Vec<f64>]) -> Result<HypothesisCheck> {
    let pts: &[Vec<f64>] = if spec.constant_sigma().is_some() { &points[..1] } else { points };
    let mut kappa_hat = f64::INFINITY;
    let mut worst: Option<(f64, usize)> = None;
    for (k, x) in pts.iter().enumerate() {
        let gap = ellipticity_gap(spec, x, c.kappa)?;
        kappa_hat = kappa_hat.min(gap + c.kappa);
        if worst.is_none_or(|w| gap < w.0) {
            worst = Some((gap, k));
        }
    }
    let (gap, k) = worst.expect("at least the origin is sampled");
    let failed = gap < -WITNESS_TOL;
    let verdict = match (failed, spec.constant_sigma().is_some()) {
        (true, _) => AuditVerdict::Fail,
        (false, true) => AuditVerdict::Pass,
        (false, false) => AuditVerdict::Inconclusive,
    };
    Ok(HypothesisCheck {
        hypothesis: Hypothesis::D,
        verdict,
        declared: c.kappa,
        empirical: kappa_hat,
        witness: failed.then(|| vec![pts[k].clone()]),
        violation: if failed { -gap } else { 0.0 },
    })
}

/// Re-evaluates a failing check's witness and returns the violation amount.
pub fn replay_witness(spec: &ProblemSpec, c: &DeclaredConstants, check: &HypothesisCheck) -> Result<Option<f64>> {
    let Some(w) = &check.witness else {
        return Ok(None);
    };
    let gap = match check.hypothesis {
        Hypothesis::A => monotonicity_gap(spec, &w[0], &w[1], c.delta)?,
        Hypothesis::B => growth_gap(spec, &w[0], c.c0, c.c1)?,
        Hypothesis::BD2F => growth_gap_d2f(spec, &w[0], c.c0, c.c1)?,
        Hypothesis::C => lipschitz_gap(spec, &w[0], &w[1], c.ell)?,
        Hypothesis::D => ellipticity_gap(spec, &w[0], c.kappa)?,
    };
    Ok(Some(-gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::problem::builtin;

    #[test]
    fn linear_problem_passes_exactly() {
        let p = builtin("linear1d", &[("a", 1.0), ("s", 1.0)]).unwrap();
        let a = audit_hypotheses(&p, 200, 3.0, 1).unwrap();
        for c in &a.checks {
            assert_eq!(c.verdict, AuditVerdict::Pass, "{c:?}");
        }
        assert_eq!(a.check(Hypothesis::A).empirical, 1.0);
        assert_eq!(a.check(Hypothesis::C).empirical, 0.0);
        assert_eq!(a.check(Hypothesis::D).empirical, 1.0);
    }

    #[test]
    fn quartic_with_true_delta_is_not_refuted() {
        let p = builtin("quartic1d", &[]).unwrap();
        let a = audit_hypotheses(&p, 2000, 2.0, 5).unwrap();
        assert!(!a.any_failure(), "{a:?}");
        assert!(a.check(Hypothesis::A).empirical >= 1.0);
    }

    #[test]
    fn quartic_with_delta_two_fails_near_origin() {
        let p = builtin("quartic1d", &[]).unwrap();
        let c = DeclaredConstants { delta: 2.0, ..*p.constants() };
        let a = audit_with_constants(&p, &c, 2000, 1.0, 5).unwrap();
        let chk = a.check(Hypothesis::A);
        assert_eq!(chk.verdict, AuditVerdict::Fail);
        let w = chk.witness.as_ref().unwrap();
        // the ratio at the witness is 1 + x^2 + x y + y^2, close to 1 near the origin
        let ratio = 1.0 + w[0][0] * w[0][0] + w[0][0] * w[1][0] + w[1][0] * w[1][0];
        assert!(ratio < 1.05, "ratio {ratio} at {w:?}");
        assert!(replay_witness(&p, &c, chk).unwrap().unwrap() > WITNESS_TOL);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = builtin("quartic1d", &[]).unwrap();
        let a = audit_hypotheses(&p, 100, 2.0, 9).unwrap();
        let b = audit_hypotheses(&p, 100, 2.0, 9).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn growth_and_ellipticity_failures_replay() {
        let p = builtin("quartic1d", &[]).unwrap();
        let c = DeclaredConstants { c0: 0.5, kappa: 2.0, ..*p.constants() };
        let a = audit_with_constants(&p, &c, 500, 3.0, 2).unwrap();
        for h in [Hypothesis::B, Hypothesis::BD2F, Hypothesis::D] {
            let chk = a.check(h);
            assert_eq!(chk.verdict, AuditVerdict::Fail, "{h:?}");
            assert!(replay_witness(&p, &c, chk).unwrap().unwrap() > WITNESS_TOL);
        }
    }

    #[test]
    fn multiplicative_noise_lipschitz() {
        let text = r#"{"d":1,"field":{"expr":"x1"},"sigma":{"expr":"1 + 0.5*sin(x1)"},
            "constants":{"delta":1,"ell":0.5,"c0":1,"c1":0.25,"kappa":0.25}}"#;
        let p = ProblemSpec::from_json(text).unwrap();
        let a = audit_hypotheses(&p, 500, 3.0, 3).unwrap();
        assert_eq!(a.check(Hypothesis::C).verdict, AuditVerdict::Inconclusive);
        assert!(a.check(Hypothesis::C).empirical <= 0.5);
        let c = DeclaredConstants { ell: 0.1, ..*p.constants() };
        let b = audit_with_constants(&p, &c, 500, 3.0, 3).unwrap();
        let chk = b.check(Hypothesis::C);
        assert_eq!(chk.verdict, AuditVerdict::Fail);
        assert!(replay_witness(&p, &c, chk).unwrap().unwrap() > WITNESS_TOL);
    }
}
