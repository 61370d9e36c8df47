use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{solve_lyapunov_kron, Matrix};
use crate::model::ProblemSpec;

/// Explicit constants of the small-noise Gaussian bound, computed from the declared
/// `delta, ell, c0, c1` and from `sigma(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub problem: String,
    pub d: usize,
    pub delta: f64,
    pub ell: f64,
    pub c0: f64,
    pub c1: f64,
    /// `‖sigma(0) sigma(0)^T‖_F`
    pub q_fro: f64,
    /// `Tr(sigma(0)^T sigma(0))`
    #[serde(rename = "C0")]
    pub trace_q: f64,
    /// `‖V V^T‖_F d^2 / delta`, `V = sigma(0)`
    #[serde(rename = "C_star")]
    pub c_star: f64,
    pub eps_star: f64,
    /// `delta / (8 c1 ‖V V^T‖_F d^2)`
    pub eps_star_growth: f64,
    /// `delta / ell^2`, absent when `ell = 0`.
    pub eps_star_lipschitz: Option<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    /// `48 c0 / (‖V V^T‖_F d^2) + ell sqrt(C0) / delta`
    #[serde(rename = "C_lemmaC")]
    pub c_lemma_c: f64,
    /// `(48 c0 C_star + ell sqrt(C0)) / delta`
    #[serde(rename = "C_lemmaC_alt")]
    pub c_lemma_c_alt: f64,
    /// The larger of the two linearisation constants; used in one-sided bounds.
    #[serde(rename = "C_gap")]
    pub c_gap: f64,
    /// The two linearisation constants differ.
    pub constant_discrepancy: bool,
    /// Constants were declared for an expression problem and never audited.
    pub declared_unaudited: bool,
    /// Stationary covariance `Sigma` of the linearisation.
    pub sigma_inf: Matrix,
    /// `‖Sigma^(1/2)‖_F^2 = Tr(Sigma)`
    pub sigma_sqrt_fro_sq: f64,
}

pub fn constants(spec: &ProblemSpec) -> Result<ConstantsReport> {
    let c = spec.constants();
    let d = spec.d();
    let df = d as f64;
    let q = spec.q_at_zero();
    let q_fro = q.fro_norm();
    let trace_q = q.trace();
    let c_star = q_fro * df * df / c.delta;
    let eps_star_growth = c.delta / (8.0 * c.c1 * q_fro * df * df);
    let eps_star_lipschitz = (c.ell > 0.0).then(|| c.delta / (c.ell * c.ell));
    let eps_star = eps_star_lipschitz.map_or(eps_star_growth, |l| eps_star_growth.min(l));
    let lip = c.ell * trace_q.sqrt() / c.delta;
    let k = 96.0 * c.c0 / (q_fro * df * df) + 2.0 * lip;
    let c_lemma_c = 48.0 * c.c0 / (q_fro * df * df) + lip;
    let c_lemma_c_alt = (48.0 * c.c0 * c_star + c.ell * trace_q.sqrt()) / c.delta;
    let c_gap = c_lemma_c.max(c_lemma_c_alt);
    let constant_discrepancy = (c_lemma_c - c_lemma_c_alt).abs() > 1e-12 * c_gap;
    let sigma_inf = solve_lyapunov_kron(spec.jacobian_at_zero(), &q)?.sigma_inf;
    let sigma_sqrt_fro_sq = sigma_inf.trace();
    if constant_discrepancy {
        log::info!("linearisation constants differ: {c_lemma_c} vs {c_lemma_c_alt}; using {c_gap}");
    }
    Ok(ConstantsReport {
        problem: spec.name().to_string(),
        d,
        delta: c.delta,
        ell: c.ell,
        c0: c.c0,
        c1: c.c1,
        q_fro,
        trace_q,
        c_star,
        eps_star,
        eps_star_growth,
        eps_star_lipschitz,
        k,
        c_lemma_c,
        c_lemma_c_alt,
        c_gap,
        constant_discrepancy,
        declared_unaudited: !spec.constants_audited(),
        sigma_inf,
        sigma_sqrt_fro_sq,
    })
}

impl ConstantsReport {
    /// `max{(1/delta) ln(4 C0 / (delta C^2 eps)), (1/delta) ln(4 d ‖Sigma^(1/2)‖_F^2 / (C^2 eps))}`
    /// with `C = C_lemmaC`. May be negative for small `C0`.
    pub fn t_eps(&self, epsilon: f64) -> f64 {
        let c2 = self.c_lemma_c * self.c_lemma_c;
        let a = (4.0 * self.trace_q / (self.delta * c2 * epsilon)).ln() / self.delta;
        let b = (4.0 * self.d as f64 * self.sigma_sqrt_fro_sq / (c2 * epsilon)).ln() / self.delta;
        a.max(b)
    }

    /// Burn-in horizon `max(t_eps, 10 / delta)`.
    pub fn burn_in(&self, epsilon: f64) -> f64 {
        self.t_eps(epsilon).max(10.0 / self.delta)
    }

    /// `K sqrt(eps)`.
    pub fn bound(&self, epsilon: f64) -> f64 {
        self.k * epsilon.sqrt()
    }
}
