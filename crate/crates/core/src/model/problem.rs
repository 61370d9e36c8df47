//! Problem definitions: drift `F`, diffusion `sigma`, declared constants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::expr::{parse_components, parse_field_expr, FieldExpr};
use crate::error::{Error, EvalError, Result};
use crate::linalg::{norm, sym_eigen, Matrix};

/// Builtin problem names.
pub const BUILTINS: [&str; 5] = ["linear1d", "linear_nd", "quartic1d", "gradient_gibbs", "rotational2d"];

const CONSTANT_KEYS: [&str; 5] = ["delta", "ell", "c0", "c1", "kappa"];

#[derive(Debug, Clone)]
pub enum Drift {
    /// `F(x) = A x`.
    Linear(Matrix),
    /// 1D polynomial `F(x) = sum_k coeffs[k] x^k`.
    Poly1d(Vec<f64>),
    Expr(FieldExpr),
}

#[derive(Debug, Clone)]
pub enum Diffusion {
    Constant(Matrix),
    /// `d * d` components, row-major.
    Expr(FieldExpr),
}

/// The constants of hypotheses (A)-(D) as declared by the user (or a builtin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredConstants {
    pub delta: f64,
    pub ell: f64,
    pub c0: f64,
    pub c1: f64,
    pub kappa: f64,
}

impl DeclaredConstants {
    pub fn validate(&self) -> Result<()> {
        let check = |key: &str, v: f64, allow_zero: bool| {
            let ok = v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
            if ok {
                Ok(())
            } else {
                Err(Error::Config {
                    key: format!("constants.{key}"),
                    message: format!(
                        "must be {} and finite, got {v}",
                        if allow_zero { "nonnegative" } else { "positive" }
                    ),
                })
            }
        };
        check("delta", self.delta, false)?;
        check("ell", self.ell, true)?;
        check("c0", self.c0, false)?;
        check("c1", self.c1, false)?;
        check("kappa", self.kappa, false)
    }
}

/// Problem document as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub d: usize,
    pub field: FieldDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl ConstantsDoc {
    fn entries(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("delta", self.delta),
            ("ell", self.ell),
            ("c0", self.c0),
            ("c1", self.c1),
            ("kappa", self.kappa),
        ]
    }
}

impl From<DeclaredConstants> for ConstantsDoc {
    fn from(c: DeclaredConstants) -> Self {
        ConstantsDoc {
            delta: Some(c.delta),
            ell: Some(c.ell),
            c0: Some(c.c0),
            c1: Some(c.c1),
            kappa: Some(c.kappa),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    name: String,
    d: usize,
    drift: Drift,
    diffusion: Diffusion,
    constants: DeclaredConstants,
    audited: bool,
    jacobian_at_zero: Matrix,
    sigma_at_zero: Matrix,
    doc: ProblemDoc,
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn fd_step(x: &[f64], power: f64) -> f64 {
    f64::EPSILON.powf(power) * norm(x).max(1.0)
}

fn param_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: format!("field.params.{key}"),
        message: message.into(),
    }
}

struct Params<'a> {
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn get(&self, key: &str) -> Option<f64> {
        self.map.get(key).copied()
    }

    fn or(&self, key: &str, default: f64) -> f64 {
        self.get(key).unwrap_or(default)
    }

    fn check_keys(&self, allowed: impl Fn(&str) -> bool) -> Result<()> {
        for (k, v) in self.map {
            if !allowed(k) {
                return Err(param_err(k, "unknown parameter"));
            }
            if !v.is_finite() {
                return Err(param_err(k, "must be finite"));
            }
        }
        Ok(())
    }
}

fn min_sym_eig(a: &Matrix) -> Result<f64> {
    Ok(sym_eigen(&a.symmetric_part())?.min())
}

fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(sym_eigen(&(&a.transpose() * a))?.max().max(0.0).sqrt())
}

/// Minimum of a 1D polynomial over the real line, found by scanning the interval that
/// contains every critical point (Cauchy bound on the roots of the derivative).
fn poly_min(coeffs: &[f64]) -> f64 {
    let dp = poly_derivative(coeffs);
    let lead = dp.iter().rposition(|c| *c != 0.0);
    let r = match lead {
        None => 1.0,
        Some(n) => 1.0 + dp[..n].iter().map(|c| (c / dp[n]).abs()).fold(0.0, f64::max),
    };
    let m = 200_000;
    let h = 2.0 * r / m as f64;
    let (mut best_x, mut best) = (-r, horner(coeffs, -r));
    for i in 1..=m {
        let x = -r + i as f64 * h;
        let v = horner(coeffs, x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // golden-section refinement around the grid minimum
    let (mut lo, mut hi) = (best_x - h, best_x + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if horner(coeffs, a) < horner(coeffs, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(horner(coeffs, 0.5 * (lo + hi)))
}

/// Smallest `c0` with `max(|f(x)|, |g(x)|) <= c0 exp(c1 x^2)` on a wide grid, padded by 5%.
fn growth_constant_1d(f: &[f64], g: &[f64], c1: f64) -> f64 {
    let m = 400_000;
    let r = 50.0;
    let mut best: f64 = 0.0;
    for i in 0..=m {
        let x = -r + 2.0 * r * i as f64 / m as f64;
        let w = (-c1 * x * x).exp();
        best = best.max(horner(f, x).abs() * w).max(horner(g, x).abs() * w);
    }
    1.05 * best.max(1e-12)
}

impl ProblemSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn drift_kind(&self) -> &Drift {
        &self.drift
    }

    pub fn diffusion_kind(&self) -> &Diffusion {
        &self.diffusion
    }

    pub fn constants(&self) -> &DeclaredConstants {
        &self.constants
    }

    /// False for expression problems, whose growth constants are taken on trust.
    pub fn constants_audited(&self) -> bool {
        self.audited
    }

    pub fn jacobian_at_zero(&self) -> &Matrix {
        &self.jacobian_at_zero
    }

    pub fn sigma_at_zero(&self) -> &Matrix {
        &self.sigma_at_zero
    }

    /// `sigma(0) sigma(0)^T`.
    pub fn q_at_zero(&self) -> Matrix {
        &self.sigma_at_zero * &self.sigma_at_zero.transpose()
    }

    /// Resolved document (all constants filled in).
    pub fn doc(&self) -> &ProblemDoc {
        &self.doc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("problem doc serializes")
    }

    pub fn linear_matrix(&self) -> Option<&Matrix> {
        match &self.drift {
            Drift::Linear(a) => Some(a),
            _ => None,
        }
    }

    pub fn constant_sigma(&self) -> Option<&Matrix> {
        match &self.diffusion {
            Diffusion::Constant(s) => Some(s),
            Diffusion::Expr(_) => None,
        }
    }

    /// Linear drift with constant diffusion: the SDE is itself an OU process.
    pub fn is_ou(&self) -> bool {
        self.linear_matrix().is_some() && self.constant_sigma().is_some()
    }

    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) -> std::result::Result<(), EvalError> {
        match &self.drift {
            Drift::Linear(a) => {
                a.mat_vec_into(x, out);
                Ok(())
            }
            Drift::Poly1d(c) => {
                out[0] = horner(c, x[0]);
                if out[0].is_finite() {
                    Ok(())
                } else {
                    Err(EvalError::Overflow("polynomial drift"))
                }
            }
            Drift::Expr(e) => e.eval_into(x, out),
        }
    }

    pub fn drift(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.d];
        self.drift_into(x, &mut out)?;
        Ok(out)
    }

    pub fn sigma(&self, x: &[f64]) -> std::result::Result<Matrix, EvalError> {
        match &self.diffusion {
            Diffusion::Constant(s) => Ok(s.clone()),
            Diffusion::Expr(e) => Ok(Matrix::from_row_major(self.d, self.d, e.eval(x)?)),
        }
    }

    /// `out = sigma(x) dw`. `scratch` must hold `d * d` values for expression diffusions.
    pub fn noise_into(
        &self,
        x: &[f64],
        dw: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> std::result::Result<(), EvalError> {
        match &self.diffusion {
            Diffusion::Constant(s) => {
                s.mat_vec_into(dw, out);
                Ok(())
            }
            Diffusion::Expr(e) => {
                e.eval_into(x, scratch)?;
                let d = self.d;
                for (i, o) in out.iter_mut().enumerate() {
                    *o = scratch[i * d..(i + 1) * d].iter().zip(dw).map(|(a, b)| a * b).sum();
                }
                Ok(())
            }
        }
    }

    /// Central-difference Jacobian with step `eps^(1/3) max(1, ‖x‖)`.
    pub fn jacobian_fd(&self, x: &[f64]) -> std::result::Result<Matrix, EvalError> {
        let d = self.d;
        let h = fd_step(x, 1.0 / 3.0);
        let mut j = Matrix::zeros(d, d);
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; d];
        let mut fm = vec![0.0; d];
        for c in 0..d {
            xp[c] = x[c] + h;
            self.drift_into(&xp, &mut fp)?;
            xp[c] = x[c] - h;
            self.drift_into(&xp, &mut fm)?;
            xp[c] = x[c];
            for r in 0..d {
                j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        Ok(j)
    }

    /// Analytic Jacobian where the drift is known in closed form, finite differences otherwise.
    pub fn jacobian(&self, x: &[f64]) -> std::result::Result<Matrix, EvalError> {
        match &self.drift {
            Drift::Linear(a) => Ok(a.clone()),
            Drift::Poly1d(c) => Ok(Matrix::scalar(horner(&poly_derivative(c), x[0]))),
            Drift::Expr(_) => self.jacobian_fd(x),
        }
    }

    /// Frobenius norm of the second-derivative tensor `D^2 F(x)`.
    pub fn d2f_norm(&self, x: &[f64]) -> std::result::Result<f64, EvalError> {
        match &self.drift {
            Drift::Linear(_) => Ok(0.0),
            Drift::Poly1d(c) => Ok(horner(&poly_derivative(&poly_derivative(c)), x[0]).abs()),
            Drift::Expr(_) => {
                let d = self.d;
                let h = fd_step(x, 0.25);
                let mut acc = 0.0;
                let mut y = x.to_vec();
                let mut f = vec![vec![0.0; d]; 4];
                for i in 0..d {
                    for j in 0..d {
                        for (k, (si, sj)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                            .into_iter()
                            .enumerate()
                        {
                            y.copy_from_slice(x);
                            y[i] += si * h;
                            y[j] += sj * h;
                            self.drift_into(&y, &mut f[k])?;
                        }
                        for r in 0..d {
                            let v = (f[0][r] - f[1][r] - f[2][r] + f[3][r]) / (4.0 * h * h);
                            acc += v * v;
                        }
                    }
                }
                Ok(acc.sqrt())
            }
        }
    }

    /// Potential `V(x) = int_0^x F` in one dimension (every 1D drift is a gradient).
    pub fn potential_1d(&self, x: f64) -> Result<f64> {
        if self.d != 1 {
            return Err(Error::InvalidInput("potential_1d needs d = 1".into()));
        }
        match &self.drift {
            Drift::Linear(a) => Ok(0.5 * a[(0, 0)] * x * x),
            Drift::Poly1d(c) => {
                let v: Vec<f64> = std::iter::once(0.0)
                    .chain(c.iter().enumerate().map(|(k, ck)| ck / (k as f64 + 1.0)))
                    .collect();
                Ok(horner(&v, x))
            }
            Drift::Expr(e) => {
                // composite 8-point Gauss-Legendre on [0, x]
                const PANELS: usize = 32;
                let h = x / PANELS as f64;
                let mut acc = 0.0;
                for p in 0..PANELS {
                    let mid = (p as f64 + 0.5) * h;
                    for (node, w) in GL8.0.iter().zip(GL8.1) {
                        acc += w * e.components()[0].eval(&[mid + 0.5 * h * node])?;
                    }
                }
                Ok(0.5 * h * acc)
            }
        }
    }

    /// Temperature `eps s^2` of the 1D Gibbs law `exp(-2V / (eps s^2))`, when it applies
    /// (one dimension, constant diffusion `s`).
    pub fn gibbs_temperature(&self, epsilon: f64) -> Option<f64> {
        if self.d != 1 {
            return None;
        }
        self.constant_sigma().map(|s| epsilon * s[(0, 0)] * s[(0, 0)])
    }

    /// Re-declares the constants without re-checking them against the drift. Used to
    /// audit deliberately wrong declarations.
    pub fn with_constants_unchecked(mut self, c: DeclaredConstants) -> Self {
        self.constants = c;
        if let Some(doc) = self.doc.constants.as_mut() {
            *doc = c.into();
        }
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| Error::Config {
            key: "problem".into(),
            message: e.to_string(),
        })?;
        Self::from_doc(&doc)
    }

    pub fn from_doc(doc: &ProblemDoc) -> Result<Self> {
        if doc.d == 0 {
            return Err(Error::Config {
                key: "d".into(),
                message: "dimension must be positive".into(),
            });
        }
        let f = &doc.field;
        match (&f.builtin, &f.expr) {
            (Some(name), None) => {
                if doc.sigma.is_some() {
                    return Err(Error::Config {
                        key: "sigma".into(),
                        message: "builtin problems take their noise scale from params.s".into(),
                    });
                }
                let mut params = f.params.clone().unwrap_or_default();
                if let Some(c) = &doc.constants {
                    for (k, v) in c.entries() {
                        if let Some(v) = v {
                            if params.insert(k.to_string(), v).is_some() {
                                return Err(Error::Config {
                                    key: format!("constants.{k}"),
                                    message: "also given in field.params".into(),
                                });
                            }
                        }
                    }
                }
                if name == "linear_nd" {
                    params.entry("d".into()).or_insert(doc.d as f64);
                }
                let spec = builtin_problem(name, &params)?;
                if spec.d != doc.d {
                    return Err(Error::Config {
                        key: "d".into(),
                        message: format!("builtin `{name}` has d = {}, document says {}", spec.d, doc.d),
                    });
                }
                Ok(spec)
            }
            (None, Some(src)) => {
                if f.params.is_some() {
                    return Err(Error::Config {
                        key: "field.params".into(),
                        message: "params only apply to builtin fields".into(),
                    });
                }
                expr_problem(doc, src)
            }
            (Some(_), Some(_)) => Err(Error::Config {
                key: "field".into(),
                message: "give exactly one of `builtin` and `expr`".into(),
            }),
            (None, None) => Err(Error::Config {
                key: "field".into(),
                message: "missing `builtin` or `expr`".into(),
            }),
        }
    }

    fn finish(
        name: &str,
        d: usize,
        drift: Drift,
        diffusion: Diffusion,
        constants: DeclaredConstants,
        audited: bool,
        analytic_jacobian: Option<Matrix>,
        field: FieldDoc,
        sigma_doc: Option<SigmaDoc>,
    ) -> Result<Self> {
        constants.validate()?;
        let mut spec = ProblemSpec {
            name: name.to_string(),
            d,
            drift,
            diffusion,
            constants,
            audited,
            jacobian_at_zero: Matrix::zeros(d, d),
            sigma_at_zero: Matrix::zeros(d, d),
            doc: ProblemDoc {
                d,
                field,
                sigma: sigma_doc,
                constants: Some(constants.into()),
            },
        };
        let zero = vec![0.0; d];
        let f0 = spec.drift(&zero)?;
        if norm(&f0) > 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "F(0) must vanish, got ‖F(0)‖ = {:e}",
                norm(&f0)
            )));
        }
        let fd = spec.jacobian_fd(&zero)?;
        let jac = analytic_jacobian.unwrap_or_else(|| fd.clone());
        let rel = (&jac - &fd).fro_norm() / jac.fro_norm().max(1e-300);
        if rel > 1e-6 {
            return Err(Error::InvalidProblem(format!(
                "jacobian at 0 disagrees with finite differences (relative {rel:e})"
            )));
        }
        let lam = min_sym_eig(&jac)?;
        if lam < constants.delta - 1e-8 {
            return Err(Error::InvalidProblem(format!(
                "hypothesis (A) fails at 0: symmetric part of DF(0) has eigenvalue {lam} < delta = {}",
                constants.delta
            )));
        }
        spec.sigma_at_zero = spec.sigma(&zero)?;
        if !spec.sigma_at_zero.is_finite() {
            return Err(Error::InvalidProblem("sigma(0) is not finite".into()));
        }
        spec.jacobian_at_zero = jac;
        Ok(spec)
    }
}

const GL8: ([f64; 8], [f64; 8]) = (
    [
        -0.960_289_856_497_536_3,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ],
    [
        0.101_228_536_290_376_26,
        0.222_381_034_453_374_47,
        0.313_706_645_877_887_3,
        0.362_683_783_378_362,
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_47,
        0.101_228_536_290_376_26,
    ],
);

fn expr_problem(doc: &ProblemDoc, src: &str) -> Result<ProblemSpec> {
    let d = doc.d;
    let field = parse_field_expr(src, d)?;
    let sigma_doc = doc.sigma.clone().ok_or_else(|| Error::Config {
        key: "sigma".into(),
        message: "expression problems need a diffusion".into(),
    })?;
    let diffusion = match (&sigma_doc.constant, sigma_doc.scalar, &sigma_doc.expr) {
        (Some(m), None, None) => {
            if m.rows() != d || m.cols() != d {
                return Err(Error::Config {
                    key: "sigma.constant".into(),
                    message: format!("expected a {d}x{d} matrix"),
                });
            }
            Diffusion::Constant(m.clone())
        }
        (None, Some(s), None) => {
            if !s.is_finite() || s == 0.0 {
                return Err(Error::Config {
                    key: "sigma.scalar".into(),
                    message: "must be finite and nonzero".into(),
                });
            }
            Diffusion::Constant(Matrix::identity(d).scale(s))
        }
        (None, None, Some(e)) => Diffusion::Expr(parse_components(e, d, d * d)?),
        _ => {
            return Err(Error::Config {
                key: "sigma".into(),
                message: "give exactly one of `constant`, `scalar`, `expr`".into(),
            })
        }
    };
    let c = doc.constants.clone().ok_or_else(|| Error::Config {
        key: "constants".into(),
        message: "expression problems must declare delta, ell, c0, c1, kappa".into(),
    })?;
    let need = |k: &str, v: Option<f64>| {
        v.ok_or_else(|| Error::Config {
            key: format!("constants.{k}"),
            message: "missing".into(),
        })
    };
    let constants = DeclaredConstants {
        delta: need("delta", c.delta)?,
        ell: need("ell", c.ell)?,
        c0: need("c0", c.c0)?,
        c1: need("c1", c.c1)?,
        kappa: need("kappa", c.kappa)?,
    };
    ProblemSpec::finish(
        "expr",
        d,
        Drift::Expr(field),
        diffusion,
        constants,
        false,
        None,
        doc.field.clone(),
        Some(sigma_doc),
    )
}

/// Builds one of the builtin problems. Constant overrides (`delta`, `ell`, `c0`, `c1`,
/// `kappa`) may be passed alongside the model parameters.
pub fn builtin_problem(name: &str, params: &BTreeMap<String, f64>) -> Result<ProblemSpec> {
    let p = Params { map: params };
    let is_const = |k: &str| CONSTANT_KEYS.contains(&k);
    let s = p.or("s", 1.0);
    if s == 0.0 {
        return Err(param_err("s", "noise scale must be nonzero"));
    }
    let field_doc = FieldDoc {
        builtin: Some(name.to_string()),
        params: Some(params.iter().filter(|(k, _)| !is_const(k)).map(|(k, v)| (k.clone(), *v)).collect()),
        expr: None,
    };
    // declared constants default to the analytic ones
    let declare = |delta: f64, c0: f64, c1: f64| DeclaredConstants {
        delta: p.or("delta", delta),
        ell: p.or("ell", 0.0),
        c0: p.or("c0", c0),
        c1: p.or("c1", c1),
        kappa: p.or("kappa", s * s),
    };
    let reject_delta = |delta: f64, sharp: f64| -> Result<()> {
        if delta > sharp + 1e-8 {
            Err(param_err(
                "delta",
                format!("hypothesis (A) holds only for delta <= {sharp}, got {delta}"),
            ))
        } else {
            Ok(())
        }
    };
    match name {
        "linear1d" => {
            p.check_keys(|k| k == "a" || k == "s" || is_const(k))?;
            let a = p.or("a", 1.0);
            if a <= 0.0 {
                return Err(param_err("a", "must be positive"));
            }
            let c = declare(a, a, 0.25);
            reject_delta(c.delta, a)?;
            ProblemSpec::finish(
                name,
                1,
                Drift::Linear(Matrix::scalar(a)),
                Diffusion::Constant(Matrix::scalar(s)),
                c,
                true,
                Some(Matrix::scalar(a)),
                field_doc,
                None,
            )
        }
        "quartic1d" => {
            p.check_keys(|k| k == "s" || is_const(k))?;
            let c = declare(1.0, 5.0, 0.3);
            reject_delta(c.delta, 1.0)?;
            ProblemSpec::finish(
                name,
                1,
                Drift::Poly1d(vec![0.0, 1.0, 0.0, 1.0]),
                Diffusion::Constant(Matrix::scalar(s)),
                c,
                true,
                Some(Matrix::scalar(1.0)),
                field_doc,
                None,
            )
        }
        "gradient_gibbs" => {
            p.check_keys(|k| {
                k == "s" || is_const(k) || matches!(k, "v2" | "v3" | "v4" | "v5" | "v6" | "v7" | "v8")
            })?;
            // V(x) = sum_{k=2}^{8} v_k x^k, so F = V' has no constant term
            let v: Vec<f64> = (0..=8)
                .map(|k| if k < 2 { 0.0 } else { p.or(&format!("v{k}"), 0.0) })
                .collect();
            let f = poly_derivative(&v);
            let f2 = poly_derivative(&poly_derivative(&f));
            let vpp_min = poly_min(&poly_derivative(&f));
            if !(vpp_min > 0.0) {
                return Err(param_err(
                    "v2",
                    format!("V'' must be bounded below by a positive constant (min {vpp_min})"),
                ));
            }
            let c1 = p.or("c1", 0.25);
            let c = declare(vpp_min, growth_constant_1d(&f, &f2, c1), c1);
            reject_delta(c.delta, vpp_min)?;
            let jac = Matrix::scalar(f[1]);
            ProblemSpec::finish(
                name,
                1,
                Drift::Poly1d(f),
                Diffusion::Constant(Matrix::scalar(s)),
                c,
                true,
                Some(jac),
                field_doc,
                None,
            )
        }
        "linear_nd" => {
            let d = p.get("d").ok_or_else(|| param_err("d", "missing dimension"))?;
            if !(d >= 1.0 && d <= 9.0 && d.fract() == 0.0) {
                return Err(param_err("d", "must be an integer in 1..=9"));
            }
            let d = d as usize;
            p.check_keys(|k| {
                if k == "d" || k == "s" || is_const(k) {
                    return true;
                }
                let b = k.as_bytes();
                b.len() == 3
                    && b[0] == b'a'
                    && (b'1'..=b'0' + d as u8).contains(&b[1])
                    && (b'1'..=b'0' + d as u8).contains(&b[2])
            })?;
            let mut a = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    a[(i, j)] = p.or(&format!("a{}{}", i + 1, j + 1), 0.0);
                }
            }
            let lam = min_sym_eig(&a)?;
            if !(lam > 0.0) {
                return Err(param_err(
                    "a11",
                    format!("symmetric part of A must be positive definite (min eigenvalue {lam})"),
                ));
            }
            let c = declare(lam, spectral_norm(&a)?, 0.25);
            reject_delta(c.delta, lam)?;
            ProblemSpec::finish(
                name,
                d,
                Drift::Linear(a.clone()),
                Diffusion::Constant(Matrix::identity(d).scale(s)),
                c,
                true,
                Some(a),
                field_doc,
                None,
            )
        }
        "rotational2d" => {
            p.check_keys(|k| k == "omega" || k == "s" || is_const(k))?;
            let delta = p.or("delta", 1.0);
            if !(delta > 0.0) {
                return Err(param_err("delta", "must be positive"));
            }
            let omega = p.or("omega", 1.0);
            let a = Matrix::from_row_major(2, 2, vec![delta, omega, -omega, delta]);
            let c = declare(delta, (delta * delta + omega * omega).sqrt(), 0.25);
            ProblemSpec::finish(
                name,
                2,
                Drift::Linear(a.clone()),
                Diffusion::Constant(Matrix::identity(2).scale(s)),
                c,
                true,
                Some(a),
                field_doc,
                None,
            )
        }
        other => Err(Error::Config {
            key: "field.builtin".into(),
            message: format!("unknown builtin `{other}` (expected one of {})", BUILTINS.join(", ")),
        }),
    }
}

/// Convenience wrapper over [`builtin_problem`] taking `(key, value)` pairs.
pub fn builtin(name: &str, params: &[(&str, f64)]) -> Result<ProblemSpec> {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_problem(name, &map)
}
