//! Lyapunov equation `A X + X A^T = Q`.
//!
//! Two independent routes: the dense Kronecker system (primary) and Gauss-Legendre
//! quadrature of `X = ∫_0^∞ exp(-A s) Q exp(-A^T s) ds` (oracle).

use serde::{Deserialize, Serialize};

use super::{mat_exp, sym_eigen, Lu, Matrix};
use crate::error::{Error, Result};

const MAX_KRON_DIM: usize = 64;
const MAX_REFINEMENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LyapunovMethod {
    Kronecker,
    Quadrature,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovSolution {
    pub sigma_inf: Matrix,
    pub residual_fro: f64,
    pub method: LyapunovMethod,
}

/// `‖A X + X A^T - Q‖_F`.
pub fn lyapunov_residual(a: &Matrix, x: &Matrix, q: &Matrix) -> f64 {
    let ax = a * x;
    let xat = x * &a.transpose();
    (&(&ax + &xat) - q).fro_norm()
}

fn check_pair(a: &Matrix, q: &Matrix) -> Result<usize> {
    let d = a.require_square("lyapunov drift")?;
    let dq = q.require_square("lyapunov rhs")?;
    if d != dq {
        return Err(Error::InvalidInput(format!(
            "lyapunov: drift is {d}x{d} but rhs is {dq}x{dq}"
        )));
    }
    Ok(d)
}

/// Solves `(I ⊗ A + A ⊗ I) vec(X) = vec(Q)` by LU with partial pivoting.
pub fn solve_lyapunov_kron(a: &Matrix, q: &Matrix) -> Result<LyapunovSolution> {
    let d = check_pair(a, q)?;
    if d > MAX_KRON_DIM {
        return Err(Error::InvalidInput(format!(
            "kronecker lyapunov solve limited to d <= {MAX_KRON_DIM}, got {d}"
        )));
    }
    let n = d * d;
    let mut k = Matrix::zeros(n, n);
    // Row-major vec: row (i*d + j) of the system is sum_k A_ik X_kj + X_ik A_jk.
    for i in 0..d {
        for j in 0..d {
            let row = i * d + j;
            for m in 0..d {
                k[(row, m * d + j)] += a[(i, m)];
                k[(row, i * d + m)] += a[(j, m)];
            }
        }
    }
    let lu = Lu::new(&k)?;
    let x = lu.solve(q.as_slice());
    let x = Matrix::from_row_major(d, d, x).symmetric_part();
    let residual_fro = lyapunov_residual(a, &x, q);
    Ok(LyapunovSolution {
        sigma_inf: x,
        residual_fro,
        method: LyapunovMethod::Kronecker,
    })
}

/// Quadrature route with the decay rate taken from the symmetric part of `A`.
pub fn solve_lyapunov_quadrature(a: &Matrix, q: &Matrix, tol: f64) -> Result<LyapunovSolution> {
    check_pair(a, q)?;
    let rate = sym_eigen(&a.symmetric_part())?.min();
    solve_lyapunov_quadrature_with_rate(a, q, tol, rate)
}

/// Quadrature route with an explicit contraction rate `delta` (the smaller of declared
/// and observed rates is the caller's business).
pub fn solve_lyapunov_quadrature_with_rate(
    a: &Matrix,
    q: &Matrix,
    tol: f64,
    delta: f64,
) -> Result<LyapunovSolution> {
    let d = check_pair(a, q)?;
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::InvalidInput(format!(
            "quadrature tolerance must lie in (0, 1e-4], got {tol}"
        )));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "quadrature route needs a positive contraction rate, got {delta}"
        )));
    }
    let qn = q.fro_norm();
    if qn == 0.0 {
        return Ok(LyapunovSolution {
            sigma_inf: Matrix::zeros(d, d),
            residual_fro: 0.0,
            method: LyapunovMethod::Quadrature,
        });
    }
    let horizon = (-(tol * delta / qn).ln() / (2.0 * delta)).max(1.0 / delta);
    let neg_a = -a;

    let mut panels = ((2.0 * horizon * a.fro_norm()).ceil() as usize).max(4);
    let mut prev = integrate(&neg_a, q, horizon, panels)?;
    for _ in 0..MAX_REFINEMENTS {
        panels *= 2;
        let next = integrate(&neg_a, q, horizon, panels)?;
        let change = (&next - &prev).fro_norm();
        prev = next;
        if change <= tol {
            let x = prev.symmetric_part();
            let residual_fro = lyapunov_residual(a, &x, q);
            return Ok(LyapunovSolution {
                sigma_inf: x,
                residual_fro,
                method: LyapunovMethod::Quadrature,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "lyapunov quadrature",
        iterations: MAX_REFINEMENTS,
    })
}

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn integrate(neg_a: &Matrix, q: &Matrix, horizon: f64, panels: usize) -> Result<Matrix> {
    let d = q.rows();
    let h = horizon / panels as f64;
    let mut acc = Matrix::zeros(d, d);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let s = mid + 0.5 * h * node;
            let e = mat_exp(neg_a, s)?;
            let term = &(&e * q) * &e.transpose();
            acc = &acc + &term.scale(0.5 * h * w);
        }
    }
    Ok(acc)
}
