//! Cyclic Jacobi eigendecomposition for symmetric matrices, and the PSD square root.

use super::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// `S = V diag(values) V^T`, eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

fn symmetry_tol(s: &Matrix) -> f64 {
    1e-10 * s.max_abs().max(1.0)
}

/// Eigendecomposition of a symmetric matrix. Only the upper triangle is trusted after
/// the symmetry check; the input is symmetrised first.
pub fn sym_eigen(s: &Matrix) -> Result<SymEigen> {
    let n = s.require_square("sym_eigen")?;
    let asym = s.max_asymmetry();
    if asym > symmetry_tol(s) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = s.symmetric_part();
    let mut v = Matrix::identity(n);
    let scale = a.fro_norm();
    if scale == 0.0 {
        return Ok(SymEigen {
            values: vec![0.0; n],
            vectors: v,
        });
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, n, p, q, c, sn);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "jacobi eigensolver",
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    Ok(SymEigen { values, vectors })
}

// A <- J^T A J for the Givens rotation in the (p, q) plane.
fn rotate(a: &mut Matrix, n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
}

/// Symmetric PSD square root. Eigenvalues in `[-1e-8, 0)` are clipped to zero; anything
/// more negative is rejected.
pub fn sym_sqrt(s: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(s)?;
    let floor = -1e-8 * s.fro_norm().max(1.0);
    if eig.min() < floor {
        return Err(Error::NotPsd(eig.min()));
    }
    let r = eig.reconstruct_with(|l| l.max(0.0).sqrt());
    Ok(r.symmetric_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sqrt_identity_and_diagonal() {
        let i = Matrix::identity(3);
        assert!((&sym_sqrt(&i).unwrap() - &i).fro_norm() < 1e-15);
        let d = sym_sqrt(&Matrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!((&d - &Matrix::from_diag(&[2.0, 3.0])).fro_norm() < 1e-14);
    }

    #[test]
    fn sqrt_multiplies_back() {
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let r = sym_sqrt(&s).unwrap();
        assert!((&(&r * &r) - &s).fro_norm() <= 1e-10);
        assert!(r.max_asymmetry() == 0.0);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_sqrt(&a), Err(Error::NotSymmetric(_))));
        let b = Matrix::from_diag(&[1.0, -0.1]);
        assert!(matches!(sym_sqrt(&b), Err(Error::NotPsd(_))));
    }

    #[test]
    fn clips_tiny_negative_eigenvalues() {
        let b = Matrix::from_diag(&[1.0, -1e-13]);
        let r = sym_sqrt(&b).unwrap();
        assert_eq!(r[(1, 1)], 0.0);
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        let s = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&s).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn sqrt_of_gram_matrix(v in prop::collection::vec(-2.0..2.0f64, 16)) {
            let b = Matrix::from_row_major(4, 4, v);
            let s = &b * &b.transpose();
            let r = sym_sqrt(&s).unwrap();
            let tol = 1e-10 * s.fro_norm().max(1.0);
            prop_assert!((&(&r * &r) - &s).fro_norm() <= tol);
            prop_assert!(sym_eigen(&r).unwrap().min() >= -1e-7);
        }

        #[test]
        fn decomposition_reconstructs(v in prop::collection::vec(-3.0..3.0f64, 25)) {
            let b = Matrix::from_row_major(5, 5, v);
            let s = b.symmetric_part();
            let e = sym_eigen(&s).unwrap();
            prop_assert!((&e.reconstruct_with(|l| l) - &s).fro_norm() <= 1e-12 * s.fro_norm().max(1.0));
        }
    }
}
