//! Matrix exponential by scaling and squaring with the degree-13 Padé approximant.

use super::{Lu, Matrix};
use crate::error::{Error, Result};

// Padé(13) coefficients b_0..b_13.
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which Padé(13) is accurate to unit roundoff.
const THETA_13: f64 = 5.371920351148152;

// 2^64 scaling is far beyond anything a finite result can come from.
const MAX_SQUARINGS: i32 = 64;

/// `exp(M t)`.
pub fn mat_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    m.require_square("mat_exp")?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("mat_exp: non-finite time".into()));
    }
    mat_exp_unscaled(&m.scale(t))
}

/// `exp(A)`.
pub fn mat_exp_unscaled(a: &Matrix) -> Result<Matrix> {
    let n = a.require_square("mat_exp")?;
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let norm = a.op_norm_1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if s > MAX_SQUARINGS {
        return Err(Error::Overflow(norm));
    }
    let scaled = a.scale(2f64.powi(-s));
    let mut r = pade13(&scaled)?;
    for _ in 0..s {
        r = &r * &r;
        if !r.is_finite() {
            return Err(Error::Overflow(norm));
        }
    }
    if !r.is_finite() {
        return Err(Error::Overflow(norm));
    }
    Ok(r)
}

fn pade13(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let ident = Matrix::identity(n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;

    let lin = |terms: &[(&Matrix, f64)]| {
        let mut acc = Matrix::zeros(n, n);
        for (m, c) in terms {
            acc = &acc + &m.scale(*c);
        }
        acc
    };

    let u_inner = lin(&[(&a6, b[13]), (&a4, b[11]), (&a2, b[9])]);
    let u_tail = lin(&[(&a6, b[7]), (&a4, b[5]), (&a2, b[3]), (&ident, b[1])]);
    let u = a * &(&(&a6 * &u_inner) + &u_tail);

    let v_inner = lin(&[(&a6, b[12]), (&a4, b[10]), (&a2, b[8])]);
    let v_tail = lin(&[(&a6, b[6]), (&a4, b[4]), (&a2, b[2]), (&ident, b[0])]);
    let v = &(&a6 * &v_inner) + &v_tail;

    let p = &v + &u;
    let q = &v - &u;
    Ok(Lu::new(&q)?.solve_matrix(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).fro_norm() <= tol * b.fro_norm().max(1.0)
    }

    #[test]
    fn zero_gives_identity() {
        let z = Matrix::zeros(3, 3);
        assert_eq!(mat_exp(&z, 1.0).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn scalar_decay() {
        let m = Matrix::scalar(-1.0);
        let e = mat_exp(&m, 1.0).unwrap();
        assert!((e[(0, 0)] - 1.0 / E).abs() < 1e-15);
    }

    #[test]
    fn rotation_generator_quarter_turn() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let e = mat_exp(&m, FRAC_PI_2).unwrap();
        let expect = [0.0, 1.0, -1.0, 0.0];
        for (v, w) in e.as_slice().iter().zip(expect) {
            assert!((v - w).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn diagonal_large_norm_uses_squaring() {
        let m = Matrix::from_diag(&[-3.0, 2.5]);
        let e = mat_exp(&m, 4.0).unwrap();
        assert!(((e[(0, 0)] - (-12f64).exp()) / (-12f64).exp()).abs() < 1e-12);
        assert!(((e[(1, 1)] - 10f64.exp()) / 10f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let e = mat_exp(&m, 3.5).unwrap();
        assert!(close(&e, &Matrix::from_rows(&[vec![1.0, 3.5], vec![0.0, 1.0]]).unwrap(), 1e-14));
    }

    #[test]
    fn overflow_is_reported() {
        let m = Matrix::scalar(1.0);
        assert!(matches!(mat_exp(&m, 1e6), Err(Error::Overflow(_))));
    }

    proptest! {
        #[test]
        fn semigroup(v in prop::collection::vec(-1.5..1.5f64, 9), s in 0.0..2.0f64, t in 0.0..2.0f64) {
            let m = Matrix::from_row_major(3, 3, v);
            let lhs = mat_exp(&m, s + t).unwrap();
            let rhs = &mat_exp(&m, s).unwrap() * &mat_exp(&m, t).unwrap();
            prop_assert!(close(&lhs, &rhs, 1e-10));
        }

        #[test]
        fn inverse_pair(v in prop::collection::vec(-2.0..2.0f64, 4)) {
            let m = Matrix::from_row_major(2, 2, v);
            let prod = &mat_exp(&m, 1.0).unwrap() * &mat_exp(&m, -1.0).unwrap();
            prop_assert!(close(&prod, &Matrix::identity(2), 1e-11));
        }
    }
}
