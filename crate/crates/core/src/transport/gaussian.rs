use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, sym_sqrt, Matrix};
use crate::sde::NoiseStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeasure {
    pub mean: Vec<f64>,
    pub cov: Matrix,
}

impl GaussianMeasure {
    /// Validates symmetry (to 1e-12 relative) and PSD-ness (eigenvalues >= -1e-10, clipped).
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        let d = cov.require_square("gaussian covariance")?;
        if mean.len() != d {
            return Err(Error::InvalidInput(format!(
                "gaussian mean has {} entries, covariance is {d}x{d}",
                mean.len()
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidInput("gaussian mean must be finite".into()));
        }
        let asym = cov.max_asymmetry();
        if asym > 1e-12 * cov.max_abs().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let eig = sym_eigen(&cov)?;
        if eig.min() < -1e-10 * cov.max_abs().max(1.0) {
            return Err(Error::NotPsd(eig.min()));
        }
        let cov = eig.reconstruct_with(|l| l.max(0.0)).symmetric_part();
        Ok(GaussianMeasure { mean, cov })
    }

    pub fn centered(cov: Matrix) -> Result<Self> {
        let d = cov.rows();
        Self::new(vec![0.0; d], cov)
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    /// `n` exact samples; sample `i` uses noise stream `i` under `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        let d = self.d();
        let root = sym_sqrt(&self.cov)?;
        let mut data = vec![0.0; n * d];
        let mut z = vec![0.0; d];
        let mut y = vec![0.0; d];
        for (i, out) in data.chunks_exact_mut(d).enumerate() {
            let mut rng = NoiseStream::new(seed, i as u64);
            rng.fill_normal(&mut z);
            root.mat_vec_into(&z, &mut y);
            for ((o, m), v) in out.iter_mut().zip(&self.mean).zip(&y) {
                *o = m + v;
            }
        }
        PointCloud::new(d, data)
    }
}

/// `W2(N(m1, C1), N(m2, C2))^2 = ‖m1 - m2‖^2 + Tr(C1 + C2 - 2 (C2^½ C1 C2^½)^½)`.
pub fn w2_gaussian_closed_form(g1: &GaussianMeasure, g2: &GaussianMeasure) -> Result<f64> {
    if g1.d() != g2.d() {
        return Err(Error::InvalidInput("gaussians of different dimension".into()));
    }
    let mean_sq: f64 = g1.mean.iter().zip(&g2.mean).map(|(a, b)| (a - b) * (a - b)).sum();
    let r2 = sym_sqrt(&g2.cov)?;
    let inner = (&(&r2 * &g1.cov) * &r2).symmetric_part();
    let cross = sym_sqrt(&inner)?;
    let tr = g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
    Ok((mean_sq + tr.max(0.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let g = GaussianMeasure::centered(Matrix::identity(2)).unwrap();
        assert_eq!(w2_gaussian_closed_form(&g, &g).unwrap(), 0.0);
        let a = GaussianMeasure::centered(Matrix::scalar(1.0)).unwrap();
        let b = GaussianMeasure::centered(Matrix::scalar(4.0)).unwrap();
        assert!((w2_gaussian_closed_form(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        let c = GaussianMeasure::new(vec![3.0, 4.0], Matrix::identity(2)).unwrap();
        assert!((w2_gaussian_closed_form(&g, &c).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_covariance() {
        let asym = Matrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]]).unwrap();
        assert!(GaussianMeasure::centered(asym).is_err());
        assert!(GaussianMeasure::centered(Matrix::from_diag(&[1.0, -0.5])).is_err());
        let g = GaussianMeasure::centered(Matrix::from_diag(&[1.0, -1e-13])).unwrap();
        assert_eq!(g.cov[(1, 1)], 0.0);
    }

    #[test]
    fn sampled_moments() {
        let cov = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = GaussianMeasure::new(vec![1.0, -1.0], cov).unwrap();
        let c = g.sample(20_000, 3).unwrap();
        let n = c.n() as f64;
        let m0 = c.points().map(|p| p[0]).sum::<f64>() / n;
        let c01 = c.points().map(|p| (p[0] - 1.0) * (p[1] + 1.0)).sum::<f64>() / n;
        assert!((m0 - 1.0).abs() < 0.05);
        assert!((c01 - 0.5).abs() < 0.05);
        assert_eq!(c, g.sample(20_000, 3).unwrap());
    }
}
