use super::sorted::{sorted_copy, sorted_cost};
use super::{DistanceEstimate, Method, PointCloud};
use crate::error::{Error, Result};
use crate::sde::NoiseStream;

/// Sliced `W_2`: root of the mean squared 1D sorted distance over random unit directions.
pub fn w2_sliced(a: &PointCloud, b: &PointCloud, n_projections: usize, seed: u64) -> Result<DistanceEstimate> {
    if n_projections < 16 {
        return Err(Error::InvalidInput(format!(
            "sliced estimator needs at least 16 projections, got {n_projections}"
        )));
    }
    if a.n() != b.n() || a.d() != b.d() || a.n() == 0 {
        return Err(Error::InvalidInput("sliced W_2 needs equal nonempty clouds".into()));
    }
    let d = a.d();
    let mut rng = NoiseStream::new(seed, 0);
    let mut dir = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..n_projections {
        loop {
            rng.fill_normal(&mut dir);
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-12 {
                dir.iter_mut().for_each(|v| *v /= n);
                break;
            }
        }
        let proj = |c: &PointCloud| -> Vec<f64> {
            c.points().map(|p| p.iter().zip(&dir).map(|(x, u)| x * u).sum()).collect()
        };
        let pa = sorted_copy(&proj(a))?;
        let pb = sorted_copy(&proj(b))?;
        acc += sorted_cost(&pa, &pb, 2.0);
    }
    Ok(DistanceEstimate {
        value: (acc / n_projections as f64).sqrt(),
        method: Method::Sliced,
        n: a.n(),
        p: 2.0,
        resample_sd: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::w_p_sorted_1d;

    #[test]
    fn identical_clouds() {
        let a = PointCloud::from_points(2, &[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(w2_sliced(&a, &a, 16, 1).unwrap().value, 0.0);
        assert!(w2_sliced(&a, &a, 8, 1).is_err());
    }

    #[test]
    fn one_dimension_is_sorted_distance() {
        let a = vec![0.3, -1.0, 2.5, 0.0];
        let b = vec![1.0, 1.5, -0.5, 3.0];
        let exact = w_p_sorted_1d(&a, &b, 2.0).unwrap().value;
        for k in [16, 17, 50] {
            let s = w2_sliced(&PointCloud::from_1d(a.clone()), &PointCloud::from_1d(b.clone()), k, 9).unwrap();
            assert!((s.value - exact).abs() <= 1e-12 * exact);
        }
    }
}
