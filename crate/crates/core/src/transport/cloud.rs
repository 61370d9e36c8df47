use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` points in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    d: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || data.len() % d != 0 {
            return Err(Error::InvalidInput(format!(
                "point cloud: {} values do not split into points of dimension {d}",
                data.len()
            )));
        }
        Ok(PointCloud { d, data })
    }

    /// One-dimensional cloud.
    pub fn from_1d(values: Vec<f64>) -> Self {
        PointCloud { d: 1, data: values }
    }

    pub fn from_points(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput(format!("point cloud: every point needs {d} coordinates")));
        }
        Self::new(d, points.concat())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn scaled(&self, c: f64) -> Self {
        PointCloud {
            d: self.d,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut data = self.data.clone();
        for p in data.chunks_exact_mut(self.d) {
            for (x, s) in p.iter_mut().zip(shift) {
                *x += s;
            }
        }
        PointCloud { d: self.d, data }
    }

    /// Squared norms of the points.
    pub fn sq_norms(&self) -> Vec<f64> {
        self.points().map(|p| p.iter().map(|v| v * v).sum()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
