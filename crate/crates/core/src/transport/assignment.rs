//! Exact empirical `W_p` in `R^d` as a linear assignment problem, solved by shortest
//! augmenting paths with vertex potentials (`O(n^3)`).

use serde::{Deserialize, Serialize};

use super::{check_p, DistanceEstimate, Method, PointCloud};
use crate::error::{Error, Result};

pub const ASSIGNMENT_WARN_N: usize = 1024;
pub const ASSIGNMENT_MAX_N: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    /// Point `i` of the first cloud goes to point `pairing[i]` of the second.
    pub pairing: Vec<usize>,
    /// `(mean ‖a_i - b_pairing[i]‖^p)^(1/p)`.
    pub cost_p: f64,
}

impl TransportPlan {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.pairing.len()];
        for &j in &self.pairing {
            if j >= seen.len() || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        true
    }

    /// Cost of this pairing recomputed from the clouds.
    pub fn recompute(&self, a: &PointCloud, b: &PointCloud, p: f64) -> f64 {
        let total: f64 = self
            .pairing
            .iter()
            .enumerate()
            .map(|(i, &j)| point_cost(a.point(i), b.point(j), p))
            .sum();
        (total / self.pairing.len() as f64).powf(1.0 / p)
    }
}

pub(crate) fn point_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum();
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.powf(0.5 * p)
    }
}

/// Minimum-cost perfect matching for a dense `n x n` cost matrix (row-major).
/// Returns the column assigned to each row.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is the virtual source.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let row = &cost[(i0 - 1) * n..i0 * n];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[row_of[j] - 1] = j - 1;
    }
    assign
}

pub fn w_p_assignment(a: &PointCloud, b: &PointCloud, p: f64) -> Result<(DistanceEstimate, TransportPlan)> {
    check_p(p)?;
    if a.n() != b.n() || a.d() != b.d() || a.n() == 0 {
        return Err(Error::InvalidInput(format!(
            "assignment W_p needs equal nonempty clouds, got {}x{} and {}x{}",
            a.n(),
            a.d(),
            b.n(),
            b.d()
        )));
    }
    let n = a.n();
    if n > ASSIGNMENT_MAX_N {
        return Err(Error::InvalidInput(format!(
            "assignment limited to n <= {ASSIGNMENT_MAX_N}, got {n}"
        )));
    }
    if n > ASSIGNMENT_WARN_N {
        log::warn!("assignment with n = {n} is slow (cubic cost)");
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let mut cost = Vec::with_capacity(n * n);
    for x in a.points() {
        for y in b.points() {
            cost.push(point_cost(x, y, p));
        }
    }
    let pairing = solve_assignment(&cost, n);
    let total: f64 = pairing.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    let value = (total / n as f64).powf(1.0 / p);
    Ok((
        DistanceEstimate {
            value,
            method: Method::Assignment,
            n,
            p,
            resample_sd: 0.0,
        },
        TransportPlan { pairing, cost_p: value },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_known_instance() {
        let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
        let a = solve_assignment(&cost, 3);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i * 3 + j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn identical_clouds_any_order() {
        let a = PointCloud::from_points(2, &[vec![0.0, 1.0], vec![2.0, 3.0], vec![-1.0, 5.0]]).unwrap();
        let b = PointCloud::from_points(2, &[vec![-1.0, 5.0], vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let (d, plan) = w_p_assignment(&a, &b, 2.0).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(plan.is_bijection());
        assert_eq!(plan.pairing, vec![1, 2, 0]);
    }

    #[test]
    fn rejects_mismatch() {
        let a = PointCloud::from_1d(vec![0.0, 1.0]);
        let b = PointCloud::from_1d(vec![0.0]);
        assert!(w_p_assignment(&a, &b, 2.0).is_err());
    }
}
