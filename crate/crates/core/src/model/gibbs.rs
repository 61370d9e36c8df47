//! 1D Gibbs density `exp(-2V(x)/T) / Z` on a uniform grid, with `T = eps s^2`.
//!
//! This is the exact stationary law of a 1D gradient problem with constant noise,
//! used as an oracle against the simulated ensembles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::expr::FieldExpr;
use super::problem::ProblemSpec;
use crate::error::{Error, Result};

/// Maximum boundary mass fraction tolerated before the grid is declared too narrow.
pub const BOUNDARY_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    /// Number of intervals; rounded up to an even count for Simpson's rule.
    pub intervals: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Self {
        GridSpec { lo, hi, intervals }
    }

    /// Symmetric grid of half-width `12 sqrt(T / (2 curvature))`, i.e. twelve standard
    /// deviations of the quadratic approximation.
    pub fn auto(temperature: f64, curvature: f64, intervals: usize) -> Self {
        let half = 12.0 * (temperature / (2.0 * curvature)).sqrt();
        GridSpec::new(-half, half, intervals)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GibbsTable {
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub h: f64,
    pub temperature: f64,
    pub log_z: f64,
}

fn simpson_weights(n_points: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..n_points).map(move |i| {
        let w = if i == 0 || i + 1 == n_points {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * h / 3.0
    })
}

/// Gibbs table for a potential given as a closure.
pub fn gibbs_from_potential(v: impl Fn(f64) -> Result<f64>, temperature: f64, grid: GridSpec) -> Result<GibbsTable> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidInput(format!("gibbs temperature must be positive, got {temperature}")));
    }
    if !(grid.hi > grid.lo) || grid.intervals < 4 {
        return Err(Error::InvalidInput("gibbs grid needs hi > lo and at least 4 intervals".into()));
    }
    let n = grid.intervals + grid.intervals % 2;
    let h = (grid.hi - grid.lo) / n as f64;
    let x: Vec<f64> = (0..=n).map(|i| grid.lo + i as f64 * h).collect();
    let e: Vec<f64> = x.iter().map(|&xi| v(xi).map(|vi| -2.0 * vi / temperature)).collect::<Result<_>>()?;
    let shift = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let un: Vec<f64> = e.iter().map(|ei| (ei - shift).exp()).collect();
    let z: f64 = un.iter().zip(simpson_weights(n + 1, h)).map(|(u, w)| u * w).sum();
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::InvalidInput("gibbs normalisation is not finite".into()));
    }
    let density: Vec<f64> = un.iter().map(|u| u / z).collect();

    // mass in the outer 1% of the grid on either side (at least two intervals each)
    let m = ((n / 100).max(2) + 1) & !1;
    let edge = |s: &[f64]| -> f64 { s.iter().zip(simpson_weights(s.len(), h)).map(|(u, w)| u * w).sum() };
    let boundary = edge(&density[..=m]) + edge(&density[n - m..]);
    if boundary > BOUNDARY_MASS_TOL {
        return Err(Error::GridTooNarrow(boundary));
    }
    Ok(GibbsTable {
        x,
        density,
        h,
        temperature,
        log_z: z.ln() + shift,
    })
}

/// Gibbs table for a potential written in the expression language (one component, `x1`).
pub fn gibbs_density_oracle(v: &FieldExpr, epsilon: f64, grid: GridSpec) -> Result<GibbsTable> {
    if v.arity() != 1 || v.components().len() != 1 {
        return Err(Error::InvalidInput("gibbs oracle needs a scalar potential of x1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    gibbs_from_potential(|x| Ok(v.components()[0].eval(&[x])?), epsilon, grid)
}

/// Gibbs table for a 1D problem with constant diffusion; the grid is chosen from the
/// curvature at 0 unless given.
pub fn gibbs_for_problem(spec: &ProblemSpec, epsilon: f64, grid: Option<GridSpec>) -> Result<GibbsTable> {
    let temperature = spec.gibbs_temperature(epsilon).ok_or_else(|| {
        Error::InvalidInput("the gibbs oracle needs d = 1 and constant diffusion".into())
    })?;
    let grid = grid.unwrap_or_else(|| GridSpec::auto(temperature, spec.jacobian_at_zero()[(0, 0)], 20_000));
    gibbs_from_potential(|x| spec.potential_1d(x), temperature, grid)
}

impl GibbsTable {
    /// Simpson integral of `f(x) * density(x)`.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.x
            .iter()
            .zip(&self.density)
            .zip(simpson_weights(self.x.len(), self.h))
            .map(|((&x, &p), w)| f(x) * p * w)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.expect(|_| 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|x| (x - m) * (x - m))
    }

    /// `E|X|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.expect(|x| x.abs().powf(p))
    }

    /// Cumulative distribution at the grid nodes (trapezoid on each interval,
    /// renormalised to end at 1).
    pub fn cdf(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.x.len());
        let mut acc = 0.0;
        c.push(0.0);
        for w in self.density.windows(2) {
            acc += 0.5 * self.h * (w[0] + w[1]);
            c.push(acc);
        }
        for v in &mut c {
            *v /= acc;
        }
        c
    }

    /// `W_p(X / sqrt(scale_eps), N(0, var))` for `X` with this density, by quantile
    /// matching: `int |x / sqrt(eps) - Q_N(F(x))|^p dF(x)`.
    pub fn wasserstein_rescaled_to_gaussian(&self, p: f64, epsilon: f64, var: f64) -> Result<f64> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidInput(format!("p must lie in [1, 2], got {p}")));
        }
        let normal = Normal::new(0.0, var.sqrt())
            .map_err(|e| Error::InvalidInput(format!("gaussian variance {var}: {e}")))?;
        let cdf = self.cdf();
        let scale = 1.0 / epsilon.sqrt();
        let mut acc = 0.0;
        for ((&x, &pd), (&u, w)) in self
            .x
            .iter()
            .zip(&self.density)
            .zip(cdf.iter().zip(simpson_weights(self.x.len(), self.h)))
        {
            if pd == 0.0 {
                continue;
            }
            let u = u.clamp(1e-300, 1.0 - 1e-16);
            let q = normal.inverse_cdf(u);
            acc += (x * scale - q).abs().powf(p) * pd * w;
        }
        Ok(acc.powf(1.0 / p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::parse_field_expr;
    use crate::model::problem::builtin;

    #[test]
    fn quadratic_potential_is_gaussian() {
        let v = parse_field_expr("x1^2/2", 1).unwrap();
        let t = gibbs_density_oracle(&v, 0.5, GridSpec::new(-5.0, 5.0, 4000)).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-8);
        assert!((t.variance() - 0.25).abs() < 1e-8);
        let mid = t.x.len() / 2;
        assert!((t.density[mid] - 0.7978845608028654).abs() < 1e-10);
        let sd = 0.5f64;
        for (x, p) in t.x.iter().zip(&t.density) {
            let exact = (-x * x / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
            assert!((p - exact).abs() < 1e-10);
            assert!(*p >= 0.0);
        }
    }

    #[test]
    fn quartic_variance_converges_in_grid() {
        let v = parse_field_expr("x1^2/2 + x1^4/4", 1).unwrap();
        let a = gibbs_density_oracle(&v, 0.1, GridSpec::new(-3.0, 3.0, 4000)).unwrap();
        let b = gibbs_density_oracle(&v, 0.1, GridSpec::new(-3.0, 3.0, 8000)).unwrap();
        assert!((a.variance() - b.variance()).abs() < 1e-8);
        // well below the linearised value eps/2
        assert!(a.variance() < 0.05);
    }

    #[test]
    fn narrow_grid_rejected() {
        let v = parse_field_expr("x1^2/2", 1).unwrap();
        let r = gibbs_density_oracle(&v, 0.5, GridSpec::new(-1.0, 1.0, 1000));
        assert!(matches!(r, Err(Error::GridTooNarrow(_))));
    }

    #[test]
    fn gaussian_gibbs_is_at_distance_zero() {
        let p = builtin("linear1d", &[("a", 1.0), ("s", 1.0)]).unwrap();
        let t = gibbs_for_problem(&p, 0.1, None).unwrap();
        let w = t.wasserstein_rescaled_to_gaussian(2.0, 0.1, 0.5).unwrap();
        assert!(w < 1e-4, "{w}");
        // shifting the target scale gives |sd1 - sd2|
        let w2 = t.wasserstein_rescaled_to_gaussian(2.0, 0.1, 2.0).unwrap();
        assert!((w2 - (2f64.sqrt() - 0.5f64.sqrt())).abs() < 1e-4, "{w2}");
    }
}
