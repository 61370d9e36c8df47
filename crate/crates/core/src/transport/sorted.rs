use super::{check_p, DistanceEstimate, Method};
use crate::error::{Error, Result};

pub(crate) fn sorted_copy(a: &[f64]) -> Result<Vec<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let mut s = a.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `mean |a_(i) - b_(i)|^p` for already sorted inputs.
pub(crate) fn sorted_cost(a: &[f64], b: &[f64], p: f64) -> f64 {
    let n = a.len() as f64;
    if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / n
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>() / n
    }
}

/// Exact `W_p` between two equal-size empirical measures on the line (monotone coupling).
pub fn w_p_sorted_1d(a: &[f64], b: &[f64], p: f64) -> Result<DistanceEstimate> {
    check_p(p)?;
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidInput(format!(
            "sorted W_p needs equal nonempty sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sa = sorted_copy(a)?;
    let sb = sorted_copy(b)?;
    Ok(DistanceEstimate {
        value: sorted_cost(&sa, &sb, p).powf(1.0 / p),
        method: Method::Sorted1d,
        n: a.len(),
        p,
        resample_sd: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(w_p_sorted_1d(&[0.0, 1.0], &[1.0, 0.0], 2.0).unwrap().value, 0.0);
        assert_eq!(w_p_sorted_1d(&[0.0, 2.0], &[3.0, 1.0], 2.0).unwrap().value, 1.0);
        assert_eq!(w_p_sorted_1d(&[0.0, 1.0], &[0.0, 3.0], 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn errors() {
        assert!(w_p_sorted_1d(&[0.0], &[0.0, 1.0], 2.0).is_err());
        assert!(w_p_sorted_1d(&[0.0], &[1.0], 3.0).is_err());
        assert!(w_p_sorted_1d(&[f64::NAN], &[1.0], 2.0).is_err());
    }
}
