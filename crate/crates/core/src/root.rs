//! Bracketed root finding for monotone scalar functions.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: u32,
}

/// Bisection for `g(x) = 0` on `[lo, hi]`, requiring a sign change.
///
/// Stops when the bracket is narrower than `tol`.
pub fn bisect<G>(g: G, mut lo: f64, mut hi: f64, tol: f64, max_iter: u32) -> Result<Root>
where
    G: Fn(f64) -> f64,
{
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(Root {
            x: lo,
            iterations: 0,
        });
    }
    if g_hi == 0.0 {
        return Ok(Root {
            x: hi,
            iterations: 0,
        });
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::InvalidBracket(format!(
            "no sign change on [{lo}, {hi}] (g = {g_lo}, {g_hi})"
        )));
    }
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations >= max_iter {
            return Err(Error::MaxIterations { lo, hi });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(Root { x: mid, iterations });
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}

/// Evaluates `g` at `probes + 2` evenly spaced points of `[lo, hi]` and
/// checks that the values increase strictly.
pub fn verify_increasing<G>(g: G, lo: f64, hi: f64, probes: usize) -> Result<Vec<(f64, f64)>>
where
    G: Fn(f64) -> f64,
{
    let segments = probes + 1;
    let points: Vec<(f64, f64)> = (0..=segments)
        .map(|i| {
            let x = if i == segments {
                hi
            } else {
                lo + (hi - lo) * i as f64 / segments as f64
            };
            (x, g(x))
        })
        .collect();
    if let Some(w) = points
        .windows(2)
        .find(|w| w[0].1.is_nan() || w[1].1.is_nan() || w[1].1 <= w[0].1)
    {
        return Err(Error::InvalidBracket(format!(
            "not increasing between {} (value {}) and {} (value {})",
            w[0].0, w[0].1, w[1].0, w[1].1
        )));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((r.x - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(r.iterations > 30);
    }

    #[test]
    fn endpoint_root() {
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-9, 10).unwrap().x, 0.0);
    }

    #[test]
    fn rejects_bad_bracket() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9, 100).unwrap_err();
        assert!(err.to_string().starts_with("inversion bracket invalid"));
    }

    #[test]
    fn iteration_cap() {
        let err = bisect(|x| x - 0.3, 0.0, 1.0, 1e-12, 5).unwrap_err();
        assert!(matches!(err, Error::MaxIterations { lo, hi } if lo <= 0.3 && hi >= 0.3));
    }

    #[test]
    fn monotone_probe() {
        assert_eq!(verify_increasing(|x| x * x, 0.0, 1.0, 8).unwrap().len(), 10);
        assert!(verify_increasing(|x| (x - 0.5).powi(2), 0.0, 1.0, 8).is_err());
    }
}
