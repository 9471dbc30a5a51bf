//! Small descriptive statistics and the two-parameter fits used to compare
//! scaling shapes.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Standard error of the mean from the unbiased sample variance.
pub fn stderr(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let k = xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    Some((var / k).sqrt())
}

/// `y ≈ a + b·x` (linear) or `y ≈ a·exp(b·x)` (exponential), with the
/// residual sum of squares measured on `y` in both cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub a: f64,
    pub b: f64,
    pub rss: f64,
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "fit needs matching inputs with at least two points, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit input".into()));
    }
    Ok(())
}

pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<Fit> {
    check(x, y)?;
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct x".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss = x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    Ok(Fit { a, b, rss })
}

/// Least squares in `y` for `a·exp(b·x)`. For fixed `b` the best `a` is
/// closed-form, which leaves a one-dimensional search over `b`.
pub fn fit_exponential(x: &[f64], y: &[f64]) -> Result<Fit> {
    check(x, y)?;
    let profile = |b: f64| -> (f64, f64) {
        let e: Vec<f64> = x.iter().map(|xi| (b * xi).exp()).collect();
        let den: f64 = e.iter().map(|v| v * v).sum();
        let a = if den > 0.0 {
            e.iter().zip(y).map(|(ei, yi)| ei * yi).sum::<f64>() / den
        } else {
            0.0
        };
        let rss = e.iter().zip(y).map(|(ei, yi)| (yi - a * ei).powi(2)).sum();
        (a, rss)
    };
    let span = x.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - x.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if span == 0.0 {
        return Err(Error::InvalidArgument("fit needs at least two distinct x".into()));
    }
    // coarse scan over rates up to e^±20 across the data, then golden section
    let limit = 20.0 / span;
    let steps = 400;
    let grid = |i: usize| -limit + 2.0 * limit * i as f64 / steps as f64;
    let best = (0..=steps)
        .min_by(|&i, &j| profile(grid(i)).1.total_cmp(&profile(grid(j)).1))
        .unwrap_or(steps / 2);
    let (mut lo, mut hi) = (grid(best.saturating_sub(1)), grid((best + 1).min(steps)));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if profile(m1).1 <= profile(m2).1 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let b = (lo + hi) / 2.0;
    let (a, rss) = profile(b);
    Ok(Fit { a, b, rss })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean(&[]), None);
        assert_eq!(mean(&[1.0, 2.0, 3.0]), Some(2.0));
        assert_eq!(stderr(&[1.0]), None);
        assert_abs_diff_eq!(stderr(&[1.0, 2.0, 3.0]).unwrap(), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn linear_data_prefers_linear_fit() {
        let x = [4.0, 5.0, 6.0, 7.0];
        let y = [40.0, 50.0, 60.0, 70.0];
        let lin = fit_linear(&x, &y).unwrap();
        assert_abs_diff_eq!(lin.b, 10.0, epsilon = 1e-12);
        assert!(lin.rss < 1e-20);
        assert!(fit_exponential(&x, &y).unwrap().rss > lin.rss);
    }

    #[test]
    fn exponential_data_is_recovered() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * (0.7 * v).exp()).collect();
        let e = fit_exponential(&x, &y).unwrap();
        assert_abs_diff_eq!(e.b, 0.7, epsilon = 1e-6);
        assert_abs_diff_eq!(e.a, 3.0, epsilon = 1e-5);
        assert!(fit_linear(&x, &y).unwrap().rss > e.rss);
    }

    #[test]
    fn fit_input_errors() {
        assert!(fit_linear(&[1.0], &[1.0]).is_err());
        assert!(fit_linear(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_exponential(&[1.0, 2.0], &[1.0]).is_err());
        assert!(fit_exponential(&[1.0, 2.0], &[1.0, f64::NAN]).is_err());
    }
}
