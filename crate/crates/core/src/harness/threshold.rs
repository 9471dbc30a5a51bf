//! Locating the measurement accuracy at which the success probability
//! crosses a given level.
//!
//! Success probability falls as `a_num` grows. The measured points are first
//! made non-increasing by pool-adjacent-violators, then joined piecewise
//! linearly in `log(a_num)`. The returned value is the leftmost crossing.

use serde::Serialize;

use super::derive_seed;
use super::psucc::{estimate_psucc, TrialConfig};
use crate::error::{Error, Result};
use crate::exec::Workers;
use crate::fidelity::MeasurementModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnumThreshold {
    /// `None` when `target_p` lies outside the measured range
    pub anum: Option<f64>,
    /// `(a_num, p_succ)` at every grid point, as measured
    pub points: Vec<(f64, f64)>,
}

/// Non-increasing least-squares fit with equal weights.
fn antitonic(ys: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 2];
            let (s2, c2) = blocks[blocks.len() - 1];
            if s1 / c1 as f64 >= s2 / c2 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().expect("two blocks present") = (s1 + s2, c1 + c2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// The `a_num` at which the monotone interpolant of `points` equals
/// `target_p`.
pub fn interpolate_threshold(points: &[(f64, f64)], target_p: f64) -> Result<f64> {
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target probability must lie in (0, 1), got {target_p}"
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("no grid points".into()));
    }
    if points.iter().any(|&(a, p)| !(a > 0.0 && a.is_finite()) || !(0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidArgument(
            "grid points need a_num > 0 and p in [0, 1]".into(),
        ));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidArgument("a_num grid must be strictly ascending".into()));
    }
    let fitted = antitonic(&points.iter().map(|p| p.1).collect::<Vec<_>>());
    let (hi, lo) = (fitted[0], fitted[fitted.len() - 1]);
    if target_p > hi || target_p < lo {
        return Err(Error::OutOfRange { target: target_p, lo, hi });
    }
    for i in 0..fitted.len() {
        if fitted[i] == target_p {
            return Ok(points[i].0);
        }
        if i + 1 < fitted.len() && fitted[i] > target_p && fitted[i + 1] < target_p {
            let (x0, x1) = (points[i].0.ln(), points[i + 1].0.ln());
            let frac = (fitted[i] - target_p) / (fitted[i] - fitted[i + 1]);
            return Ok((x0 + frac * (x1 - x0)).exp());
        }
    }
    unreachable!("a non-increasing sequence spanning target_p crosses it")
}

/// Estimates `p_succ` at every grid point and interpolates the crossing.
/// All grid points share trial seeds, so they differ only by `a_num`.
pub fn anum_at_psucc(
    cfg: &TrialConfig,
    target_p: f64,
    anum_grid: &[f64],
    trials_per_point: usize,
    seed: u64,
    workers: Workers,
) -> Result<AnumThreshold> {
    if anum_grid.is_empty() || anum_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("a_num grid must be non-empty and strictly ascending".into()));
    }
    let trial_seed = derive_seed(seed, &[cfg.system.n_qubits() as u64]);
    let mut points = Vec::with_capacity(anum_grid.len());
    for &a in anum_grid {
        let model = MeasurementModel::from_a_num(a)?;
        let est = estimate_psucc(&cfg.with_measurement(model), trials_per_point, trial_seed, workers)?;
        points.push((a, est.p));
    }
    let anum = match interpolate_threshold(&points, target_p) {
        Ok(a) => Some(a),
        Err(Error::OutOfRange { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(AnumThreshold { anum, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const DATA: [(f64, f64); 3] = [(0.001, 1.0), (0.01, 0.5), (0.1, 0.0)];

    #[test]
    fn exact_grid_hit() {
        assert_abs_diff_eq!(interpolate_threshold(&DATA, 0.5).unwrap(), 0.01, epsilon = 1e-15);
    }

    #[test]
    fn geometric_midpoint() {
        let a = interpolate_threshold(&DATA, 0.75).unwrap();
        assert_abs_diff_eq!(a, (0.001f64 * 0.01).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let pts = [(0.001, 0.9), (0.01, 0.6)];
        assert!(matches!(interpolate_threshold(&pts, 0.95), Err(Error::OutOfRange { .. })));
        assert!(matches!(interpolate_threshold(&pts, 0.5), Err(Error::OutOfRange { .. })));
        assert!(interpolate_threshold(&pts, 1.0).is_err());
        assert!(interpolate_threshold(&[(0.01, 0.5), (0.001, 0.4)], 0.45).is_err());
    }

    #[test]
    fn violations_are_pooled() {
        assert_eq!(antitonic(&[1.0, 0.4, 0.6, 0.0]), vec![1.0, 0.5, 0.5, 0.0]);
        // a bump above target is pooled away rather than creating a second crossing
        let pts = [(0.001, 1.0), (0.01, 0.4), (0.1, 0.6), (1.0, 0.0)];
        let a = interpolate_threshold(&pts, 0.5).unwrap();
        assert_abs_diff_eq!(a, 0.01, epsilon = 1e-15);
    }

    #[test]
    fn plateau_at_target_takes_leftmost() {
        let pts = [(0.001, 1.0), (0.01, 0.5), (0.1, 0.5), (1.0, 0.0)];
        assert_abs_diff_eq!(interpolate_threshold(&pts, 0.5).unwrap(), 0.01, epsilon = 1e-15);
    }
}
