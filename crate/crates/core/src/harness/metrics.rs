//! Cross-track and heading error statistics.
//!
//! Standard deviations are population (divide by n) deviations.

use serde::{Deserialize, Serialize};

use crate::control::wrap_deg;
use crate::error::{Error, Result};

/// Infinite line through `origin` along a unit direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetLine {
    pub origin: (f64, f64),
    pub direction: (f64, f64),
}

impl TargetLine {
    pub fn through(start: (f64, f64), end: (f64, f64)) -> Result<Self> {
        let (dx, dy) = (end.0 - start.0, end.1 - start.1);
        let len = dx.hypot(dy);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::DegenerateLine);
        }
        let direction = if dy == 0.0 {
            (dx.signum(), 0.0)
        } else if dx == 0.0 {
            (0.0, dy.signum())
        } else {
            (dx / len, dy / len)
        };
        Ok(Self {
            origin: start,
            direction,
        })
    }

    /// Line from `origin` along the pool's long axis.
    pub fn along_pool(origin: (f64, f64)) -> Self {
        Self {
            origin,
            direction: (1.0, 0.0),
        }
    }

    pub fn distance(&self, p: (f64, f64)) -> f64 {
        let (ux, uy) = self.direction;
        (ux * (p.1 - self.origin.1) - uy * (p.0 - self.origin.0)).abs()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mean_error: f64,
    pub max_error: f64,
    pub std_dev: f64,
}

impl ErrorMetrics {
    /// Statistics of a non-empty sequence of non-negative errors.
    pub fn from_errors(errors: &[f64]) -> Self {
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let max = errors.iter().copied().fold(0.0, f64::max);
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        Self {
            mean_error: mean,
            max_error: max,
            std_dev: var.sqrt(),
        }
    }
}

/// Cross-track error statistics of a planar trajectory against a line.
pub fn compute_metrics(trajectory: &[(f64, f64)], line: &TargetLine) -> Result<ErrorMetrics> {
    if trajectory.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: trajectory.len(),
        });
    }
    let errors: Vec<f64> = trajectory.iter().map(|&p| line.distance(p)).collect();
    Ok(ErrorMetrics::from_errors(&errors))
}

/// Heading estimate error statistics (degrees) plus the true heading excursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct YawMetrics {
    pub mean_error: f64,
    pub max_error: f64,
    pub std_dev: f64,
    pub true_min: f64,
    pub true_max: f64,
}

pub fn compute_yaw_metrics(yaw_true: &[f64], yaw_est: &[f64]) -> Result<YawMetrics> {
    if yaw_true.len() != yaw_est.len() {
        return Err(Error::LengthMismatch(yaw_true.len(), yaw_est.len()));
    }
    if yaw_true.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let errors: Vec<f64> = yaw_true
        .iter()
        .zip(yaw_est)
        .map(|(t, e)| wrap_deg(e - t).abs())
        .collect();
    let stats = ErrorMetrics::from_errors(&errors);
    Ok(YawMetrics {
        mean_error: stats.mean_error,
        max_error: stats.max_error,
        std_dev: stats.std_dev,
        true_min: yaw_true.iter().copied().fold(f64::INFINITY, f64::min),
        true_max: yaw_true.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> TargetLine {
        TargetLine::through((0.0, 100.0), (500.0, 100.0)).unwrap()
    }

    #[test]
    fn on_line_is_zero() {
        let traj: Vec<_> = (0..10).map(|i| (i as f64 * 10.0, 100.0)).collect();
        assert_eq!(
            compute_metrics(&traj, &line()).unwrap(),
            ErrorMetrics::default()
        );
    }

    #[test]
    fn constant_offset() {
        let traj: Vec<_> = (0..10).map(|i| (i as f64 * 10.0, 95.0)).collect();
        let m = compute_metrics(&traj, &line()).unwrap();
        assert_eq!((m.mean_error, m.max_error, m.std_dev), (5.0, 5.0, 0.0));
    }

    #[test]
    fn three_offsets() {
        let traj = [(0.0, 100.0), (10.0, 103.0), (20.0, 94.0)];
        let m = compute_metrics(&traj, &line()).unwrap();
        assert_eq!(m.mean_error, 3.0);
        assert_eq!(m.max_error, 6.0);
        assert!((m.std_dev - 6.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn oblique_line_distance() {
        let l = TargetLine::through((0.0, 0.0), (3.0, 4.0)).unwrap();
        // (4, -3) is perpendicular to (3, 4) at distance 5
        assert!((l.distance((4.0, -3.0)) - 5.0).abs() < 1e-12);
        assert!(l.distance((6.0, 8.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            TargetLine::through((1.0, 1.0), (1.0, 1.0)),
            Err(Error::DegenerateLine)
        ));
        assert!(compute_metrics(&[(0.0, 0.0)], &line()).is_err());
        assert!(matches!(
            compute_yaw_metrics(&[0.0, 1.0], &[0.0]),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn yaw_examples() {
        let truth: Vec<f64> = (0..50).map(|i| (i as f64 * 0.2).sin() * 5.0).collect();
        let m = compute_yaw_metrics(&truth, &truth).unwrap();
        assert_eq!((m.mean_error, m.max_error, m.std_dev), (0.0, 0.0, 0.0));

        let truth = [1.0, -2.0, 3.0, 0.5];
        let est: Vec<f64> = truth.iter().map(|t| t + 2.0).collect();
        let m = compute_yaw_metrics(&truth, &est).unwrap();
        assert_eq!((m.mean_error, m.max_error, m.std_dev), (2.0, 2.0, 0.0));
        assert_eq!((m.true_min, m.true_max), (-2.0, 3.0));
    }

    #[test]
    fn yaw_error_wraps() {
        let m = compute_yaw_metrics(&[179.0], &[-179.0]).unwrap();
        assert!((m.mean_error - 2.0).abs() < 1e-12);
    }
}
