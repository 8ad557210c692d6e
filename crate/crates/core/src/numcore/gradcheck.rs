use super::rng::Rng;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Number of coordinates to probe; `None` checks all of them.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            samples: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Coordinate at which the maximum was observed.
    pub worst_coordinate: usize,
    pub checked: usize,
}

/// Compares an analytic gradient against central differences of `loss`.
///
/// The error at coordinate `i` is
/// `|g_fd - g_an| / max(1, |g_fd|, |g_an|)`; the report carries the
/// maximum over the probed coordinates.
pub fn finite_diff_check(
    mut loss: impl FnMut(&[f64]) -> f64,
    params: &[f64],
    analytic: &[f64],
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    assert_eq!(params.len(), analytic.len(), "gradient length mismatch");
    let coords: Vec<usize> = match opts.samples {
        Some(k) if k < params.len() => {
            let mut all: Vec<usize> = (0..params.len()).collect();
            Rng::new(opts.seed).shuffle(&mut all);
            all.truncate(k);
            all.sort_unstable();
            all
        }
        _ => (0..params.len()).collect(),
    };
    let mut probe = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coordinate: 0,
        checked: coords.len(),
    };
    for &i in &coords {
        let orig = probe[i];
        probe[i] = orig + opts.epsilon;
        let plus = loss(&probe);
        probe[i] = orig - opts.epsilon;
        let minus = loss(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteCheck);
        }
        let numeric = (plus - minus) / (2.0 * opts.epsilon);
        let err = (numeric - analytic[i]).abs() / 1f64.max(numeric.abs()).max(analytic[i].abs());
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_coordinate = i;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let w = [1.0, 2.0];
        let r = finite_diff_check(
            |p| p.iter().map(|v| v * v).sum(),
            &w,
            &[2.0, 4.0],
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(r.max_rel_error < 1e-8);
    }

    #[test]
    fn constant() {
        let r = finite_diff_check(
            |_| 3.0,
            &[0.5, -0.5],
            &[0.0, 0.0],
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert_eq!(r.max_rel_error, 0.0);
    }

    #[test]
    fn wrong_gradient_detected() {
        let r = finite_diff_check(
            |p| p[0] * p[0],
            &[3.0],
            &[1.0],
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(r.max_rel_error > 0.5);
    }

    #[test]
    fn non_finite_loss_is_error() {
        assert!(
            finite_diff_check(|_| f64::NAN, &[1.0], &[0.0], &GradCheckOptions::default()).is_err()
        );
    }

    #[test]
    fn sampling_limits_coordinates() {
        let p = vec![1.0; 100];
        let g = vec![2.0; 100];
        let opts = GradCheckOptions {
            samples: Some(10),
            ..Default::default()
        };
        let r = finite_diff_check(|p| p.iter().map(|v| v * v).sum(), &p, &g, &opts).unwrap();
        assert_eq!(r.checked, 10);
    }
}
