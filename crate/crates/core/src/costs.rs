//! Built-in cost functions and a finite-difference check of the
//! non-degeneracy condition `d^2 c / dx dy != 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{CostSpec, Grid1D};
use crate::scalar::Scalar;

/// `|x - y|^2 / 2`
pub fn quadratic<T: Scalar>(x: &T, y: &T) -> T {
    let d = x.clone() - y.clone();
    d.clone() * d / T::from_int(2)
}

/// `min over integers k of |x - y - k|^2`, the squared distance on the
/// circle of unit length.
pub fn periodic_quadratic<T: Scalar>(x: &T, y: &T) -> T {
    let d = x.clone() - y.clone();
    let base = d.floor();
    [T::zero(), T::one()]
        .into_iter()
        .map(|shift| {
            let r = d.clone() - base.clone() - shift;
            r.clone() * r
        })
        .reduce(T::min_of)
        .expect("two candidates")
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedDerivativeSample {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NondegeneracyVerdict {
    Pass,
    /// Cells `(i, j)` whose estimate is not finite or not above the threshold.
    DegeneratePoints { points: Vec<(usize, usize)> },
    /// Tabulated costs carry no derivative information.
    Unchecked,
}

#[derive(Debug, Clone, Serialize)]
pub struct NondegeneracyReport {
    pub samples: Vec<MixedDerivativeSample>,
    pub min_abs_estimate: Option<f64>,
    pub step: f64,
    pub threshold: f64,
    pub verdict: NondegeneracyVerdict,
}

/// Central-difference estimate of `d^2 c / dx dy` at every midpoint pair.
///
/// The estimate uses the four corners `(x +- step, y +- step)`. The sampler
/// is diagnostic: solvers run whatever the verdict.
pub fn sample_nondegeneracy<T: Scalar>(
    spec: &CostSpec<T>,
    grid_x: &Grid1D<T>,
    grid_y: &Grid1D<T>,
    step: f64,
    threshold: f64,
) -> Result<NondegeneracyReport> {
    match spec {
        CostSpec::Quadratic => {
            sample_mixed_derivative(&|x, y| quadratic(&x, &y), grid_x, grid_y, step, threshold)
        }
        CostSpec::PeriodicQuadratic => {
            sample_mixed_derivative(&|x, y| periodic_quadratic(&x, &y), grid_x, grid_y, step, threshold)
        }
        CostSpec::Tabulated(_) => {
            check_step(grid_x, grid_y, step)?;
            Ok(NondegeneracyReport {
                samples: Vec::new(),
                min_abs_estimate: None,
                step,
                threshold,
                verdict: NondegeneracyVerdict::Unchecked,
            })
        }
    }
}

/// [`sample_nondegeneracy`] for an arbitrary pointwise cost.
pub fn sample_mixed_derivative<T: Scalar>(
    cost: &dyn Fn(f64, f64) -> f64,
    grid_x: &Grid1D<T>,
    grid_y: &Grid1D<T>,
    step: f64,
    threshold: f64,
) -> Result<NondegeneracyReport> {
    check_step(grid_x, grid_y, step)?;
    let xs: Vec<f64> = grid_x.midpoints().iter().map(Scalar::to_f64).collect();
    let ys: Vec<f64> = grid_y.midpoints().iter().map(Scalar::to_f64).collect();
    let mut samples = Vec::with_capacity(xs.len() * ys.len());
    let mut degenerate = Vec::new();
    let mut min_abs = f64::INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let estimate = (cost(x + step, y + step) - cost(x + step, y - step) - cost(x - step, y + step)
                + cost(x - step, y - step))
                / (4.0 * step * step);
            if !estimate.is_finite() || estimate.abs() <= threshold {
                degenerate.push((i, j));
            }
            if estimate.is_finite() {
                min_abs = min_abs.min(estimate.abs());
            }
            samples.push(MixedDerivativeSample { i, j, x, y, estimate });
        }
    }
    let verdict = if degenerate.is_empty() {
        NondegeneracyVerdict::Pass
    } else {
        NondegeneracyVerdict::DegeneratePoints { points: degenerate }
    };
    Ok(NondegeneracyReport {
        samples,
        min_abs_estimate: min_abs.is_finite().then_some(min_abs),
        step,
        threshold,
        verdict,
    })
}

fn check_step<T: Scalar>(grid_x: &Grid1D<T>, grid_y: &Grid1D<T>, step: f64) -> Result<()> {
    let half_cell = grid_x.width().to_f64().min(grid_y.width().to_f64()) / 2.0;
    if step > 0.0 && step < half_cell {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("finite-difference step {step} must lie in (0, {half_cell})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NONDEGENERACY_THRESHOLD;
    use crate::matrix::Matrix;

    #[test]
    fn periodic_cost_is_symmetric_and_periodic() {
        let pts = [-0.5, -0.3125, -0.1, 0.0, 0.2, 0.4375];
        for &x in &pts {
            for &y in &pts {
                let c = periodic_quadratic(&x, &y);
                assert!((c - periodic_quadratic(&y, &x)).abs() < 1e-15);
                assert!((c - periodic_quadratic(&(x + 1.0), &y)).abs() < 1e-15);
                let brute = [-1.0, 0.0, 1.0]
                    .iter()
                    .map(|s| (x - y - s) * (x - y - s))
                    .fold(f64::INFINITY, f64::min);
                assert!((c - brute).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_mixed_derivative_is_minus_one() {
        let g = Grid1D::<f64>::centered_unit(8).unwrap();
        let coarse = sample_nondegeneracy(&CostSpec::Quadratic, &g, &g, 1e-2, NONDEGENERACY_THRESHOLD).unwrap();
        let fine = sample_nondegeneracy(&CostSpec::Quadratic, &g, &g, 5e-3, NONDEGENERACY_THRESHOLD).unwrap();
        assert_eq!(coarse.verdict, NondegeneracyVerdict::Pass);
        for (a, b) in coarse.samples.iter().zip(&fine.samples) {
            assert!((a.estimate + 1.0).abs() < 1e-9);
            assert!((a.estimate - b.estimate).abs() < 1e-4);
        }
    }

    #[test]
    fn periodic_mixed_derivative_is_minus_two_off_the_kink() {
        let g = Grid1D::<f64>::centered_unit(8).unwrap();
        let report =
            sample_nondegeneracy(&CostSpec::PeriodicQuadratic, &g, &g, 1e-3, NONDEGENERACY_THRESHOLD).unwrap();
        assert_eq!(report.verdict, NondegeneracyVerdict::Pass);
        for s in &report.samples {
            // Midpoint pairs with |x - y| = 1/2 sit on the kink lines.
            let on_kink = ((s.x - s.y).abs() - 0.5).abs() < 1e-12;
            if !on_kink {
                assert!((s.estimate + 2.0).abs() < 1e-6, "{s:?}");
            }
        }
    }

    #[test]
    fn constant_cost_is_degenerate() {
        let g = Grid1D::<f64>::centered_unit(4).unwrap();
        let report = sample_mixed_derivative(&|_, _| 1.0, &g, &g, 1e-3, NONDEGENERACY_THRESHOLD).unwrap();
        assert!(report.samples.iter().all(|s| s.estimate == 0.0));
        match report.verdict {
            NondegeneracyVerdict::DegeneratePoints { points } => assert_eq!(points.len(), 16),
            other => panic!("expected degenerate verdict, got {other:?}"),
        }
    }

    #[test]
    fn tabulated_cost_is_unchecked() {
        let g = Grid1D::<f64>::centered_unit(4).unwrap();
        let spec = CostSpec::Tabulated(Matrix::filled(4, 4, 1.0));
        let report = sample_nondegeneracy(&spec, &g, &g, 1e-3, 1e-6).unwrap();
        assert_eq!(report.verdict, NondegeneracyVerdict::Unchecked);
        assert!(report.samples.is_empty());
    }

    #[test]
    fn step_must_fit_in_half_a_cell() {
        let g = Grid1D::<f64>::centered_unit(4).unwrap();
        assert!(sample_nondegeneracy(&CostSpec::Quadratic, &g, &g, 0.2, 1e-6).is_err());
        assert!(sample_nondegeneracy(&CostSpec::Quadratic, &g, &g, 0.0, 1e-6).is_err());
    }
}
