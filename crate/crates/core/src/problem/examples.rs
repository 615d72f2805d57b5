//! The three reference instances on `I = [-1/2, 1/2]` with uniform
//! marginals, together with their analytic candidate plans.

use crate::error::{Error, Result};
use crate::grid::{discretize_capacity, discretize_cost, discretize_marginal, CostSpec, Density, Density2D, Grid1D};
use crate::matrix::Matrix;
use crate::problem::{CandidatePlan, DiscreteProblem, Provenance};
use crate::scalar::{convert, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum Example {
    /// Quadratic cost, capacity density 2: the optimum saturates the two
    /// same-sign quadrant tiles.
    Checkerboard,
    /// Quadratic cost, capacity density 4: the four diagonal tiles of side
    /// 1/4 are feasible but not optimal.
    FourTiles,
    /// Periodic quadratic cost with capacity density `hbar >= 1`: the
    /// candidate is the diagonal strip of perpendicular width
    /// `1 / (hbar * sqrt 2)`.
    Strip { hbar: Rational },
}

impl Example {
    /// `1`, `2` or `3`, with `hbar` used only by the strip.
    pub fn from_number(which: u8, hbar: Option<Rational>) -> Result<Self> {
        match which {
            1 => Ok(Example::Checkerboard),
            2 => Ok(Example::FourTiles),
            3 => Ok(Example::Strip { hbar: hbar.unwrap_or_else(|| Rational::from_int(2)) }),
            other => Err(Error::InvalidArgument(format!("no example {other}; choose 1, 2 or 3"))),
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            Example::Checkerboard => 1,
            Example::FourTiles => 2,
            Example::Strip { .. } => 3,
        }
    }

    fn divisor(&self) -> usize {
        match self {
            Example::FourTiles => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExampleInstance<T> {
    pub problem: DiscreteProblem<T>,
    pub candidate: CandidatePlan<T>,
    pub grid: Grid1D<T>,
}

/// Discretizes an example on an `n x n` grid and samples its candidate.
///
/// The strip candidate fills each cell in proportion to its overlap with
/// the strip, which keeps the marginals exact; see [`strip_rasterization`]
/// for the plain cell-center version.
pub fn example_instance<T: Scalar>(which: &Example, n: usize) -> Result<ExampleInstance<T>> {
    let divisor = which.divisor();
    if n == 0 || n % divisor != 0 {
        return Err(Error::Divisibility { n, divisor });
    }
    let grid = Grid1D::<T>::centered_unit(n)?;
    let one = |_: &T| T::one();
    let f = discretize_marginal(Density::Pointwise(&one), &grid)?;
    let g = f.clone();

    let (density, cost_spec) = match which {
        Example::Checkerboard => (T::from_int(2), CostSpec::Quadratic),
        Example::FourTiles => (T::from_int(4), CostSpec::Quadratic),
        Example::Strip { hbar } => {
            if *hbar < Rational::from_int(1) {
                return Err(Error::InvalidArgument(format!("strip example needs hbar >= 1, got {hbar}")));
            }
            (convert::<Rational, T>(hbar), CostSpec::PeriodicQuadratic)
        }
    };
    let bound = |_: &T, _: &T| density.clone();
    let capacity = discretize_capacity(Density2D::Pointwise(&bound), &grid, &grid)?;
    let cost = discretize_cost(&cost_spec, &grid, &grid)?;

    let candidate = match which {
        Example::Checkerboard => {
            let half = n / 2;
            CandidatePlan::new(
                Matrix::from_fn(n, n, |i, j| {
                    if (i < half) == (j < half) {
                        capacity[(i, j)].clone()
                    } else {
                        T::zero()
                    }
                }),
                Provenance::Constructed,
            )
        }
        Example::FourTiles => {
            let tile = n / 4;
            CandidatePlan::new(
                Matrix::from_fn(n, n, |i, j| {
                    if i / tile == j / tile {
                        capacity[(i, j)].clone()
                    } else {
                        T::zero()
                    }
                }),
                Provenance::Constructed,
            )
        }
        Example::Strip { hbar } => strip_candidate(n, hbar)?,
    };

    let problem = DiscreteProblem::new(cost, f, g, capacity)?;
    Ok(ExampleInstance { problem, candidate, grid })
}

/// Saturates every cell whose center lies in the strip
/// `|y - x| / sqrt 2 <= 1 / (2 hbar sqrt 2)`, with `y - x` folded into
/// `[-1/2, 1/2)`. Equivalently `2 hbar |y - x| <= 1`, which keeps the test
/// rational.
pub fn strip_rasterization<T: Scalar>(n: usize, hbar: &Rational) -> Result<CandidatePlan<T>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Divisibility { n, divisor: 2 });
    }
    let hbar_t: T = convert(hbar);
    let cell = T::from_ratio(1, n as i64);
    let capacity = hbar_t.clone() * cell.clone() * cell;
    let n_i = n as i64;
    Ok(CandidatePlan::new(
        Matrix::from_fn(n, n, |i, j| {
            // Midpoint offsets are exact multiples of 1/n.
            let k = (j as i64 - i as i64).rem_euclid(n_i);
            let folded = if k >= n_i / 2 { k - n_i } else { k };
            let inside = T::from_int(2) * hbar_t.clone() * T::from_int(folded.abs()) <= T::from_int(n_i);
            if inside {
                capacity.clone()
            } else {
                T::zero()
            }
        }),
        Provenance::Constructed,
    ))
}

/// Fills each cell with capacity times the fraction of it inside the strip
/// `|y - x| <= 1 / (2 hbar)` (periodic). Along a row the cell with offset
/// `k` covers offsets `[k - 1/2, k + 1/2]` in units of `1/n`, and the strip
/// covers `[-B, B]` with `B = n / (2 hbar)`, so every row and column carries
/// exactly `2 B hbar / n^2 = 1/n`.
pub fn strip_candidate<T: Scalar>(n: usize, hbar: &Rational) -> Result<CandidatePlan<T>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Divisibility { n, divisor: 2 });
    }
    let n_i = n as i64;
    let half_band = Rational::from_int(n_i) / (Rational::from_int(2) * hbar.clone());
    let half = Rational::from_ratio(1, 2);
    let coverage: Vec<T> = (0..n_i)
        .map(|k| {
            let mut inside = Rational::from_int(0);
            for shift in [-n_i, 0, n_i] {
                let centre = Rational::from_int(k + shift);
                let lo = Rational::max_of(centre.clone() - half.clone(), -half_band.clone());
                let hi = Rational::min_of(centre + half.clone(), half_band.clone());
                if hi > lo {
                    inside += hi - lo;
                }
            }
            convert(&inside)
        })
        .collect();
    let capacity: T = convert(&(hbar.clone() / Rational::from_int(n_i * n_i)));
    Ok(CandidatePlan::new(
        Matrix::from_fn(n, n, |i, j| {
            let k = (j as i64 - i as i64).rem_euclid(n_i) as usize;
            capacity.clone() * coverage[k].clone()
        }),
        Provenance::Constructed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::validate_plan;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn checkerboard_instance_at_n4() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        assert_eq!(ex.problem.f(), &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)][..]);
        assert!(ex.problem.capacity().as_slice().iter().all(|c| c == &q(1, 8)));
        let saturated = ex.candidate.h.as_slice().iter().filter(|v| **v == q(1, 8)).count();
        let empty = ex.candidate.h.as_slice().iter().filter(|v| **v == q(0, 1)).count();
        assert_eq!((saturated, empty), (8, 8));
        let report = validate_plan(&ex.problem, &ex.candidate, q(0, 1)).unwrap();
        assert!(report.is_member());
        assert_eq!(report.marginal_error(), q(0, 1));
    }

    #[test]
    fn four_tile_candidate_at_n4() {
        let ex = example_instance::<Rational>(&Example::FourTiles, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { q(4, 16) } else { q(0, 1) };
                assert_eq!(ex.candidate.h[(i, j)], expected);
            }
        }
        assert!(validate_plan(&ex.problem, &ex.candidate, q(0, 1)).unwrap().is_member());
    }

    #[test]
    fn strip_rasterization_at_n8() {
        let hbar = q(2, 1);
        let raw = strip_rasterization::<Rational>(8, &hbar).unwrap();
        let ex = example_instance::<Rational>(&Example::Strip { hbar }, 8).unwrap();
        let raw_report = validate_plan(&ex.problem, &CandidatePlan::new(raw.h.clone(), Provenance::Constructed), q(0, 1))
            .unwrap();
        assert!(raw_report.marginal_error() <= q(2, 8));
        // Five offsets |k| <= 2 per row, each at capacity 2/64.
        assert_eq!(raw.row_sums()[0], q(10, 64));
        let repaired = validate_plan(&ex.problem, &ex.candidate, q(0, 1)).unwrap();
        assert!(repaired.is_member());
        // Band edge at offset 2 passes through cell centers: |k| <= 1 full,
        // |k| = 2 half.
        let cap = q(2, 64);
        let row: Vec<Rational> = (0..8).map(|j| ex.candidate.h[(0, j)].clone()).collect();
        let half = cap.clone() / q(2, 1);
        let zero = q(0, 1);
        assert_eq!(row, vec![cap.clone(), cap.clone(), half.clone(), zero.clone(), zero.clone(), zero, half, cap]);
    }

    #[test]
    fn strip_candidate_is_feasible_for_awkward_widths() {
        for (n, hbar) in [(8, q(3, 1)), (10, q(7, 4)), (6, q(1, 1)), (64, q(5, 2))] {
            let ex = example_instance::<Rational>(&Example::Strip { hbar }, n).unwrap();
            let report = validate_plan(&ex.problem, &ex.candidate, q(0, 1)).unwrap();
            assert!(report.is_member(), "n={n}");
        }
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(matches!(
            example_instance::<f64>(&Example::FourTiles, 6),
            Err(Error::Divisibility { n: 6, divisor: 4 })
        ));
        assert!(example_instance::<f64>(&Example::Checkerboard, 5).is_err());
        assert!(example_instance::<f64>(&Example::Strip { hbar: q(1, 2) }, 8).is_err());
    }
}
