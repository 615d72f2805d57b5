//! Discretization of intervals, densities, capacity bounds and costs.
//!
//! All discrete quantities are masses: a density sampled at a cell
//! midpoint times the cell volume. Marginal constraints on the discrete
//! problem are then plain row and column sums.

use crate::config::BALANCE_REL_TOL;
use crate::costs;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Mode, Scalar};

/// Uniform partition of `[lo, hi]` into `n` cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D<T> {
    lo: T,
    hi: T,
    n: usize,
}

impl<T: Scalar> Grid1D<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidArgument(format!("grid needs lo < hi, got [{lo}, {hi}]")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell".into()));
        }
        Ok(Self { lo, hi, n })
    }

    /// `n` cells on `[-1/2, 1/2]`, the interval of all built-in examples.
    pub fn centered_unit(n: usize) -> Result<Self> {
        Self::new(T::from_ratio(-1, 2), T::from_ratio(1, 2), n)
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> T {
        (self.hi.clone() - self.lo.clone()) / T::from_int(self.n as i64)
    }

    /// Midpoint of cell `i` (zero-based).
    pub fn midpoint(&self, i: usize) -> T {
        let half_steps = T::from_ratio(2 * i as i64 + 1, 2);
        self.lo.clone() + half_steps * self.width()
    }

    pub fn midpoints(&self) -> Vec<T> {
        (0..self.n).map(|i| self.midpoint(i)).collect()
    }
}

/// A one-dimensional density, given pointwise or as one value per cell.
pub enum Density<'a, T> {
    Pointwise(&'a dyn Fn(&T) -> T),
    PerCell(&'a [T]),
}

/// A density on a product grid, given pointwise or as one value per cell.
pub enum Density2D<'a, T> {
    Pointwise(&'a dyn Fn(&T, &T) -> T),
    PerCell(&'a Matrix<T>),
}

/// Cost functions understood by [`discretize_cost`].
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec<T> {
    /// `c(x, y) = |x - y|^2 / 2`.
    Quadratic,
    /// `c(x, y) = min over integers k of |x - y - k|^2`.
    PeriodicQuadratic,
    /// Explicit cost per cell pair.
    Tabulated(Matrix<T>),
}

impl<T: Scalar> CostSpec<T> {
    /// Pointwise value for the analytic kinds, `None` for tabulated costs.
    pub fn eval(&self, x: &T, y: &T) -> Option<T> {
        match self {
            CostSpec::Quadratic => Some(costs::quadratic(x, y)),
            CostSpec::PeriodicQuadratic => Some(costs::periodic_quadratic(x, y)),
            CostSpec::Tabulated(_) => None,
        }
    }
}

/// Midpoint-rule masses of a density on `grid`.
pub fn discretize_marginal<T: Scalar>(density: Density<'_, T>, grid: &Grid1D<T>) -> Result<Vec<T>> {
    let width = grid.width();
    let samples: Vec<T> = match density {
        Density::Pointwise(f) => grid.midpoints().iter().map(f).collect(),
        Density::PerCell(table) => {
            if table.len() != grid.len() {
                return Err(Error::Dimension(format!(
                    "density table has {} entries, grid has {} cells",
                    table.len(),
                    grid.len()
                )));
            }
            table.to_vec()
        }
    };
    samples
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d.is_negative() {
                Err(Error::Domain(format!("negative density {d} in cell {i}")))
            } else {
                Ok(d * width.clone())
            }
        })
        .collect()
}

/// Midpoint-rule capacity masses `bound(x_i, y_j) * dx * dy`.
pub fn discretize_capacity<T: Scalar>(
    bound: Density2D<'_, T>,
    grid_x: &Grid1D<T>,
    grid_y: &Grid1D<T>,
) -> Result<Matrix<T>> {
    let area = grid_x.width() * grid_y.width();
    let samples = match bound {
        Density2D::Pointwise(b) => {
            let xs = grid_x.midpoints();
            let ys = grid_y.midpoints();
            Matrix::from_fn(xs.len(), ys.len(), |i, j| b(&xs[i], &ys[j]))
        }
        Density2D::PerCell(table) => {
            check_shape(table, grid_x, grid_y, "capacity table")?;
            table.clone()
        }
    };
    if let Some((i, j, v)) = samples.iter_indexed().find(|(_, _, v)| v.is_negative()) {
        return Err(Error::Domain(format!("negative capacity bound {v} at ({i}, {j})")));
    }
    Ok(samples.map(|v| v.clone() * area.clone()))
}

/// Cost matrix `c(x_i, y_j)` on the product grid.
pub fn discretize_cost<T: Scalar>(
    spec: &CostSpec<T>,
    grid_x: &Grid1D<T>,
    grid_y: &Grid1D<T>,
) -> Result<Matrix<T>> {
    if let CostSpec::Tabulated(table) = spec {
        check_shape(table, grid_x, grid_y, "tabulated cost")?;
        return Ok(table.clone());
    }
    let xs = grid_x.midpoints();
    let ys = grid_y.midpoints();
    Ok(Matrix::from_fn(xs.len(), ys.len(), |i, j| {
        spec.eval(&xs[i], &ys[j]).expect("analytic cost")
    }))
}

fn check_shape<T>(table: &Matrix<T>, gx: &Grid1D<T>, gy: &Grid1D<T>, what: &str) -> Result<()>
where
    T: Scalar,
{
    if table.shape() != (gx.len(), gy.len()) {
        return Err(Error::Dimension(format!(
            "{what} is {:?}, grids are {}x{}",
            table.shape(),
            gx.len(),
            gy.len()
        )));
    }
    Ok(())
}

/// Makes the two marginals carry the same total mass.
///
/// Exact mode: any mismatch is an error. Float mode: a relative mismatch
/// above [`BALANCE_REL_TOL`] is removed by scaling the lighter marginal up.
pub fn balance_marginals<T: Scalar>(f: &mut [T], g: &mut [T]) -> Result<()> {
    let f_total = sum(f);
    let g_total = sum(g);
    if f_total == g_total {
        return Ok(());
    }
    let unbalanced = || Error::Unbalanced { f_total: f_total.encode(), g_total: g_total.encode() };
    match T::MODE {
        Mode::Exact => Err(unbalanced()),
        Mode::Float => {
            let (a, b) = (f_total.to_f64(), g_total.to_f64());
            let scale = a.abs().max(b.abs());
            if (a - b).abs() <= BALANCE_REL_TOL * scale {
                return Ok(());
            }
            let (lighter, factor) = if a < b { (f, b / a) } else { (g, a / b) };
            if !factor.is_finite() {
                return Err(unbalanced());
            }
            let factor = T::from_f64(factor).ok_or_else(unbalanced)?;
            for v in lighter.iter_mut() {
                *v = v.clone() * factor.clone();
            }
            Ok(())
        }
    }
}

pub(crate) fn sum<T: Scalar>(values: &[T]) -> T {
    values.iter().fold(T::zero(), |acc, v| acc + v.clone())
}
