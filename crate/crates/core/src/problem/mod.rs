//! Discrete capacity-constrained transport instances and candidate plans.

mod examples;
mod random;

pub use examples::{example_instance, strip_candidate, strip_rasterization, Example, ExampleInstance};
pub use random::{random_feasible_instance, RandomInstanceConfig};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{balance_marginals, sum};
use crate::matrix::Matrix;
use crate::scalar::{Mode, Scalar};
use crate::solver::{self, SolveStatus};

/// Minimize `sum c_ij h_ij` over `0 <= h <= capacity` with row sums `f`
/// and column sums `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem<T> {
    cost: Matrix<T>,
    f: Vec<T>,
    g: Vec<T>,
    capacity: Matrix<T>,
}

impl<T: Scalar> DiscreteProblem<T> {
    /// Validates shapes, signs and mass balance.
    pub fn new(cost: Matrix<T>, f: Vec<T>, g: Vec<T>, capacity: Matrix<T>) -> Result<Self> {
        let (m, n) = (f.len(), g.len());
        if cost.shape() != (m, n) || capacity.shape() != (m, n) {
            return Err(Error::Dimension(format!(
                "marginals are {m} and {n} long but cost is {:?} and capacity is {:?}",
                cost.shape(),
                capacity.shape()
            )));
        }
        if let Some((k, v)) = f.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::Domain(format!("f[{k}] = {v} is negative")));
        }
        if let Some((k, v)) = g.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::Domain(format!("g[{k}] = {v} is negative")));
        }
        if let Some((i, j, v)) = capacity.iter_indexed().find(|(_, _, v)| v.is_negative()) {
            return Err(Error::Domain(format!("capacity ({i}, {j}) = {v} is negative")));
        }
        let (f_total, g_total) = (sum(&f), sum(&g));
        let balanced = match T::MODE {
            Mode::Exact => f_total == g_total,
            Mode::Float => {
                let (a, b) = (f_total.to_f64(), g_total.to_f64());
                (a - b).abs() <= crate::config::BALANCE_REL_TOL * a.abs().max(b.abs())
            }
        };
        if !balanced {
            return Err(Error::Unbalanced { f_total: f_total.encode(), g_total: g_total.encode() });
        }
        Ok(Self { cost, f, g, capacity })
    }

    /// Like [`DiscreteProblem::new`], but first rescales the lighter
    /// marginal in float mode.
    pub fn balanced(cost: Matrix<T>, mut f: Vec<T>, mut g: Vec<T>, capacity: Matrix<T>) -> Result<Self> {
        balance_marginals(&mut f, &mut g)?;
        Self::new(cost, f, g, capacity)
    }

    pub fn cost(&self) -> &Matrix<T> {
        &self.cost
    }

    pub fn f(&self) -> &[T] {
        &self.f
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn capacity(&self) -> &Matrix<T> {
        &self.capacity
    }

    pub fn mode(&self) -> Mode {
        T::MODE
    }

    pub fn rows(&self) -> usize {
        self.f.len()
    }

    pub fn cols(&self) -> usize {
        self.g.len()
    }

    pub fn total_mass(&self) -> T {
        sum(&self.f)
    }

    /// Largest absolute cost entry, used to scale float tolerances.
    pub fn cost_scale(&self) -> f64 {
        self.cost.as_slice().iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    /// `sum c_ij h_ij`.
    pub fn objective(&self, plan: &Matrix<T>) -> T {
        self.cost
            .as_slice()
            .iter()
            .zip(plan.as_slice())
            .fold(T::zero(), |acc, (c, h)| acc + c.clone() * h.clone())
    }

    /// Sub-instance on rows `rows` and columns `cols` with new marginals.
    pub fn restricted(&self, rows: &[usize], cols: &[usize], f: Vec<T>, g: Vec<T>) -> Result<Self> {
        let cost = Matrix::from_fn(rows.len(), cols.len(), |a, b| self.cost[(rows[a], cols[b])].clone());
        let capacity = Matrix::from_fn(rows.len(), cols.len(), |a, b| self.capacity[(rows[a], cols[b])].clone());
        Self::new(cost, f, g, capacity)
    }

    /// Same instance with every capacity multiplied by `factor`.
    pub fn with_capacity_scaled(&self, factor: &T) -> Result<Self> {
        let capacity = self.capacity.map(|c| c.clone() * factor.clone());
        Self::new(self.cost.clone(), self.f.clone(), self.g.clone(), capacity)
    }

    /// Same instance with `f`, `g` and capacities multiplied by `factor`.
    pub fn with_mass_scaled(&self, factor: &T) -> Result<Self> {
        let scale = |v: &T| v.clone() * factor.clone();
        Self::new(
            self.cost.clone(),
            self.f.iter().map(scale).collect(),
            self.g.iter().map(scale).collect(),
            self.capacity.map(scale),
        )
    }
}

/// Where a candidate plan came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Solver,
    Constructed,
    File,
}

/// A transported-mass matrix, not assumed feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePlan<T> {
    pub h: Matrix<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> CandidatePlan<T> {
    pub fn new(h: Matrix<T>, provenance: Provenance) -> Self {
        Self { h, provenance }
    }

    pub fn zeros(m: usize, n: usize, provenance: Provenance) -> Self {
        Self::new(Matrix::filled(m, n, T::zero()), provenance)
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.h.rows()).map(|i| sum(self.h.row(i))).collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.h.cols()];
        for (_, j, v) in self.h.iter_indexed() {
            out[j] = out[j].clone() + v.clone();
        }
        out
    }
}

/// Worst violations of the constraints defining the feasible set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanReport<T> {
    pub row_error: T,
    pub col_error: T,
    pub capacity_violation: T,
    pub negativity: T,
    pub tol: T,
}

impl<T: Scalar> PlanReport<T> {
    pub fn marginal_error(&self) -> T {
        T::max_of(self.row_error.clone(), self.col_error.clone())
    }

    /// Whether the plan belongs to the feasible set within `tol`.
    pub fn is_member(&self) -> bool {
        [&self.row_error, &self.col_error, &self.capacity_violation, &self.negativity]
            .into_iter()
            .all(|e| *e <= self.tol)
    }
}

/// Measures marginal, capacity and sign violations of `plan`.
pub fn validate_plan<T: Scalar>(p: &DiscreteProblem<T>, plan: &CandidatePlan<T>, tol: T) -> Result<PlanReport<T>> {
    if plan.h.shape() != (p.rows(), p.cols()) {
        return Err(Error::Dimension(format!(
            "plan is {:?}, problem is {}x{}",
            plan.h.shape(),
            p.rows(),
            p.cols()
        )));
    }
    let max_abs_diff = |a: &[T], b: &[T]| {
        a.iter().zip(b).fold(T::zero(), |acc, (x, y)| T::max_of(acc, (x.clone() - y.clone()).abs()))
    };
    let row_error = max_abs_diff(&plan.row_sums(), p.f());
    let col_error = max_abs_diff(&plan.col_sums(), p.g());
    let mut capacity_violation = T::zero();
    let mut negativity = T::zero();
    for (h, cap) in plan.h.as_slice().iter().zip(p.capacity().as_slice()) {
        capacity_violation = T::max_of(capacity_violation, h.clone() - cap.clone());
        negativity = T::max_of(negativity, -h.clone());
    }
    Ok(PlanReport { row_error, col_error, capacity_violation, negativity, tol })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    Feasible,
    /// Mass of `f` that no plan under the capacities can ship.
    Infeasible { deficit: T },
}

/// Decides whether any plan meets the marginals under the capacities, by
/// running the solver's artificial-arc phase.
pub fn check_feasibility<T: Scalar>(p: &DiscreteProblem<T>) -> Result<Feasibility<T>> {
    let result = solver::solve(p)?;
    Ok(match result.status {
        SolveStatus::Optimal => Feasibility::Feasible,
        SolveStatus::Infeasible { deficit } => Feasibility::Infeasible { deficit },
    })
}
