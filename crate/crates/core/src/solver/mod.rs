//! Optimal plans for [`DiscreteProblem`]s.
//!
//! [`solve`] runs the bounded-variable network simplex. [`oracle_solve`] is a
//! dense tableau simplex that shares no code with it and exists only to
//! cross-check it on small exact instances.

mod network_simplex;
mod oracle;

pub use network_simplex::{ArcState, Basis, Lex, SolverOptions};
pub use oracle::oracle_solve;

use serde::Serialize;

use crate::duality::{extract_dual, DualCertificate};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::problem::{CandidatePlan, DiscreteProblem, Provenance};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SolveStatus<T> {
    Optimal,
    /// `deficit` is the part of `f` that could not be shipped.
    Infeasible { deficit: T },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    pub pivots: usize,
    pub degenerate_pivots: usize,
    pub bland_pivots: usize,
    /// Cells strictly between zero and capacity.
    pub fractional_cells: usize,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub status: SolveStatus<T>,
    /// Optimal plan, or the best partial shipment when infeasible.
    pub plan: CandidatePlan<T>,
    pub objective: T,
    /// Present whenever the status is optimal.
    pub dual: Option<DualCertificate<T>>,
    pub basis: Option<Basis<T>>,
    pub stats: SolveStats,
}

impl<T: Scalar> SolveResult<T> {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

pub fn solve<T: Scalar>(p: &DiscreteProblem<T>) -> Result<SolveResult<T>> {
    solve_with(p, &SolverOptions::default())
}

pub fn solve_with<T: Scalar>(p: &DiscreteProblem<T>, options: &SolverOptions) -> Result<SolveResult<T>> {
    let (m, n) = (p.rows(), p.cols());
    let outcome = network_simplex::run(p, options)?;

    let h = Matrix::from_fn(m, n, |i, j| outcome.flows[i * n + j].clone());
    let plan = CandidatePlan::new(h, Provenance::Solver);
    let objective = p.objective(&plan.h);
    let flow_tol = T::eps(crate::config::SOLVER_REL_TOL * p.total_mass().to_f64().abs());
    let fractional_cells = count_fractional(p, &plan, &flow_tol);
    let stats = SolveStats {
        pivots: outcome.pivots,
        degenerate_pivots: outcome.degenerate_pivots,
        bland_pivots: outcome.bland_pivots,
        fractional_cells,
    };

    if outcome.artificial_flow > flow_tol {
        let shipped = plan.h.as_slice().iter().fold(T::zero(), |acc, v| acc + v.clone());
        let deficit = T::max_of(p.total_mass() - shipped, T::zero());
        return Ok(SolveResult {
            status: SolveStatus::Infeasible { deficit },
            plan,
            objective,
            dual: None,
            basis: Some(outcome.basis),
            stats,
        });
    }

    // Fractional cells are basic, and a spanning tree on m + n + 1 nodes
    // always keeps at least one artificial arc.
    if fractional_cells + 1 > m + n {
        return Err(Error::SolverFailure(format!(
            "{fractional_cells} fractional cells exceed the vertex bound {}",
            (m + n).saturating_sub(1)
        )));
    }
    let dual = extract_dual(p, &outcome.basis)?;
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        plan,
        objective,
        dual: Some(dual),
        basis: Some(outcome.basis),
        stats,
    })
}

/// Cells with `tol < h < capacity - tol`.
pub fn count_fractional<T: Scalar>(p: &DiscreteProblem<T>, plan: &CandidatePlan<T>, tol: &T) -> usize {
    plan.h
        .as_slice()
        .iter()
        .zip(p.capacity().as_slice())
        .filter(|(h, cap)| **h > *tol && **h < (*cap).clone() - tol.clone())
        .count()
}
