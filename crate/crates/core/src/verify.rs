//! Executable optimality checks on plans.
//!
//! * [`find_improving_cycle`]: a plan is optimal iff its residual graph has
//!   no negative cycle. A negative cycle is a mass-preserving perturbation
//!   that lowers the cost; the classic four-cell swap is the shortest kind.
//! * [`restriction_test`]: an optimal plan restricted to a rectangle of
//!   rows and columns is optimal for the sub-instance it induces.
//! * [`build_coupling`]: a signed coupling with prescribed signed marginals
//!   whose sup-norm is controlled by theirs.

use serde::Serialize;

use crate::config::{BALANCE_REL_TOL, GAP_REL_TOL, SOLVER_REL_TOL};
use crate::error::{Error, Result};
use crate::grid::sum;
use crate::matrix::Matrix;
use crate::problem::{validate_plan, CandidatePlan, DiscreteProblem, Provenance};
use crate::scalar::{Mode, Scalar};
use crate::solver::{solve, SolveResult, SolveStatus};

/// One step of a residual cycle through cell `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CycleArc {
    pub i: usize,
    pub j: usize,
    /// `true`: source `i` to sink `j`, adds mass to the cell.
    /// `false`: sink `j` back to source `i`, removes mass.
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCycle<T> {
    /// Alternating forward and backward arcs, closing on the first source.
    pub arcs: Vec<CycleArc>,
    /// `sum c` over forward arcs minus `sum c` over backward arcs.
    pub signed_cost: T,
    /// Largest push keeping every cell within `[0, capacity]`.
    pub max_push: T,
}

impl<T> ResidualCycle<T> {
    /// Node labels in traversal order: `x3 -> y1 -> x0 -> ...`.
    pub fn node_labels(&self) -> Vec<String> {
        self.arcs
            .iter()
            .map(|a| if a.forward { format!("x{}", a.i) } else { format!("y{}", a.j) })
            .collect()
    }
}

struct ResidualArc<T> {
    from: usize,
    to: usize,
    cost: T,
    arc: CycleArc,
}

/// Looks for a negative-cost cycle in the residual graph of `plan`.
///
/// A cell offers a forward arc while `h < capacity - tol` and a backward arc
/// while `h > tol`. In float mode a cycle counts as negative below
/// `-1e-9 * max |c|`; in exact mode any negative cost counts. The first
/// cycle found is returned, not the most negative one.
pub fn find_improving_cycle<T: Scalar>(
    p: &DiscreteProblem<T>,
    plan: &CandidatePlan<T>,
    tol: &T,
) -> Result<Option<ResidualCycle<T>>> {
    let report = validate_plan(p, plan, tol.clone())?;
    if !report.is_member() {
        return Err(Error::InfeasiblePlan(format!(
            "marginal error {}, capacity violation {}, negativity {}",
            report.marginal_error(),
            report.capacity_violation,
            report.negativity
        )));
    }
    let (m, n) = (p.rows(), p.cols());
    let neg_tol = T::eps(SOLVER_REL_TOL * p.cost_scale());

    let mut arcs = Vec::new();
    for (i, j, h) in plan.h.iter_indexed() {
        let c = p.cost()[(i, j)].clone();
        if *h < p.capacity()[(i, j)].clone() - tol.clone() {
            arcs.push(ResidualArc { from: i, to: m + j, cost: c.clone(), arc: CycleArc { i, j, forward: true } });
        }
        if *h > *tol {
            arcs.push(ResidualArc { from: m + j, to: i, cost: -c, arc: CycleArc { i, j, forward: false } });
        }
    }

    // Bellman-Ford from a virtual source joined to every node at cost 0.
    let nodes = m + n;
    let mut dist = vec![T::zero(); nodes];
    let mut pred: Vec<Option<usize>> = vec![None; nodes];
    let mut last_updated = None;
    for _ in 0..nodes {
        last_updated = None;
        for (k, a) in arcs.iter().enumerate() {
            let candidate = dist[a.from].clone() + a.cost.clone();
            if candidate < dist[a.to].clone() - neg_tol.clone() {
                dist[a.to] = candidate;
                pred[a.to] = Some(k);
                last_updated = Some(a.to);
            }
        }
        if last_updated.is_none() {
            return Ok(None);
        }
    }
    let Some(mut node) = last_updated else { return Ok(None) };
    for _ in 0..nodes {
        node = arcs[pred[node].expect("relaxed node has a predecessor")].from;
    }

    let start = node;
    let mut cycle = Vec::new();
    loop {
        let k = pred[node].expect("cycle node has a predecessor");
        cycle.push(k);
        node = arcs[k].from;
        if node == start {
            break;
        }
    }
    cycle.reverse();
    // Start the walk at a source so the arcs alternate forward, backward.
    if let Some(pos) = cycle.iter().position(|&k| arcs[k].arc.forward) {
        cycle.rotate_left(pos);
    }

    let signed_cost = cycle.iter().fold(T::zero(), |acc, &k| acc + arcs[k].cost.clone());
    if signed_cost >= -neg_tol {
        return Ok(None);
    }
    let max_push = cycle
        .iter()
        .map(|&k| {
            let CycleArc { i, j, forward } = arcs[k].arc;
            if forward {
                p.capacity()[(i, j)].clone() - plan.h[(i, j)].clone()
            } else {
                plan.h[(i, j)].clone()
            }
        })
        .reduce(T::min_of)
        .expect("cycle is non-empty");
    Ok(Some(ResidualCycle { arcs: cycle.iter().map(|&k| arcs[k].arc).collect(), signed_cost, max_push }))
}

/// Pushes `delta` around `cycle`. The cost changes by
/// `signed_cost * delta`; marginals are untouched.
pub fn apply_cycle<T: Scalar>(plan: &CandidatePlan<T>, cycle: &ResidualCycle<T>, delta: &T) -> Result<CandidatePlan<T>> {
    if !delta.is_positive() || *delta > cycle.max_push {
        return Err(Error::InvalidArgument(format!(
            "push {delta} outside (0, {}]",
            cycle.max_push
        )));
    }
    let mut h = plan.h.clone();
    for a in &cycle.arcs {
        let cell = &mut h[(a.i, a.j)];
        *cell = if a.forward { cell.clone() + delta.clone() } else { cell.clone() - delta.clone() };
    }
    Ok(CandidatePlan::new(h, Provenance::Constructed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestrictionOutcome<T> {
    /// Cost of the optimal plan restricted to the rectangle.
    pub restricted_cost: T,
    /// Optimum of the sub-instance with the restricted plan's marginals.
    pub resolved_cost: T,
    pub passed: bool,
}

/// Restricts an optimal plan to `rows x cols`, re-solves the sub-instance
/// with the restricted marginals and compares the two costs.
pub fn restriction_test<T: Scalar>(
    p: &DiscreteProblem<T>,
    solved: &SolveResult<T>,
    rows: &[usize],
    cols: &[usize],
) -> Result<RestrictionOutcome<T>> {
    if !solved.is_optimal() {
        return Err(Error::InvalidArgument("restriction test needs an optimal solve".into()));
    }
    if rows.is_empty() || cols.is_empty() {
        return Ok(RestrictionOutcome { restricted_cost: T::zero(), resolved_cost: T::zero(), passed: true });
    }
    check_index_set(rows, p.rows(), "row")?;
    check_index_set(cols, p.cols(), "column")?;

    let h = Matrix::from_fn(rows.len(), cols.len(), |a, b| solved.plan.h[(rows[a], cols[b])].clone());
    let restricted = CandidatePlan::new(h, Provenance::Constructed);
    let sub = p.restricted(rows, cols, restricted.row_sums(), restricted.col_sums())?;
    let restricted_cost = sub.objective(&restricted.h);
    let resolved = solve(&sub)?;
    if let SolveStatus::Infeasible { deficit } = resolved.status {
        return Err(Error::SolverFailure(format!(
            "restricted sub-instance reported infeasible (deficit {deficit}) although a plan exists"
        )));
    }
    let resolved_cost = resolved.objective;
    let passed = match T::MODE {
        Mode::Exact => restricted_cost == resolved_cost,
        Mode::Float => {
            let (a, b) = (restricted_cost.to_f64(), resolved_cost.to_f64());
            (a - b).abs() <= GAP_REL_TOL * a.abs().max(b.abs()).max(1.0)
        }
    };
    Ok(RestrictionOutcome { restricted_cost, resolved_cost, passed })
}

fn check_index_set(indices: &[usize], bound: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; bound];
    for &k in indices {
        if k >= bound {
            return Err(Error::InvalidArgument(format!("{what} index {k} out of range 0..{bound}")));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidArgument(format!("{what} index {k} repeated")));
        }
    }
    Ok(())
}

/// `h_ij = f_i / |Y| + g_j / |X| - mass / (|X| |Y|)`: row sums `f`, column
/// sums `g`, and `max |h| < 3 eps (1/|X| + 1/|Y|)` whenever
/// `max |f|, max |g| < eps`. Cell counts stand in for the measures of the
/// two index sets.
pub fn build_coupling<T: Scalar>(f: &[T], g: &[T], eps: &T) -> Result<Matrix<T>> {
    if f.is_empty() || g.is_empty() {
        return Err(Error::InvalidArgument("coupling needs non-empty index sets".into()));
    }
    for v in f.iter().chain(g) {
        if v.abs() >= *eps {
            return Err(Error::InvalidArgument(format!("|{v}| is not below eps = {eps}")));
        }
    }
    let mass = sum(f);
    let g_mass = sum(g);
    let balanced = match T::MODE {
        Mode::Exact => mass == g_mass,
        Mode::Float => (mass.to_f64() - g_mass.to_f64()).abs() <= BALANCE_REL_TOL * eps.to_f64() * f.len() as f64,
    };
    if !balanced {
        return Err(Error::Unbalanced { f_total: mass.encode(), g_total: g_mass.encode() });
    }
    let nx = T::from_int(f.len() as i64);
    let ny = T::from_int(g.len() as i64);
    let corner = mass / (nx.clone() * ny.clone());
    Ok(Matrix::from_fn(f.len(), g.len(), |i, j| {
        f[i].clone() / ny.clone() + g[j].clone() / nx.clone() - corner.clone()
    }))
}

/// `3 eps (1/|X| + 1/|Y|)`.
pub fn coupling_bound<T: Scalar>(eps: &T, nx: usize, ny: usize) -> T {
    T::from_int(3) * eps.clone() * (T::from_ratio(1, nx as i64) + T::from_ratio(1, ny as i64))
}
