//! Dense two-phase bounded-variable simplex with Bland's rule.
//!
//! Works on the explicit standard form: one column per cell plus one
//! artificial column per marginal constraint, the whole tableau `B^-1 A`
//! kept in memory. Exact arithmetic only, small instances only.

use num_traits::{One, Signed, Zero};

use crate::config::ORACLE_MAX_CELLS;
use crate::duality::DualCertificate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::problem::{CandidatePlan, DiscreteProblem, Provenance};
use crate::scalar::Rational;
use crate::solver::{count_fractional, SolveResult, SolveStats, SolveStatus};

struct Tableau {
    rows: usize,
    /// `rows x vars`, row-major.
    t: Vec<Rational>,
    vars: usize,
    basic: Vec<usize>,
    beta: Vec<Rational>,
    value: Vec<Rational>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    is_basic: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, r: usize, k: usize) -> &Rational {
        &self.t[r * self.vars + k]
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = &cost[self.basic[r]];
            if cb.is_zero() {
                continue;
            }
            for (k, dk) in d.iter_mut().enumerate() {
                let a = self.at(r, k);
                if !a.is_zero() {
                    *dk -= cb * a;
                }
            }
        }
        d
    }

    /// Minimizes `cost` over the current bounds; `allowed` masks entering
    /// candidates.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> Result<()> {
        loop {
            let d = self.reduced_costs(cost);
            let entering = (0..self.vars).find(|&k| {
                allowed[k]
                    && !self.is_basic[k]
                    && self.upper[k].as_ref() != Some(&self.lower[k])
                    && ((self.value[k] == self.lower[k] && d[k].is_negative())
                        || (Some(&self.value[k]) == self.upper[k].as_ref() && d[k].is_positive()))
            });
            let Some(k) = entering else { return Ok(()) };
            let increasing = self.value[k] == self.lower[k] && d[k].is_negative();
            let sign = if increasing { Rational::one() } else { -Rational::one() };

            // (step, variable index leaving, row or None for a bound flip)
            let mut best: Option<(Rational, usize, Option<usize>)> =
                self.upper[k].as_ref().map(|u| (u - &self.lower[k], k, None));
            for r in 0..self.rows {
                let alpha = &sign * self.at(r, k);
                let b = self.basic[r];
                let limit = if alpha.is_positive() {
                    Some((&self.beta[r] - &self.lower[b]) / &alpha)
                } else if alpha.is_negative() {
                    self.upper[b].as_ref().map(|u| (u - &self.beta[r]) / -&alpha)
                } else {
                    None
                };
                if let Some(limit) = limit {
                    let replace = match &best {
                        None => true,
                        Some((s, idx, _)) => limit < *s || (limit == *s && b < *idx),
                    };
                    if replace {
                        best = Some((limit, b, Some(r)));
                    }
                }
            }
            let Some((step, _, row)) = best else {
                return Err(Error::SolverFailure("oracle found an unbounded direction".into()));
            };

            for r in 0..self.rows {
                let alpha = self.at(r, k).clone();
                if !alpha.is_zero() {
                    self.beta[r] = &self.beta[r] - &sign * &step * alpha;
                }
            }
            self.value[k] = &self.value[k] + &sign * &step;
            self.pivots += 1;

            if let Some(r) = row {
                let leaving = self.basic[r];
                // Leaving variable rests at whichever bound it reached.
                let alpha = &sign * self.at(r, k);
                self.value[leaving] = if alpha.is_positive() {
                    self.lower[leaving].clone()
                } else {
                    self.upper[leaving].clone().expect("bounded leaving variable")
                };
                self.is_basic[leaving] = false;
                self.is_basic[k] = true;
                self.basic[r] = k;
                self.beta[r] = self.value[k].clone();
                self.pivot_on(r, k);
            }
            for r in 0..self.rows {
                self.value[self.basic[r]] = self.beta[r].clone();
            }
        }
    }

    fn pivot_on(&mut self, r: usize, k: usize) {
        let vars = self.vars;
        let p = self.at(r, k).clone();
        for c in 0..vars {
            let v = &self.t[r * vars + c] / &p;
            self.t[r * vars + c] = v;
        }
        for rr in 0..self.rows {
            if rr == r {
                continue;
            }
            let factor = self.at(rr, k).clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..vars {
                let pivot_row = &self.t[r * vars + c];
                if pivot_row.is_zero() {
                    continue;
                }
                let v = &self.t[rr * vars + c] - &factor * pivot_row;
                self.t[rr * vars + c] = v;
            }
        }
    }
}

/// Solves `p` with the dense oracle. Requires `m * n <= 64`.
pub fn oracle_solve(p: &DiscreteProblem<Rational>) -> Result<SolveResult<Rational>> {
    let (m, n) = (p.rows(), p.cols());
    let cells = m * n;
    if cells > ORACLE_MAX_CELLS {
        return Err(Error::InstanceTooLarge { cells, limit: ORACLE_MAX_CELLS });
    }
    let rows = m + n;
    let vars = cells + rows;

    let mut t = vec![Rational::zero(); rows * vars];
    for i in 0..m {
        for j in 0..n {
            t[i * vars + i * n + j] = Rational::one();
            t[(m + j) * vars + i * n + j] = Rational::one();
        }
    }
    for r in 0..rows {
        t[r * vars + cells + r] = Rational::one();
    }
    let rhs: Vec<Rational> = p.f().iter().chain(p.g()).cloned().collect();

    let mut upper: Vec<Option<Rational>> = p.capacity().as_slice().iter().cloned().map(Some).collect();
    upper.extend(std::iter::repeat(None).take(rows));
    let mut value = vec![Rational::zero(); cells];
    value.extend(rhs.iter().cloned());

    let mut tab = Tableau {
        rows,
        t,
        vars,
        basic: (cells..vars).collect(),
        beta: rhs,
        value,
        lower: vec![Rational::zero(); vars],
        upper,
        is_basic: (0..vars).map(|k| k >= cells).collect(),
        pivots: 0,
    };

    let phase1_cost: Vec<Rational> = (0..vars).map(|k| if k < cells { Rational::zero() } else { Rational::one() }).collect();
    tab.optimize(&phase1_cost, &vec![true; vars])?;

    let artificial: Rational = tab.value[cells..].iter().sum();
    let h = Matrix::from_fn(m, n, |i, j| tab.value[i * n + j].clone());
    let plan = CandidatePlan::new(h, Provenance::Solver);
    if artificial.is_positive() {
        // Every unshipped unit is counted once on each side.
        let deficit = artificial / Rational::from_integer(2.into());
        let objective = p.objective(&plan.h);
        return Ok(SolveResult {
            status: SolveStatus::Infeasible { deficit },
            plan,
            objective,
            dual: None,
            basis: None,
            stats: SolveStats { pivots: tab.pivots, ..SolveStats::default() },
        });
    }

    for k in cells..vars {
        tab.upper[k] = Some(Rational::zero());
    }
    let mut phase2_cost: Vec<Rational> = p.cost().as_slice().to_vec();
    phase2_cost.extend(std::iter::repeat(Rational::zero()).take(rows));
    let allowed: Vec<bool> = (0..vars).map(|k| k < cells).collect();
    tab.optimize(&phase2_cost, &allowed)?;

    let h = Matrix::from_fn(m, n, |i, j| tab.value[i * n + j].clone());
    let plan = CandidatePlan::new(h, Provenance::Solver);
    let objective = p.objective(&plan.h);

    // Row duals y = c_B B^-1; B^-1 sits in the artificial columns.
    let y: Vec<Rational> = (0..rows)
        .map(|r| {
            (0..rows).fold(Rational::zero(), |acc, rr| acc + &phase2_cost[tab.basic[rr]] * tab.at(rr, cells + r))
        })
        .collect();
    let u: Vec<Rational> = y[..m].iter().map(|v| -v).collect();
    let v: Vec<Rational> = y[m..].iter().map(|v| -v).collect();
    let w = Matrix::from_fn(m, n, |i, j| {
        let rc = &p.cost()[(i, j)] + &u[i] + &v[j];
        if rc.is_negative() {
            rc
        } else {
            Rational::zero()
        }
    });
    let fractional_cells = count_fractional(p, &plan, &Rational::zero());
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        plan,
        objective,
        dual: Some(DualCertificate { u, v, w }),
        basis: None,
        stats: SolveStats { pivots: tab.pivots, fractional_cells, ..SolveStats::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn rejects_large_instances() {
        let p = DiscreteProblem::new(
            Matrix::filled(9, 8, q(1, 1)),
            vec![q(0, 1); 9],
            vec![q(0, 1); 8],
            Matrix::filled(9, 8, q(1, 1)),
        )
        .unwrap();
        assert!(matches!(oracle_solve(&p), Err(Error::InstanceTooLarge { cells: 72, .. })));
    }

    #[test]
    fn infeasible_two_by_two() {
        let p = DiscreteProblem::new(
            Matrix::filled(2, 2, q(1, 1)),
            vec![q(1, 2); 2],
            vec![q(1, 2); 2],
            Matrix::from_rows(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(0, 1)]]).unwrap(),
        )
        .unwrap();
        let r = oracle_solve(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible { deficit: q(1, 2) });
    }

    #[test]
    fn zero_cost_has_zero_objective() {
        let p = DiscreteProblem::new(
            Matrix::filled(3, 2, q(0, 1)),
            vec![q(1, 3); 3],
            vec![q(1, 2); 2],
            Matrix::filled(3, 2, q(1, 3)),
        )
        .unwrap();
        let r = oracle_solve(&p).unwrap();
        assert!(r.is_optimal());
        assert_eq!(r.objective, q(0, 1));
    }
}
