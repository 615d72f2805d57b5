//! Dual certificates `(u, v, w)` for the capacity-constrained problem.
//!
//! Sign convention: a certificate is feasible when `w <= 0` and
//! `c + u + v - w >= 0` cellwise. Its value
//! `-sum u_i f_i - sum v_j g_j + sum w_ij capacity_ij`
//! bounds every feasible plan's cost from below, and equality proves the
//! plan optimal.

use std::cmp::Ordering;

use serde::Serialize;

use crate::config::CERTIFICATE_ABS_TOL;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::matrix::Matrix;
use crate::problem::{validate_plan, CandidatePlan, DiscreteProblem};
use crate::scalar::Scalar;
use crate::solver::{ArcState, Basis, Lex};

#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    /// Capacity multipliers, never positive.
    pub w: Matrix<T>,
}

impl<T: Scalar> DualCertificate<T> {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self { u: vec![T::zero(); m], v: vec![T::zero(); n], w: Matrix::filled(m, n, T::zero()) }
    }

    /// `c_ij + u_i + v_j - w_ij` for every cell.
    pub fn reduced_costs(&self, cost: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(cost.rows(), cost.cols(), |i, j| {
            cost[(i, j)].clone() + self.u[i].clone() + self.v[j].clone() - self.w[(i, j)].clone()
        })
    }

    /// Moves a constant from `u` to `v`; leaves the dual value unchanged on
    /// balanced instances.
    pub fn shifted(&self, s: &T) -> Self {
        Self {
            u: self.u.iter().map(|x| x.clone() + s.clone()).collect(),
            v: self.v.iter().map(|x| x.clone() - s.clone()).collect(),
            w: self.w.clone(),
        }
    }
}

/// Checks shapes and both sign conditions, reporting the worst cell.
pub fn check_certificate<T: Scalar>(p: &DiscreteProblem<T>, cert: &DualCertificate<T>, tol: &T) -> Result<()> {
    let (m, n) = (p.rows(), p.cols());
    if cert.u.len() != m || cert.v.len() != n || cert.w.shape() != (m, n) {
        return Err(Error::Dimension(format!(
            "certificate has |u| = {}, |v| = {}, w {:?}; problem is {m}x{n}",
            cert.u.len(),
            cert.v.len(),
            cert.w.shape()
        )));
    }
    let reduced = cert.reduced_costs(p.cost());
    let mut worst: Option<(T, usize, usize, &'static str)> = None;
    for (i, j, w) in cert.w.iter_indexed() {
        for (amount, reason) in [(w.clone(), "w > 0"), (-reduced[(i, j)].clone(), "c + u + v - w < 0")] {
            if amount > *tol && worst.as_ref().map_or(true, |(a, ..)| amount > *a) {
                worst = Some((amount, i, j, reason));
            }
        }
    }
    match worst {
        None => Ok(()),
        Some((amount, i, j, reason)) => Err(Error::InfeasibleCertificate {
            i,
            j,
            reason: format!("{reason} (by {amount})"),
        }),
    }
}

fn dual_value<T: Scalar>(p: &DiscreteProblem<T>, cert: &DualCertificate<T>) -> T {
    let mut total = T::zero();
    for (u, f) in cert.u.iter().zip(p.f()) {
        total = total - u.clone() * f.clone();
    }
    for (v, g) in cert.v.iter().zip(p.g()) {
        total = total - v.clone() * g.clone();
    }
    for (w, cap) in cert.w.as_slice().iter().zip(p.capacity().as_slice()) {
        total = total + w.clone() * cap.clone();
    }
    total
}

/// Dual value of a feasible certificate, a lower bound on the optimum.
pub fn dual_objective<T: Scalar>(p: &DiscreteProblem<T>, cert: &DualCertificate<T>) -> Result<T> {
    check_certificate(p, cert, &T::eps(CERTIFICATE_ABS_TOL))?;
    Ok(dual_value(p, cert))
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalityReport<T> {
    pub primal: T,
    pub dual: T,
    /// `primal - dual`, non-negative up to rounding by weak duality.
    pub gap: T,
    /// Cells carrying mass although their reduced cost is positive.
    pub transport_violations: Vec<(usize, usize)>,
    /// Cells with `w < 0` that are not saturated.
    pub saturation_violations: Vec<(usize, usize)>,
    pub certified: bool,
}

/// Checks a feasible plan against a feasible certificate: duality gap and
/// complementary slackness, both within `tol`.
pub fn check_optimality_pair<T: Scalar>(
    p: &DiscreteProblem<T>,
    plan: &CandidatePlan<T>,
    cert: &DualCertificate<T>,
    tol: &T,
) -> Result<OptimalityReport<T>> {
    let report = validate_plan(p, plan, tol.clone())?;
    if !report.is_member() {
        return Err(Error::InfeasiblePlan(format!(
            "marginal error {}, capacity violation {}, negativity {}",
            report.marginal_error(),
            report.capacity_violation,
            report.negativity
        )));
    }
    check_certificate(p, cert, &T::max_of(tol.clone(), T::eps(CERTIFICATE_ABS_TOL)))?;

    let primal = p.objective(&plan.h);
    let dual = dual_value(p, cert);
    let gap = primal.clone() - dual.clone();
    let reduced = cert.reduced_costs(p.cost());
    let mut transport_violations = Vec::new();
    let mut saturation_violations = Vec::new();
    for (i, j, h) in plan.h.iter_indexed() {
        if *h > *tol && reduced[(i, j)] > *tol {
            transport_violations.push((i, j));
        }
        if cert.w[(i, j)] < -tol.clone() && h.clone() < p.capacity()[(i, j)].clone() - tol.clone() {
            saturation_violations.push((i, j));
        }
    }
    let certified = gap <= *tol && transport_violations.is_empty() && saturation_violations.is_empty();
    Ok(OptimalityReport { primal, dual, gap, transport_violations, saturation_violations, certified })
}

/// Closed-form certificate for the quadratic-cost checkerboard instance:
/// `u = -x^2/2`, `v = -y^2/2`, `w = min(0, -x y)`, so that
/// `c + u + v = -x y` vanishes minus `w` exactly on same-sign cells.
pub fn build_example1_certificate<T: Scalar>(grid_x: &Grid1D<T>, grid_y: &Grid1D<T>) -> DualCertificate<T> {
    let xs = grid_x.midpoints();
    let ys = grid_y.midpoints();
    let half = T::from_ratio(1, 2);
    let u = xs.iter().map(|x| -(x.clone() * x.clone()) * half.clone()).collect();
    let v = ys.iter().map(|y| -(y.clone() * y.clone()) * half.clone()).collect();
    let w = Matrix::from_fn(xs.len(), ys.len(), |i, j| T::min_of(T::zero(), -(xs[i].clone() * ys[j].clone())));
    DualCertificate { u, v, w }
}

/// Reads a certificate off the final simplex basis.
///
/// Potentials carry a symbolic big-M part. Any concrete M at least as large
/// as every threshold implied by the nonbasic real arcs turns them into a
/// feasible certificate for the original problem; the smallest such M is
/// used. Then `w = min(0, c + u + v)`.
pub fn extract_dual<T: Scalar>(p: &DiscreteProblem<T>, basis: &Basis<T>) -> Result<DualCertificate<T>> {
    let (m, n) = (p.rows(), p.cols());
    let mut big_m = T::zero();
    for i in 0..m {
        for j in 0..n {
            let cost = Lex { big: 0, small: p.cost()[(i, j)].clone() };
            let rc = Lex {
                big: cost.big + basis.potentials[i].big - basis.potentials[m + j].big,
                small: cost.small + basis.potentials[i].small.clone() - basis.potentials[m + j].small.clone(),
            };
            let needed = match (basis.states[i * n + j], rc.big.cmp(&0)) {
                (ArcState::Lower, Ordering::Greater) => Some(-rc.small / T::from_int(rc.big)),
                (ArcState::Upper, Ordering::Less) => Some(rc.small / T::from_int(-rc.big)),
                _ => None,
            };
            if let Some(needed) = needed {
                big_m = T::max_of(big_m, needed);
            }
        }
    }
    let u: Vec<T> = (0..m).map(|i| basis.potentials[i].at(&big_m)).collect();
    let v: Vec<T> = (0..n).map(|j| -basis.potentials[m + j].at(&big_m)).collect();
    let w = Matrix::from_fn(m, n, |i, j| {
        T::min_of(T::zero(), p.cost()[(i, j)].clone() + u[i].clone() + v[j].clone())
    });
    Ok(DualCertificate { u, v, w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use crate::problem::{example_instance, Example, Provenance};
    use crate::scalar::Rational;
    use crate::solver::solve;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn zero_certificate_is_a_valid_bound() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let zero = DualCertificate::zeros(4, 4);
        assert_eq!(dual_objective(&ex.problem, &zero).unwrap(), q(0, 1));
    }

    #[test]
    fn positive_w_is_rejected_with_its_index() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let mut cert = DualCertificate::zeros(4, 4);
        cert.w[(2, 1)] = q(1, 1);
        match dual_objective(&ex.problem, &cert) {
            Err(Error::InfeasibleCertificate { i: 2, j: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn example1_certificate_at_n2() {
        let g = Grid1D::<Rational>::centered_unit(2).unwrap();
        let cert = build_example1_certificate(&g, &g);
        assert_eq!(cert.u, vec![q(-1, 32), q(-1, 32)]);
        assert_eq!(cert.v, vec![q(-1, 32), q(-1, 32)]);
        assert_eq!(cert.w[(0, 0)], q(-1, 16));
        assert_eq!(cert.w[(1, 1)], q(-1, 16));
        assert_eq!(cert.w[(0, 1)], q(0, 1));
        assert_eq!(cert.w[(1, 0)], q(0, 1));
    }

    #[test]
    fn example1_certificate_reduced_costs() {
        let g = Grid1D::<Rational>::centered_unit(6).unwrap();
        let ex = example_instance::<Rational>(&Example::Checkerboard, 6).unwrap();
        let cert = build_example1_certificate(&g, &g);
        let reduced = cert.reduced_costs(ex.problem.cost());
        let xs = g.midpoints();
        for (i, j, r) in reduced.iter_indexed() {
            let xy = xs[i].clone() * xs[j].clone();
            if xy.is_negative() {
                assert_eq!(*r, xy.abs());
            } else {
                assert_eq!(*r, q(0, 1));
            }
        }
    }

    #[test]
    fn zero_certificate_does_not_certify_an_optimum() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let r = solve(&ex.problem).unwrap();
        let report =
            check_optimality_pair(&ex.problem, &r.plan, &DualCertificate::zeros(4, 4), &q(0, 1)).unwrap();
        assert!(report.gap > q(0, 1));
        assert!(!report.certified);
    }

    #[test]
    fn extracted_dual_of_slack_instance_has_no_capacity_multipliers() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let p = ex.problem.with_capacity_scaled(&q(100, 1)).unwrap();
        let r = solve(&p).unwrap();
        let cert = r.dual.unwrap();
        assert!(cert.w.as_slice().iter().all(|w| w == &q(0, 1)));
        let report = check_optimality_pair(&p, &r.plan, &cert, &q(0, 1)).unwrap();
        assert!(report.certified);
    }

    #[test]
    fn infeasible_plan_is_rejected() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let zero = CandidatePlan::zeros(4, 4, Provenance::Constructed);
        let cert = DualCertificate::zeros(4, 4);
        assert!(matches!(
            check_optimality_pair(&ex.problem, &zero, &cert, &q(0, 1)),
            Err(Error::InfeasiblePlan(_))
        ));
    }
}
