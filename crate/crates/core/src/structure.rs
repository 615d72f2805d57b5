//! Cell classification of plans: empty, saturated or in between.
//!
//! A plan with no fractional cells equals the capacity times the indicator
//! of its support. The fraction of mass sitting in fractional cells is the
//! headline measure of how far a plan is from that bang-bang form.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::STRUCTURE_TOL;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::matrix::Matrix;
use crate::problem::{example_instance, CandidatePlan, DiscreteProblem, Example};
use crate::scalar::Scalar;
use crate::solver::{solve, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellClass {
    Zero,
    Saturated,
    Fractional,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CellCounts {
    pub zero: usize,
    pub saturated: usize,
    pub fractional: usize,
}

#[derive(Debug, Clone)]
pub struct StructureReport<T> {
    pub classes: Matrix<CellClass>,
    pub counts: CellCounts,
    pub fractional_mass: T,
    /// Cells classified saturated or fractional.
    pub support: Matrix<bool>,
    /// `1 - fractional_mass / total mass`.
    pub extremality_ratio: f64,
    pub tol: T,
}

/// Classifies each cell relative to its own capacity: zero when
/// `h <= tol * cap`, saturated when `h >= (1 - tol) * cap`, fractional
/// otherwise. Cells without capacity are zero.
pub fn classify_cells<T: Scalar>(
    p: &DiscreteProblem<T>,
    plan: &CandidatePlan<T>,
    tol: &T,
) -> Result<StructureReport<T>> {
    if plan.h.shape() != (p.rows(), p.cols()) {
        return Err(Error::Dimension(format!(
            "plan is {:?}, problem is {}x{}",
            plan.h.shape(),
            p.rows(),
            p.cols()
        )));
    }
    let mut counts = CellCounts::default();
    let mut fractional_mass = T::zero();
    let classes = Matrix::from_fn(p.rows(), p.cols(), |i, j| {
        let h = &plan.h[(i, j)];
        let cap = &p.capacity()[(i, j)];
        let class = if cap.is_zero() || *h <= tol.clone() * cap.clone() {
            CellClass::Zero
        } else if *h >= (T::one() - tol.clone()) * cap.clone() {
            CellClass::Saturated
        } else {
            CellClass::Fractional
        };
        match class {
            CellClass::Zero => counts.zero += 1,
            CellClass::Saturated => counts.saturated += 1,
            CellClass::Fractional => {
                counts.fractional += 1;
                fractional_mass = fractional_mass.clone() + h.clone();
            }
        }
        class
    });
    let support = classes.map(|c| *c != CellClass::Zero);
    let total = p.total_mass().to_f64();
    let extremality_ratio = if counts.fractional == 0 || total == 0.0 {
        1.0
    } else {
        (1.0 - fractional_mass.to_f64() / total).clamp(0.0, 1.0)
    };
    Ok(StructureReport { classes, counts, fractional_mass, support, extremality_ratio, tol: tol.clone() })
}

/// Plain PGM (`P2`, maxval 255): black for empty cells, mid-gray for
/// fractional ones, white for saturated ones. Image columns index `x`
/// (rows of the plan), image rows index `y`, smallest `y` first.
pub fn render_support_heatmap<T>(report: &StructureReport<T>) -> String {
    render_classes(&report.classes)
}

pub fn render_classes(classes: &Matrix<CellClass>) -> String {
    let (m, n) = classes.shape();
    let mut out = format!("P2\n{m} {n}\n255\n");
    for j in 0..n {
        let line: Vec<&str> = (0..m)
            .map(|i| match classes[(i, j)] {
                CellClass::Zero => "0",
                CellClass::Fractional => "128",
                CellClass::Saturated => "255",
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn emit_support_heatmap<T>(report: &StructureReport<T>, path: &Path) -> Result<()> {
    write_atomic(path, render_support_heatmap(report).as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub fractional_mass_fraction: f64,
    pub objective: f64,
    /// Cell classes of the optimal plan, for the support mask.
    #[serde(skip)]
    pub classes: Matrix<CellClass>,
}

/// Solves `example` at each grid size and records the fraction of mass in
/// fractional cells. Sizes are solved on separate threads.
pub fn extremality_convergence<T: Scalar>(example: &Example, sizes: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("sizes must be strictly increasing: {sizes:?}")));
    }
    if let Some(&odd) = sizes.iter().find(|&&n| n % 2 != 0) {
        return Err(Error::Divisibility { n: odd, divisor: 2 });
    }
    let results: Vec<Result<ConvergenceRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&n| scope.spawn(move || convergence_row::<T>(example, n)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence worker panicked")).collect()
    });
    results.into_iter().collect()
}

fn convergence_row<T: Scalar>(example: &Example, n: usize) -> Result<ConvergenceRow> {
    let ex = example_instance::<T>(example, n)?;
    let result = solve(&ex.problem)?;
    if let SolveStatus::Infeasible { deficit } = &result.status {
        return Err(Error::Infeasible { deficit: deficit.encode() });
    }
    let report = classify_cells(&ex.problem, &result.plan, &T::eps(STRUCTURE_TOL))?;
    Ok(ConvergenceRow {
        n,
        fractional_mass_fraction: report.fractional_mass.to_f64() / ex.problem.total_mass().to_f64(),
        objective: result.objective.to_f64(),
        classes: report.classes,
    })
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,fractional_mass_fraction,objective\n");
    for r in rows {
        let _ = writeln!(out, "{},{:?},{:?}", r.n, r.fractional_mass_fraction, r.objective);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Provenance;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn checkerboard_optimum_is_bang_bang() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 8).unwrap();
        let r = solve(&ex.problem).unwrap();
        let report = classify_cells(&ex.problem, &r.plan, &q(0, 1)).unwrap();
        assert_eq!(report.counts.fractional, 0);
        assert_eq!(report.extremality_ratio, 1.0);
        for (i, j, s) in report.support.iter_indexed() {
            assert_eq!(*s, (i < 4) == (j < 4));
        }
    }

    #[test]
    fn half_capacity_plan_is_all_fractional() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let half = CandidatePlan::new(ex.problem.capacity().map(|c| c / q(2, 1)), Provenance::Constructed);
        let report = classify_cells(&ex.problem, &half, &q(0, 1)).unwrap();
        assert_eq!(report.counts, CellCounts { zero: 0, saturated: 0, fractional: 16 });
        assert_eq!(report.extremality_ratio, 0.0);
    }

    #[test]
    fn zero_capacity_cells_are_zero() {
        let p = DiscreteProblem::new(
            Matrix::filled(1, 2, 1.0),
            vec![1.0],
            vec![0.0, 1.0],
            Matrix::from_rows(vec![vec![0.0, 2.0]]).unwrap(),
        )
        .unwrap();
        let plan = CandidatePlan::new(Matrix::from_rows(vec![vec![0.0, 1.0]]).unwrap(), Provenance::Constructed);
        let report = classify_cells(&p, &plan, &1e-6).unwrap();
        assert_eq!(report.classes[(0, 0)], CellClass::Zero);
        assert_eq!(report.classes[(0, 1)], CellClass::Fractional);
        assert!(!report.support[(0, 0)]);
        assert!(report.support[(0, 1)]);
    }

    #[test]
    fn heatmap_of_checkerboard_n4() {
        let ex = example_instance::<Rational>(&Example::Checkerboard, 4).unwrap();
        let report = classify_cells(&ex.problem, &ex.candidate, &q(0, 1)).unwrap();
        let pgm = render_support_heatmap(&report);
        assert_eq!(
            pgm,
            "P2\n4 4\n255\n255 255 0 0\n255 255 0 0\n0 0 255 255\n0 0 255 255\n"
        );
        let zero = CandidatePlan::zeros(4, 4, Provenance::Constructed);
        let blank = render_support_heatmap(&classify_cells(&ex.problem, &zero, &q(0, 1)).unwrap());
        assert!(blank.lines().skip(3).all(|l| l == "0 0 0 0"));
    }

    #[test]
    fn heatmap_file_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("support.pgm");
        let ex = example_instance::<f64>(&Example::Checkerboard, 4).unwrap();
        let report = classify_cells(&ex.problem, &ex.candidate, &1e-6).unwrap();
        emit_support_heatmap(&report, &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("P2\n4 4\n255\n"));
        assert!(emit_support_heatmap(&report, &dir.path().join("missing/dir/x.pgm")).is_err());
    }

    #[test]
    fn checkerboard_convergence_has_no_fractional_mass() {
        let rows = extremality_convergence::<Rational>(&Example::Checkerboard, &[4, 8, 16]).unwrap();
        assert!(rows.iter().all(|r| r.fractional_mass_fraction == 0.0));
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with("n,fractional_mass_fraction,objective\n4,0.0,"));
        assert!(extremality_convergence::<f64>(&Example::Checkerboard, &[8, 4]).is_err());
        assert!(extremality_convergence::<f64>(&Example::Checkerboard, &[3]).is_err());
    }
}
