//! Capacity-constrained optimal transport on grids.
//!
//! Given marginal masses `f`, `g`, a cost matrix `c` and a per-cell
//! capacity matrix, find the plan `h` with `0 <= h <= capacity`, row sums
//! `f` and column sums `g` that minimizes `sum c h`. Everything is generic
//! over [`Scalar`]: `Rational` for exact answers, `f64` for speed.
//!
//! ```
//! use capot::prelude::*;
//!
//! let ex = example_instance::<Rational>(&Example::Checkerboard, 8)?;
//! let result = solve(&ex.problem)?;
//! assert_eq!(result.plan.h, ex.candidate.h);
//!
//! let cert = build_example1_certificate(&ex.grid, &ex.grid);
//! let report = check_optimality_pair(&ex.problem, &result.plan, &cert, &Rational::from_int(0))?;
//! assert!(report.certified);
//! # Ok::<(), capot::Error>(())
//! ```
//!
//! The `book/` directory next to the crates walks through the model,
//! solver, certificates and structure checks; its code listings are
//! compiled as doc-tests of this crate.

pub mod config;
pub mod costs;
pub mod duality;
pub mod error;
pub mod grid;
pub mod io;
pub mod matrix;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{Mode, Rational, Scalar};

pub mod prelude {
    pub use crate::duality::{
        build_example1_certificate, check_optimality_pair, dual_objective, extract_dual, DualCertificate,
    };
    pub use crate::grid::{CostSpec, Grid1D};
    pub use crate::matrix::Matrix;
    pub use crate::problem::{
        check_feasibility, example_instance, validate_plan, CandidatePlan, DiscreteProblem, Example, Feasibility,
        Provenance,
    };
    pub use crate::scalar::{Mode, Rational, Scalar};
    pub use crate::solver::{oracle_solve, solve, SolveResult, SolveStatus};
    pub use crate::structure::{classify_cells, StructureReport};
    pub use crate::verify::{apply_cycle, build_coupling, find_improving_cycle, restriction_test};
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/discretization.md")]
    mod discretization {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/structure.md")]
    mod structure {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/examples.md")]
    mod examples {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
