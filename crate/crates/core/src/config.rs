//! Float-mode tolerances. Exact mode ignores all of them.

/// Relative feasibility / optimality tolerance of the network simplex.
pub const SOLVER_REL_TOL: f64 = 1e-9;

/// Relative gap tolerance when certifying a primal/dual pair.
pub const GAP_REL_TOL: f64 = 1e-9;

/// Absolute tolerance for dual certificate feasibility.
pub const CERTIFICATE_ABS_TOL: f64 = 1e-12;

/// Relative mismatch between the marginal totals above which the smaller
/// marginal is rescaled.
pub const BALANCE_REL_TOL: f64 = 1e-12;

/// Default cell classification tolerance, relative to cell capacity.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Default threshold for the mixed-derivative non-degeneracy sampler.
pub const NONDEGENERACY_THRESHOLD: f64 = 1e-6;

/// Largest numerator+denominator bit length tolerated in exact mode.
pub const MAX_EXACT_BITS: u64 = 1 << 14;

/// Largest instance (`m * n`) accepted by the dense oracle.
pub const ORACLE_MAX_CELLS: usize = 64;
