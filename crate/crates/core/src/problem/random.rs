use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::matrix::Matrix;
use crate::problem::DiscreteProblem;
use crate::scalar::{convert, Rational, Scalar};

/// Knobs for seeded random rational instances.
#[derive(Debug, Clone)]
pub struct RandomInstanceConfig {
    pub rows: usize,
    pub cols: usize,
    /// Costs are integers in `0..=max_cost` divided by `denominator`.
    pub max_cost: i64,
    /// Hidden-plan entries are integers in `0..=max_mass` over `denominator`.
    pub max_mass: i64,
    pub max_slack: i64,
    pub denominator: i64,
    /// Probability that a cell's capacity equals the hidden plan exactly.
    pub tight_probability: f64,
    /// When false, capacities are drawn independently of the marginals and
    /// the instance may be infeasible.
    pub guarantee_feasible: bool,
}

impl RandomInstanceConfig {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            max_cost: 20,
            max_mass: 6,
            max_slack: 4,
            denominator: 4,
            tight_probability: 0.4,
            guarantee_feasible: true,
        }
    }
}

/// Draws an instance from a hidden non-negative plan: its row and column
/// sums become the marginals and capacities sit on or above it, so the
/// instance is feasible by construction.
pub fn random_feasible_instance<T: Scalar>(config: &RandomInstanceConfig, seed: u64) -> Result<DiscreteProblem<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n, den) = (config.rows, config.cols, config.denominator);
    let q = |v: i64| Rational::from_ratio(v, den);

    let cost = Matrix::from_fn(m, n, |_, _| q(rng.gen_range(0..=config.max_cost)));
    let hidden = Matrix::from_fn(m, n, |_, _| rng.gen_range(0..=config.max_mass));
    let capacity = if config.guarantee_feasible {
        hidden.map(|&h| {
            if rng.gen_bool(config.tight_probability) {
                q(h)
            } else {
                q(h + rng.gen_range(0..=config.max_slack))
            }
        })
    } else {
        Matrix::from_fn(m, n, |_, _| q(rng.gen_range(0..=config.max_mass)))
    };
    let f: Vec<Rational> = (0..m).map(|i| q(hidden.row(i).iter().sum())).collect();
    let g: Vec<Rational> = (0..n).map(|j| q((0..m).map(|i| hidden[(i, j)]).sum())).collect();

    let to_t = |v: &Rational| convert::<Rational, T>(v);
    DiscreteProblem::new(cost.map(to_t), f.iter().map(to_t).collect(), g.iter().map(to_t).collect(), capacity.map(to_t))
}
