//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Reference values that the library could simply echo back are recomputed
//! here by an independent quadrature (tensor Gauss-Legendre) before use.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use capot::config::STRUCTURE_TOL;
use capot::duality::dual_objective;
use capot::problem::{random_feasible_instance, RandomInstanceConfig};
use capot::prelude::*;
use capot::structure::{extremality_convergence, CellClass};
use capot::verify::coupling_bound;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const A1_MAX_RUNTIME: Duration = Duration::from_secs(1);
const A2_COST_TOL: f64 = 5e-3;
const A2_L1_SLACK: f64 = 1e-12;
const A2_QUADRATURE_TOL: f64 = 1e-14;
const A3_MAX_GAP_RATIO: f64 = 2.0;
const A4_OBJECTIVE_TOL: f64 = 1e-3;
const A5_MAX_RUNTIME: Duration = Duration::from_secs(10);

type Outcome = std::result::Result<String, String>;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Everything later criteria re-examine.
#[derive(Default)]
struct Record {
    /// `(label, m, n, fractional cells)` of every optimal vertex.
    vertices: Vec<(String, usize, usize, usize)>,
    exact: Vec<(String, DiscreteProblem<Rational>, SolveResult<Rational>)>,
}

impl Record {
    fn exact_solve(&mut self, label: String, p: &DiscreteProblem<Rational>) -> Result<SolveResult<Rational>, String> {
        let r = solve(p).map_err(|e| format!("{label}: {e}"))?;
        if !r.is_optimal() {
            return Err(format!("{label}: not optimal"));
        }
        self.vertices.push((label.clone(), p.rows(), p.cols(), r.stats.fractional_cells));
        self.exact.push((label, p.clone(), r.clone()));
        Ok(r)
    }

    fn float_solve(&mut self, label: String, p: &DiscreteProblem<f64>) -> Result<SolveResult<f64>, String> {
        let r = solve(p).map_err(|e| format!("{label}: {e}"))?;
        if !r.is_optimal() {
            return Err(format!("{label}: not optimal"));
        }
        self.vertices.push((label, p.rows(), p.cols(), r.stats.fractional_cells));
        Ok(r)
    }
}

/// Three-point Gauss-Legendre on `k x k` panels of a rectangle; exact for
/// polynomials of degree five in each variable.
fn gauss_2d(f: impl Fn(f64, f64) -> f64, (x0, x1): (f64, f64), (y0, y1): (f64, f64), k: usize) -> f64 {
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let (hx, hy) = ((x1 - x0) / k as f64, (y1 - y0) / k as f64);
    let mut total = 0.0;
    for a in 0..k {
        for b in 0..k {
            let (cx, cy) = (x0 + (a as f64 + 0.5) * hx, y0 + (b as f64 + 0.5) * hy);
            for (s, ws) in nodes.iter().zip(weights) {
                for (t, wt) in nodes.iter().zip(weights) {
                    total += ws * wt * f(cx + s * hx / 2.0, cy + t * hy / 2.0);
                }
            }
        }
    }
    total * hx * hy / 4.0
}

/// Transport cost of a plan with constant density on square tiles.
fn tile_cost(density: f64, tiles: &[(f64, f64)]) -> f64 {
    tiles
        .iter()
        .map(|&t| gauss_2d(|x, y| density * 0.5 * (x - y) * (x - y), t, t, 4))
        .sum()
}

fn a1(rec: &mut Record) -> Outcome {
    let start = Instant::now();
    let ex = example_instance::<Rational>(&Example::Checkerboard, 8).map_err(|e| e.to_string())?;
    let r = rec.exact_solve("A1 n=8".into(), &ex.problem)?;
    let elapsed = start.elapsed();
    if r.plan.h != ex.candidate.h {
        return Err("plan differs from the checkerboard".into());
    }
    let cap = q(2, 64);
    for (i, j, h) in r.plan.h.iter_indexed() {
        let expect = if (i < 4) == (j < 4) { cap.clone() } else { q(0, 1) };
        if *h != expect {
            return Err(format!("cell ({i}, {j}) = {h}, expected {expect}"));
        }
    }
    // c + u + v = -x y on every cell.
    let cert = build_example1_certificate(&ex.grid, &ex.grid);
    let xs = ex.grid.midpoints();
    for (i, j, c) in ex.problem.cost().iter_indexed() {
        if c.clone() + cert.u[i].clone() + cert.v[j].clone() != -(xs[i].clone() * xs[j].clone()) {
            return Err(format!("certificate identity fails at ({i}, {j})"));
        }
    }
    let report = check_optimality_pair(&ex.problem, &r.plan, &cert, &q(0, 1)).map_err(|e| e.to_string())?;
    if !report.gap.is_zero() || !report.certified {
        return Err(format!("gap {} certified {}", report.gap, report.certified));
    }
    if r.stats.fractional_cells != 0 {
        return Err(format!("{} fractional cells", r.stats.fractional_cells));
    }
    if elapsed > A1_MAX_RUNTIME {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("objective {} gap 0, fractional 0, {elapsed:.1?}", r.objective))
}

fn sci(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn a2(rec: &mut Record) -> Outcome {
    let reference = tile_cost(2.0, &[(-0.5, 0.0), (0.0, 0.5)]);
    if (reference - 1.0 / 48.0).abs() > A2_QUADRATURE_TOL {
        return Err(format!("quadrature gives {reference}, not 1/48"));
    }
    let mut errors = Vec::new();
    let mut l1s = Vec::new();
    for n in [16, 32, 64] {
        let ex = example_instance::<f64>(&Example::Checkerboard, n).map_err(|e| e.to_string())?;
        let r = rec.float_solve(format!("A2 n={n}"), &ex.problem)?;
        let err = (r.objective - reference).abs();
        if err > A2_COST_TOL {
            return Err(format!("n={n}: |objective - 1/48| = {err:.3e}"));
        }
        let l1: f64 = r.plan.h.as_slice().iter().zip(ex.candidate.h.as_slice()).map(|(a, b)| (a - b).abs()).sum();
        errors.push(err);
        l1s.push(l1);
    }
    if errors.windows(2).any(|w| w[1] >= w[0]) {
        return Err(format!("cost error not decreasing: {}", sci(&errors)));
    }
    if l1s.windows(2).any(|w| w[1] > w[0] + A2_L1_SLACK) {
        return Err(format!("L1 distance increasing: {}", sci(&l1s)));
    }
    Ok(format!("|obj - 1/48| = {}, L1 = {}", sci(&errors), sci(&l1s)))
}

fn a3(rec: &mut Record) -> Outcome {
    let reference = tile_cost(4.0, &[(-0.5, -0.25), (-0.25, 0.0), (0.0, 0.25), (0.25, 0.5)]);
    if (reference - 1.0 / 192.0).abs() > A2_QUADRATURE_TOL {
        return Err(format!("quadrature gives {reference}, not 1/192"));
    }
    let mut gaps = Vec::new();
    let mut detail = Vec::new();
    for n in [16, 32, 64] {
        let ex = example_instance::<Rational>(&Example::FourTiles, n).map_err(|e| e.to_string())?;
        let candidate_cost = ex.problem.objective(&ex.candidate.h);
        let r = rec.exact_solve(format!("A3 n={n}"), &ex.problem)?;
        let gap = candidate_cost.clone() - r.objective.clone();
        if !gap.is_positive() {
            return Err(format!("n={n}: optimum {} not below candidate {candidate_cost}", r.objective));
        }
        let cycle = find_improving_cycle(&ex.problem, &ex.candidate, &q(0, 1)).map_err(|e| e.to_string())?;
        let Some(cycle) = cycle else {
            return Err(format!("n={n}: no improving cycle for the candidate"));
        };
        if find_improving_cycle(&ex.problem, &r.plan, &q(0, 1)).map_err(|e| e.to_string())?.is_some() {
            return Err(format!("n={n}: improving cycle found for the optimum"));
        }
        detail.push(format!("n={n} gap {:.3e} cycle len {}", gap.to_f64(), cycle.arcs.len()));
        gaps.push(gap.to_f64());
    }
    for w in gaps.windows(2) {
        let ratio = w[0].max(w[1]) / w[0].min(w[1]);
        if ratio >= A3_MAX_GAP_RATIO {
            return Err(format!("gap ratio {ratio:.3} between consecutive sizes"));
        }
    }
    Ok(format!("candidate limit 1/192; {}", detail.join(", ")))
}

fn a4(rec: &mut Record) -> Outcome {
    let n = 64;
    let hbar = 2.0;
    let ex = example_instance::<f64>(&Example::Strip { hbar: q(2, 1) }, n).map_err(|e| e.to_string())?;
    let r = rec.float_solve("A4 n=64".into(), &ex.problem)?;
    let candidate_cost = ex.problem.objective(&ex.candidate.h);
    let diff = (r.objective - candidate_cost).abs();
    if diff > A4_OBJECTIVE_TOL {
        return Err(format!("solver {} vs strip {candidate_cost}: diff {diff:.3e}", r.objective));
    }
    // Perpendicular offset from the diagonal on the periodic square.
    let width = 1.0 / (hbar * 2f64.sqrt());
    let limit = width / 2.0 + 2.0 / n as f64;
    let report = classify_cells(&ex.problem, &r.plan, &STRUCTURE_TOL).map_err(|e| e.to_string())?;
    let xs = ex.grid.midpoints();
    let mut worst: f64 = 0.0;
    for (i, j, class) in report.classes.iter_indexed() {
        if *class != CellClass::Saturated {
            continue;
        }
        let d = xs[j] - xs[i];
        let folded = d - (d + 0.5).floor();
        let offset = folded.abs() / 2f64.sqrt();
        worst = worst.max(offset);
        if offset > limit + 1e-12 {
            return Err(format!("saturated cell ({i}, {j}) at offset {offset:.4} > {limit:.4}"));
        }
    }
    Ok(format!("objective diff {diff:.2e}, max saturated offset {worst:.4} <= {limit:.4}"))
}

fn random_shape(seed: u64, max: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (rng.gen_range(1..=max), rng.gen_range(1..=max))
}

fn random_exact(seed: u64, max: usize) -> Result<DiscreteProblem<Rational>, String> {
    let (m, n) = random_shape(seed, max);
    random_feasible_instance(&RandomInstanceConfig::new(m, n), seed).map_err(|e| e.to_string())
}

fn a5(rec: &mut Record) -> Outcome {
    let start = Instant::now();
    for seed in 0..50 {
        let p = random_exact(seed, 6)?;
        let fast = rec.exact_solve(format!("A5 seed={seed}"), &p)?;
        let dense = oracle_solve(&p).map_err(|e| e.to_string())?;
        if !dense.is_optimal() || dense.objective != fast.objective {
            return Err(format!("seed {seed}: simplex {} vs oracle {}", fast.objective, dense.objective));
        }
    }
    let elapsed = start.elapsed();
    if elapsed > A5_MAX_RUNTIME {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("50 instances agree exactly, {elapsed:.1?}"))
}

fn a6(rec: &mut Record) -> Outcome {
    for seed in 100..200 {
        let p = random_exact(seed, 8)?;
        rec.exact_solve(format!("A6 seed={seed}"), &p)?;
    }
    for (label, m, n, fractional) in &rec.vertices {
        if *fractional + 1 > m + n {
            return Err(format!("{label}: {fractional} fractional cells > m + n - 1 = {}", m + n - 1));
        }
    }
    let rows = extremality_convergence::<Rational>(&Example::FourTiles, &[8, 16, 32]).map_err(|e| e.to_string())?;
    let fractions: Vec<f64> = rows.iter().map(|r| r.fractional_mass_fraction).collect();
    if fractions.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("fractional mass fraction increases: {fractions:?}"));
    }
    Ok(format!("{} vertices within bound; fractional mass {fractions:?}", rec.vertices.len()))
}

fn random_subset(rng: &mut ChaCha8Rng, len: usize) -> Vec<usize> {
    let mut picked: Vec<usize> = (0..len).filter(|_| rng.gen_bool(0.5)).collect();
    if picked.is_empty() {
        picked.push(rng.gen_range(0..len));
    }
    picked
}

fn a7(rec: &mut Record) -> Outcome {
    for seed in 300..320 {
        let p = random_exact(seed, 6)?;
        let r = rec.exact_solve(format!("A7 seed={seed}"), &p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_subset(&mut rng, p.rows());
        let cols = random_subset(&mut rng, p.cols());
        let outcome = restriction_test(&p, &r, &rows, &cols).map_err(|e| e.to_string())?;
        if !outcome.passed || outcome.restricted_cost != outcome.resolved_cost {
            return Err(format!(
                "seed {seed}: restricted {} vs re-solved {}",
                outcome.restricted_cost, outcome.resolved_cost
            ));
        }
    }
    Ok("20 restrictions re-solve to equal cost".into())
}

fn signed_vector(rng: &mut ChaCha8Rng, len: usize, eps: &Rational) -> Vec<Rational> {
    (0..len).map(|_| eps.clone() * q(rng.gen_range(-999..=999), 2000)).collect()
}

fn a8(_rec: &mut Record) -> Outcome {
    let mut tightest: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 800);
        let eps = q(rng.gen_range(1..=20), 10);
        let (nx, ny) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let (f, g) = loop {
            let f = signed_vector(&mut rng, nx, &eps);
            let mut g = signed_vector(&mut rng, ny, &eps);
            let shift = (f.iter().sum::<Rational>() - g.iter().sum::<Rational>()) / q(ny as i64, 1);
            g.iter_mut().for_each(|v| *v += &shift);
            if g.iter().all(|v| v.abs() < eps) {
                break (f, g);
            }
        };
        let h = build_coupling(&f, &g, &eps).map_err(|e| format!("seed {seed}: {e}"))?;
        let plan = CandidatePlan::new(h, Provenance::Constructed);
        if plan.row_sums() != f || plan.col_sums() != g {
            return Err(format!("seed {seed}: marginals not reproduced"));
        }
        let sup = plan.h.as_slice().iter().map(|v| v.abs()).max().expect("non-empty");
        let bound = coupling_bound(&eps, nx, ny);
        if sup >= bound {
            return Err(format!("seed {seed}: sup {sup} >= bound {bound}"));
        }
        tightest = tightest.max((sup / bound).to_f64());
    }
    Ok(format!("100 couplings, max sup/bound {tightest:.3}"))
}

fn a9(rec: &mut Record) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for seed in 0..100u64 {
        let p = random_exact(seed + 900, 6)?;
        // Optimal plan for a perturbed cost: feasible here, rarely optimal.
        let noisy = Matrix::from_fn(p.rows(), p.cols(), |i, j| p.cost()[(i, j)].clone() + q(rng.gen_range(-40..=40), 4));
        let other = DiscreteProblem::new(noisy, p.f().to_vec(), p.g().to_vec(), p.capacity().clone())
            .map_err(|e| e.to_string())?;
        let plan = solve(&other).map_err(|e| e.to_string())?.plan;
        let u: Vec<Rational> = (0..p.rows()).map(|_| q(rng.gen_range(-80..=80), 8)).collect();
        let v: Vec<Rational> = (0..p.cols()).map(|_| q(rng.gen_range(-80..=80), 8)).collect();
        let w = Matrix::from_fn(p.rows(), p.cols(), |i, j| {
            let r = p.cost()[(i, j)].clone() + u[i].clone() + v[j].clone();
            if r.is_negative() {
                r
            } else {
                q(0, 1)
            }
        });
        let cert = DualCertificate { u, v, w };
        let dual = dual_objective(&p, &cert).map_err(|e| e.to_string())?;
        let primal = p.objective(&plan.h);
        if primal < dual {
            return Err(format!("seed {seed}: primal {primal} < dual {dual}"));
        }
    }
    for (label, p, r) in &rec.exact {
        let dual = r.dual.as_ref().ok_or_else(|| format!("{label}: no dual"))?;
        let report = check_optimality_pair(p, &r.plan, dual, &q(0, 1)).map_err(|e| format!("{label}: {e}"))?;
        if !report.certified || !report.gap.is_zero() {
            return Err(format!("{label}: gap {}", report.gap));
        }
        let base = dual_objective(p, dual).map_err(|e| e.to_string())?;
        for s in [q(1, 3), q(-7, 2), q(1000, 1)] {
            if dual_objective(p, &dual.shifted(&s)).map_err(|e| e.to_string())? != base {
                return Err(format!("{label}: dual value changes under shift {s}"));
            }
        }
    }
    Ok(format!("weak duality on 100 pairs; {} exact solves certified with gap 0", rec.exact.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn(&mut Record) -> Outcome); 9] =
        [("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8), ("A9", a9)];
    let mut rec = Record::default();
    let mut failed = 0;
    for (name, check) in criteria {
        match check(&mut rec) {
            Ok(detail) => println!("{name} pass: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{name} FAIL: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
