use std::path::{Path, PathBuf};

use capot::config::{GAP_REL_TOL, NONDEGENERACY_THRESHOLD, STRUCTURE_TOL};
use capot::costs::sample_nondegeneracy;
use capot::grid::CostSpec;
use capot::io::{self, CheckResult, VerificationReport};
use capot::prelude::*;
use capot::problem::{random_feasible_instance, RandomInstanceConfig};
use capot::scalar::{convert, parse_rational};
use capot::structure::{convergence_csv, emit_support_heatmap, extremality_convergence, render_classes, CellClass};
use capot::{Error, Result};
use serde_json::{json, Value};

use crate::{Common, ExampleArgs, Verdict};

macro_rules! dispatch {
    ($mode:expr, $f:ident($($arg:expr),*)) => {
        match $mode {
            Mode::Exact => $f::<Rational>($($arg),*),
            Mode::Float => $f::<f64>($($arg),*),
        }
    };
}

fn output_dir(common: &Common) -> Result<Option<&Path>> {
    match &common.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

/// `--tol` if given, else zero in exact mode and `1e-9 * scale` in float mode.
fn tolerance<T: Scalar>(common: &Common, scale: f64) -> Result<T> {
    let tol = match &common.tol {
        Some(text) => T::parse(text)?,
        None => T::eps(GAP_REL_TOL * scale.max(1.0)),
    };
    if tol.is_negative() {
        return Err(Error::InvalidArgument(format!("tolerance {tol} is negative")));
    }
    Ok(tol)
}

fn problem_scale<T: Scalar>(p: &DiscreteProblem<T>) -> f64 {
    p.cost_scale() * p.total_mass().to_f64().abs()
}

fn emit(report: &VerificationReport, dir: Option<&Path>, file: &str) -> Result<Verdict> {
    println!("{}", report.to_json());
    if let Some(dir) = dir {
        report.write(&dir.join(file))?;
    }
    Ok(match report.result {
        CheckResult::Pass => Verdict::Pass,
        CheckResult::Fail => Verdict::Fail,
    })
}

fn encode_cells(cells: &[(usize, usize)]) -> Value {
    json!(cells.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>())
}

pub fn solve(common: &Common, input: &Path) -> Result<Verdict> {
    dispatch!(common.mode, solve_as(common, input))
}

fn solve_as<T: Scalar>(common: &Common, input: &Path) -> Result<Verdict> {
    let p = io::read_problem::<T>(input)?;
    let r = capot::solver::solve(&p)?;
    let summary = io::solve_result_to_json(&p, &r);
    println!("{summary}");
    if let Some(dir) = output_dir(common)? {
        io::write_plan(&r.plan, &dir.join("plan.csv"))?;
        io::write_atomic(&dir.join("result.json"), summary.as_bytes())?;
        if let Some(cert) = &r.dual {
            io::write_certificate(cert, &dir.join("certificate.json"))?;
        }
    }
    Ok(if r.is_optimal() { Verdict::Pass } else { Verdict::Infeasible })
}

pub fn verify_certificate(common: &Common, input: &Path, plan: &Path, certificate: &Path) -> Result<Verdict> {
    dispatch!(common.mode, verify_as(common, input, plan, certificate))
}

fn verify_as<T: Scalar>(common: &Common, input: &Path, plan_path: &Path, cert_path: &Path) -> Result<Verdict> {
    let p = io::read_problem::<T>(input)?;
    let plan = io::read_plan::<T>(plan_path, p.rows(), p.cols())?;
    let cert = io::read_certificate::<T>(cert_path)?;
    let tol = tolerance::<T>(common, problem_scale(&p))?;
    let (result, witness) = match check_optimality_pair(&p, &plan, &cert, &tol) {
        Ok(r) => (
            CheckResult::from_bool(r.certified),
            json!({
                "primal": r.primal.encode(),
                "dual": r.dual.encode(),
                "gap": r.gap.encode(),
                "transport_violations": encode_cells(&r.transport_violations),
                "saturation_violations": encode_cells(&r.saturation_violations),
                "tol": tol.encode(),
            }),
        ),
        Err(Error::InfeasibleCertificate { i, j, reason }) => {
            (CheckResult::Fail, json!({ "infeasible_certificate": [i, j], "reason": reason }))
        }
        Err(Error::InfeasiblePlan(reason)) => (CheckResult::Fail, json!({ "infeasible_plan": reason })),
        Err(e) => return Err(e),
    };
    let report = VerificationReport {
        check: "optimality-pair".into(),
        instance: input.display().to_string(),
        result,
        witness,
    };
    emit(&report, output_dir(common)?, "verification.json")
}

pub fn analyze(common: &Common, input: &Path, plan: Option<&Path>) -> Result<Verdict> {
    dispatch!(common.mode, analyze_as(common, input, plan))
}

fn analyze_as<T: Scalar>(common: &Common, input: &Path, plan_path: Option<&Path>) -> Result<Verdict> {
    let p = io::read_problem::<T>(input)?;
    let plan = match plan_path {
        Some(path) => io::read_plan::<T>(path, p.rows(), p.cols())?,
        None => {
            let r = capot::solver::solve(&p)?;
            if let SolveStatus::Infeasible { deficit } = r.status {
                return Err(Error::Infeasible { deficit: deficit.encode() });
            }
            r.plan
        }
    };
    let tol = match &common.tol {
        Some(text) => T::parse(text)?,
        None => T::eps(STRUCTURE_TOL),
    };
    let report = classify_cells(&p, &plan, &tol)?;
    let summary = json!({
        "counts": report.counts,
        "fractional_mass": report.fractional_mass.encode(),
        "extremality_ratio": report.extremality_ratio,
        "vertex_bound": (p.rows() + p.cols()).saturating_sub(1),
        "tol": tol.encode(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    println!("{text}");
    if let Some(dir) = output_dir(common)? {
        io::write_atomic(&dir.join("structure.json"), text.as_bytes())?;
        emit_support_heatmap(&report, &dir.join("support.pgm"))?;
    }
    Ok(Verdict::Pass)
}

fn example_of(which: u8, args: &ExampleArgs) -> Result<Example> {
    let hbar = args.hbar.as_deref().map(parse_rational).transpose()?;
    if hbar.is_some() && which != 3 {
        return Err(Error::InvalidArgument("--hbar only applies to example 3".into()));
    }
    Example::from_number(which, hbar)
}

pub fn example(common: &Common, which: u8, args: &ExampleArgs) -> Result<Verdict> {
    let ex = example_of(which, args)?;
    dispatch!(common.mode, example_as(common, &ex, args.grid_n))
}

fn example_as<T: Scalar>(common: &Common, which: &Example, n: usize) -> Result<Verdict> {
    let ex = example_instance::<T>(which, n)?;
    let p = &ex.problem;
    let r = capot::solver::solve(p)?;
    if let SolveStatus::Infeasible { deficit } = &r.status {
        return Err(Error::Infeasible { deficit: deficit.encode() });
    }
    let tol = tolerance::<T>(common, problem_scale(p))?;
    let candidate_cost = p.objective(&ex.candidate.h);
    let spec = match which {
        Example::Strip { .. } => CostSpec::PeriodicQuadratic,
        _ => CostSpec::Quadratic,
    };
    let step = 0.25 / n as f64;
    let nondegeneracy = sample_nondegeneracy(&spec, &ex.grid, &ex.grid, step, NONDEGENERACY_THRESHOLD)?;

    let mut degeneracy = serde_json::to_value(&nondegeneracy.verdict).expect("verdict serializes");
    degeneracy["min_abs_estimate"] = json!(nondegeneracy.min_abs_estimate);
    degeneracy["step"] = json!(nondegeneracy.step);
    let mut witness = json!({
        "n": n,
        "mode": T::MODE.to_string(),
        "objective": r.objective.encode(),
        "candidate_objective": candidate_cost.encode(),
        "fractional_cells": r.stats.fractional_cells,
        "pivots": r.stats.pivots,
        "nondegeneracy": degeneracy,
    });
    let extra = witness.as_object_mut().expect("object");
    let passed = match which {
        Example::Checkerboard => {
            let cert = build_example1_certificate(&ex.grid, &ex.grid);
            let pair = check_optimality_pair(p, &r.plan, &cert, &tol)?;
            // Midpoint sums over the two tiles: 1/48 - 1/(12 n^2).
            let expected = T::from_ratio(1, 48) - T::from_ratio(1, 12 * (n * n) as i64);
            let objective_ok = (r.objective.clone() - expected.clone()).abs() <= tol;
            let deviation = r
                .plan
                .h
                .as_slice()
                .iter()
                .zip(ex.candidate.h.as_slice())
                .fold(T::zero(), |acc, (a, b)| T::max_of(acc, (a.clone() - b.clone()).abs()));
            let plan_ok = deviation <= tol;
            extra.insert("expected_objective".into(), json!(expected.encode()));
            extra.insert("continuum_objective".into(), json!("1/48"));
            extra.insert("gap".into(), json!(pair.gap.encode()));
            extra.insert("certified".into(), json!(pair.certified));
            extra.insert("max_deviation_from_checkerboard".into(), json!(deviation.encode()));
            pair.certified && objective_ok && plan_ok && r.stats.fractional_cells == 0
        }
        Example::FourTiles => {
            let gap = candidate_cost.clone() - r.objective.clone();
            let cycle = find_improving_cycle(p, &ex.candidate, &tol)?;
            extra.insert("continuum_candidate_objective".into(), json!("1/192"));
            extra.insert("gap".into(), json!(gap.encode()));
            match &cycle {
                Some(c) => {
                    extra.insert(
                        "improving_cycle".into(),
                        json!({
                            "nodes": c.node_labels(),
                            "arcs": c.arcs,
                            "signed_cost": c.signed_cost.encode(),
                            "max_push": c.max_push.encode(),
                        }),
                    );
                }
                None => {
                    extra.insert("improving_cycle".into(), Value::Null);
                }
            }
            gap > tol && cycle.is_some()
        }
        Example::Strip { hbar } => {
            let diff = (r.objective.clone() - candidate_cost.clone()).abs().to_f64();
            let hbar = hbar.to_f64();
            let limit = 1.0 / (2.0 * hbar * 2f64.sqrt()) + 2.0 / n as f64;
            let report = classify_cells(p, &r.plan, &T::eps(STRUCTURE_TOL))?;
            let xs: Vec<f64> = ex.grid.midpoints().iter().map(Scalar::to_f64).collect();
            let outside: Vec<(usize, usize)> = report
                .classes
                .iter_indexed()
                .filter(|(i, j, c)| {
                    let d = xs[*j] - xs[*i];
                    **c == CellClass::Saturated && (d - (d + 0.5).floor()).abs() / 2f64.sqrt() > limit + 1e-12
                })
                .map(|(i, j, _)| (i, j))
                .collect();
            extra.insert("objective_difference".into(), json!(diff));
            extra.insert("support_limit".into(), json!(limit));
            extra.insert("saturated_outside_strip".into(), encode_cells(&outside));
            diff <= 1e-3 && outside.is_empty()
        }
    };

    if let Some(dir) = output_dir(common)? {
        io::write_plan(&r.plan, &dir.join("plan.csv"))?;
        io::write_plan(&ex.candidate, &dir.join("candidate.csv"))?;
        io::write_problem(p, &dir.join("problem.json"))?;
        if let Some(cert) = &r.dual {
            io::write_certificate(cert, &dir.join("certificate.json"))?;
        }
        let structure = classify_cells(p, &r.plan, &T::eps(STRUCTURE_TOL))?;
        emit_support_heatmap(&structure, &dir.join("support.pgm"))?;
    }
    let report = VerificationReport {
        check: format!("example-{}", which.number()),
        instance: format!("example {} n={n}", which.number()),
        result: CheckResult::from_bool(passed),
        witness,
    };
    emit(&report, output_dir(common)?, "report.json")
}

pub fn oracle_compare(common: &Common, seed: u64, count: u64, max_size: usize) -> Result<Verdict> {
    dispatch!(common.mode, oracle_compare_as(common, seed, count, max_size))
}

fn oracle_compare_as<T: Scalar>(common: &Common, seed: u64, count: u64, max_size: usize) -> Result<Verdict> {
    let run = |k: u64| -> Result<Option<Value>> {
        let s = seed.wrapping_add(k);
        let m = 1 + (s % max_size as u64) as usize;
        let n = 1 + ((s / max_size as u64) % max_size as u64) as usize;
        let exact = random_feasible_instance::<Rational>(&RandomInstanceConfig::new(m, n), s)?;
        let reference = oracle_solve(&exact)?.objective;
        let p = random_feasible_instance::<T>(&RandomInstanceConfig::new(m, n), s)?;
        let r = capot::solver::solve(&p)?;
        let tol = tolerance::<T>(common, reference.to_f64().abs())?;
        let agree = r.is_optimal() && (r.objective.clone() - convert::<Rational, T>(&reference)).abs() <= tol;
        Ok((!agree).then(|| {
            json!({ "seed": s, "m": m, "n": n, "simplex": r.objective.encode(), "oracle": reference.to_string() })
        }))
    };
    let results: Vec<Result<Option<Value>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..count).map(|k| scope.spawn(move || run(k))).collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect()
    });
    let mut mismatches = Vec::new();
    for r in results {
        if let Some(m) = r? {
            mismatches.push(m);
        }
    }
    let report = VerificationReport {
        check: "oracle-compare".into(),
        instance: format!("{count} random instances from seed {seed}, sizes up to {max_size}"),
        result: CheckResult::from_bool(mismatches.is_empty()),
        witness: json!({ "mismatches": mismatches }),
    };
    emit(&report, output_dir(common)?, "oracle_compare.json")
}

pub fn convergence(common: &Common, which: u8, args: &ExampleArgs, sizes: &[usize]) -> Result<Verdict> {
    let ex = example_of(which, args)?;
    dispatch!(common.mode, convergence_as(common, &ex, sizes))
}

fn convergence_as<T: Scalar>(common: &Common, which: &Example, sizes: &[usize]) -> Result<Verdict> {
    let rows = extremality_convergence::<T>(which, sizes)?;
    let csv = convergence_csv(&rows);
    print!("{csv}");
    if let Some(dir) = output_dir(common)? {
        io::write_atomic(&dir.join("convergence.csv"), csv.as_bytes())?;
        for row in &rows {
            let name: PathBuf = format!("support_n{}.pgm", row.n).into();
            io::write_atomic(&dir.join(name), render_classes(&row.classes).as_bytes())?;
        }
    }
    let non_increasing = rows.windows(2).all(|w| w[1].fractional_mass_fraction <= w[0].fractional_mass_fraction);
    Ok(if non_increasing { Verdict::Pass } else { Verdict::Fail })
}
