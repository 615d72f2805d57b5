//! File formats.
//!
//! * Problems: JSON `{"m", "n", "f", "g", "cost", "capacity"}`. Numbers are
//!   strings (`"3/8"`, `"0.25"`, `"1e-3"`) or plain JSON numbers; they are
//!   parsed by the scalar type, so a decimal read in exact mode is exact.
//! * Plans: CSV with header `i,j,mass`, one row per nonzero cell.
//! * Certificates: JSON `{"u", "v", "w"}`.
//! * Solve results and verification reports: JSON, write-only.
//!
//! Every writer goes through [`write_atomic`].

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::duality::DualCertificate;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::problem::{CandidatePlan, DiscreteProblem, Provenance};
use crate::scalar::Scalar;
use crate::solver::{SolveResult, SolveStats, SolveStatus};

/// Writes to a temporary file in the target directory, then renames it
/// over `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Text(String),
    Number(serde_json::Number),
}

impl Num {
    fn parse<T: Scalar>(&self) -> Result<T> {
        match self {
            Num::Text(s) => T::parse(s),
            Num::Number(n) => T::parse(&n.to_string()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    m: usize,
    n: usize,
    f: Vec<Num>,
    g: Vec<Num>,
    cost: Vec<Vec<Num>>,
    capacity: Vec<Vec<Num>>,
}

#[derive(Serialize)]
struct ProblemOut {
    m: usize,
    n: usize,
    f: Vec<String>,
    g: Vec<String>,
    cost: Vec<Vec<String>>,
    capacity: Vec<Vec<String>>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CertificateFile<N> {
    u: Vec<N>,
    v: Vec<N>,
    w: Vec<Vec<N>>,
}

fn json_error(e: serde_json::Error) -> Error {
    if e.is_io() {
        Error::Io(e.into())
    } else {
        Error::Parse(e.to_string())
    }
}

fn parse_vec<T: Scalar>(values: &[Num]) -> Result<Vec<T>> {
    values.iter().map(Num::parse).collect()
}

fn parse_matrix<T: Scalar>(rows: &[Vec<Num>], what: &str, m: usize, n: usize) -> Result<Matrix<T>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!("{what} must be {m}x{n}")));
    }
    let parsed = rows.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(parsed)
}

fn encode_vec<T: Scalar>(values: &[T]) -> Vec<String> {
    values.iter().map(Scalar::encode).collect()
}

fn encode_matrix<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| encode_vec(r)).collect()
}

pub fn parse_problem<T: Scalar>(text: &str) -> Result<DiscreteProblem<T>> {
    let file: ProblemFile = serde_json::from_str(text).map_err(json_error)?;
    if file.f.len() != file.m || file.g.len() != file.n {
        return Err(Error::Dimension(format!(
            "declared {}x{} but |f| = {}, |g| = {}",
            file.m,
            file.n,
            file.f.len(),
            file.g.len()
        )));
    }
    let cost = parse_matrix(&file.cost, "cost", file.m, file.n)?;
    let capacity = parse_matrix(&file.capacity, "capacity", file.m, file.n)?;
    DiscreteProblem::new(cost, parse_vec(&file.f)?, parse_vec(&file.g)?, capacity)
}

pub fn read_problem<T: Scalar>(path: &Path) -> Result<DiscreteProblem<T>> {
    parse_problem(&read_text(path)?)
}

pub fn problem_to_json<T: Scalar>(p: &DiscreteProblem<T>) -> String {
    let out = ProblemOut {
        m: p.rows(),
        n: p.cols(),
        f: encode_vec(p.f()),
        g: encode_vec(p.g()),
        cost: encode_matrix(p.cost()),
        capacity: encode_matrix(p.capacity()),
    };
    serde_json::to_string_pretty(&out).expect("problem serializes")
}

pub fn write_problem<T: Scalar>(p: &DiscreteProblem<T>, path: &Path) -> Result<()> {
    write_atomic(path, problem_to_json(p).as_bytes())
}

pub fn plan_to_csv<T: Scalar>(plan: &CandidatePlan<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "j", "mass"]).expect("in-memory write");
    for (i, j, v) in plan.h.iter_indexed() {
        if !v.is_zero() {
            w.write_record([i.to_string(), j.to_string(), v.encode()]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Reads a sparse plan into an `m x n` matrix; absent cells are zero.
pub fn parse_plan<T: Scalar>(text: &str, m: usize, n: usize) -> Result<CandidatePlan<T>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if header != vec!["i", "j", "mass"] {
        return Err(Error::Parse(format!("plan header must be i,j,mass, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut h = Matrix::filled(m, n, T::zero());
    let mut seen = Matrix::filled(m, n, false);
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = line + 2;
        let index = |k: usize, bound: usize| -> Result<usize> {
            let k: usize = record[k].parse().map_err(|_| Error::Parse(format!("line {row}: bad index {:?}", &record[k])))?;
            if k >= bound {
                return Err(Error::Dimension(format!("line {row}: index {k} out of range 0..{bound}")));
            }
            Ok(k)
        };
        let (i, j) = (index(0, m)?, index(1, n)?);
        if std::mem::replace(&mut seen[(i, j)], true) {
            return Err(Error::Parse(format!("line {row}: cell ({i}, {j}) repeated")));
        }
        h[(i, j)] = T::parse(&record[2])?;
    }
    Ok(CandidatePlan::new(h, Provenance::File))
}

pub fn read_plan<T: Scalar>(path: &Path, m: usize, n: usize) -> Result<CandidatePlan<T>> {
    parse_plan(&read_text(path)?, m, n)
}

pub fn write_plan<T: Scalar>(plan: &CandidatePlan<T>, path: &Path) -> Result<()> {
    write_atomic(path, plan_to_csv(plan).as_bytes())
}

pub fn certificate_to_json<T: Scalar>(cert: &DualCertificate<T>) -> String {
    let out = CertificateFile { u: encode_vec(&cert.u), v: encode_vec(&cert.v), w: encode_matrix(&cert.w) };
    serde_json::to_string_pretty(&out).expect("certificate serializes")
}

pub fn parse_certificate<T: Scalar>(text: &str) -> Result<DualCertificate<T>> {
    let file: CertificateFile<Num> = serde_json::from_str(text).map_err(json_error)?;
    let (m, n) = (file.u.len(), file.v.len());
    Ok(DualCertificate { u: parse_vec(&file.u)?, v: parse_vec(&file.v)?, w: parse_matrix(&file.w, "w", m, n)? })
}

pub fn read_certificate<T: Scalar>(path: &Path) -> Result<DualCertificate<T>> {
    parse_certificate(&read_text(path)?)
}

pub fn write_certificate<T: Scalar>(cert: &DualCertificate<T>, path: &Path) -> Result<()> {
    write_atomic(path, certificate_to_json(cert).as_bytes())
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    deficit: Option<String>,
    mode: String,
    m: usize,
    n: usize,
    objective: String,
    objective_f64: f64,
    statistics: &'a SolveStats,
}

pub fn solve_result_to_json<T: Scalar>(p: &DiscreteProblem<T>, r: &SolveResult<T>) -> String {
    let (status, deficit) = match &r.status {
        SolveStatus::Optimal => ("optimal", None),
        SolveStatus::Infeasible { deficit } => ("infeasible", Some(deficit.encode())),
    };
    let summary = SolveSummary {
        status,
        deficit,
        mode: T::MODE.to_string(),
        m: p.rows(),
        n: p.cols(),
        objective: r.objective.encode(),
        objective_f64: r.objective.to_f64(),
        statistics: &r.stats,
    };
    serde_json::to_string_pretty(&summary).expect("solve summary serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckResult {
    Pass,
    Fail,
}

impl CheckResult {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Outcome of a named check; `witness` carries whatever explains a failure.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check: String,
    pub instance: String,
    pub result: CheckResult,
    pub witness: Value,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}
