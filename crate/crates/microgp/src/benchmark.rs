//! Benchmark problem registry, dataset generation, and the all-points
//! validation criterion.
//!
//! Seven symbolic regression targets drawn from the Feynman benchmark.
//! Physical constants (G, epsilon, hbar, ...) are treated as sampled input
//! variables, following the benchmark convention. Each problem carries
//! per-variable sampling ranges; defaults are uniform [1, 5] except where a
//! range must be tightened to keep the ground truth inside operator domains.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evaluator::DatasetBatch;
use crate::genome::{EvalOutcome, Genome};

pub const TRAIN_CASES: usize = 512;
pub const TEST_CASES: usize = 128;

/// Relative-error threshold of the solved criterion: 0.1%.
pub const SOLVED_THRESHOLD: f64 = 0.001;
/// Guard against division blow-up for targets near zero.
pub const RELATIVE_ERROR_GUARD: f64 = 1e-12;

/// One benchmark problem: ground truth plus sampling ranges.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    /// Label, e.g. "I.11.19".
    pub id: &'static str,
    /// Index of the equation in the benchmark's numbering.
    pub eq_number: u32,
    pub variable_names: &'static [&'static str],
    pub variable_ranges: Vec<(f64, f64)>,
    /// Ground-truth function over an input vector of length `arity`.
    pub truth: fn(&[f64]) -> f64,
    /// The ground truth hand-written in RPN text, used for validation
    /// self-checks and as a reference model.
    pub truth_rpn: &'static str,
}

impl ProblemSpec {
    pub fn arity(&self) -> usize {
        self.variable_names.len()
    }
}

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

fn truth_i_11_19(v: &[f64]) -> f64 {
    v[0] * v[1] + v[2] * v[3] + v[4] * v[5]
}

fn truth_i_13_12(v: &[f64]) -> f64 {
    // G m1 m2 (1/r2 - 1/r1); v = [G, m1, m2, r1, r2]
    v[0] * v[1] * v[2] * (1.0 / v[4] - 1.0 / v[3])
}

fn truth_i_30_5(v: &[f64]) -> f64 {
    // arcsin(lambda / (d n)); v = [lambda, d, n]
    (v[0] / (v[1] * v[2])).asin()
}

fn truth_ii_6_15a(v: &[f64]) -> f64 {
    // 3 p z sqrt(x^2 + y^2) / (r^5 4 pi eps); v = [p, z, x, y, r, eps]
    3.0 * v[0] * v[1] * (v[2] * v[2] + v[3] * v[3]).sqrt() / (v[4].powi(5) * FOUR_PI * v[5])
}

fn truth_ii_6_15b(v: &[f64]) -> f64 {
    // 3 p / ((4 pi eps)(r^3 sin(theta) cos(theta))); v = [p, eps, r, theta]
    3.0 * v[0] / (FOUR_PI * v[1] * v[2].powi(3) * v[3].sin() * v[3].cos())
}

fn truth_iii_4_32(v: &[f64]) -> f64 {
    // 1 / (exp(omega hbar / kT) - 1); v = [omega, hbar, kT]
    1.0 / ((v[0] * v[1] / v[2]).exp() - 1.0)
}

fn truth_iii_10_19(v: &[f64]) -> f64 {
    // u sqrt(Bx^2 + By^2 + Bz^2); v = [u, Bx, By, Bz]
    v[0] * (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt()
}

/// The seven benchmark problems.
pub fn registry() -> Vec<ProblemSpec> {
    let unit = |n: usize| vec![(1.0, 5.0); n];
    vec![
        ProblemSpec {
            id: "I.11.19",
            eq_number: 7,
            variable_names: &["x1", "y1", "x2", "y2", "x3", "y3"],
            variable_ranges: unit(6),
            truth: truth_i_11_19,
            truth_rpn: "x0 x1 * x2 x3 * + x4 x5 * +",
        },
        ProblemSpec {
            id: "I.13.12",
            eq_number: 14,
            variable_names: &["G", "m1", "m2", "r1", "r2"],
            variable_ranges: unit(5),
            truth: truth_i_13_12,
            truth_rpn: "x0 x1 * x2 * x4 inv x3 inv - *",
        },
        ProblemSpec {
            id: "I.30.5",
            eq_number: 31,
            variable_names: &["lambda", "d", "n"],
            // lambda / (d n) must stay within the arcsin domain; the default
            // [1, 5] box does not guarantee that, so the ranges are tightened
            // to keep the argument in (0, 0.5].
            variable_ranges: vec![(1.0, 2.0), (2.0, 5.0), (2.0, 5.0)],
            truth: truth_i_30_5,
            truth_rpn: "x0 x1 x2 * / asin",
        },
        ProblemSpec {
            id: "II.6.15a",
            eq_number: 56,
            variable_names: &["p", "z", "x", "y", "r", "eps"],
            variable_ranges: unit(6),
            truth: truth_ii_6_15a,
            truth_rpn: "3 x0 * x1 * x2 sq x3 sq + sqrt * x4 sq x4 sq * x4 * inv * 12.566370614359172 x5 * inv *",
        },
        ProblemSpec {
            id: "II.6.15b",
            eq_number: 57,
            variable_names: &["p", "eps", "r", "theta"],
            // theta bounded away from the zeros of sin and cos.
            variable_ranges: vec![(1.0, 5.0), (1.0, 5.0), (1.0, 5.0), (0.1, 1.5)],
            truth: truth_ii_6_15b,
            truth_rpn: "3 x0 * 12.566370614359172 x1 * x2 sq x2 * * x3 sin * x3 cos * inv *",
        },
        ProblemSpec {
            id: "III.4.32",
            eq_number: 86,
            variable_names: &["omega", "hbar", "kT"],
            variable_ranges: unit(3),
            truth: truth_iii_4_32,
            truth_rpn: "x0 x1 * x2 / exp 1 - inv",
        },
        ProblemSpec {
            id: "III.10.19",
            eq_number: 91,
            variable_names: &["u", "Bx", "By", "Bz"],
            variable_ranges: unit(4),
            truth: truth_iii_10_19,
            truth_rpn: "x0 x1 sq x2 sq + x3 sq + sqrt *",
        },
    ]
}

/// Look up a problem by its label.
pub fn problem(id: &str) -> Option<ProblemSpec> {
    registry().into_iter().find(|p| p.id == id)
}

/// Train/test split for one seeded sampling of a problem.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: DatasetBatch,
    pub test: DatasetBatch,
    pub seed: u64,
}

/// Sample 640 i.i.d. uniform input vectors, compute targets from the truth,
/// and split 512/128. Fully deterministic in `seed`.
pub fn generate_dataset(spec: &ProblemSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arity = spec.arity();
    let total = TRAIN_CASES + TEST_CASES;
    let mut inputs = Vec::with_capacity(total * arity);
    let mut targets = Vec::with_capacity(total);
    for _ in 0..total {
        let start = inputs.len();
        for &(lo, hi) in &spec.variable_ranges {
            inputs.push(rng.random_range(lo..=hi));
        }
        let y = (spec.truth)(&inputs[start..]);
        targets.push(EvalOutcome::from_value(y));
    }
    let train = DatasetBatch::new(
        inputs[..TRAIN_CASES * arity].to_vec(),
        targets[..TRAIN_CASES].to_vec(),
        arity,
    );
    let test = DatasetBatch::new(
        inputs[TRAIN_CASES * arity..].to_vec(),
        targets[TRAIN_CASES..].to_vec(),
        arity,
    );
    Dataset { train, test, seed }
}

/// Validation result over a held-out batch.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Verdict {
    pub solved: bool,
    pub max_relative_error: f64,
    pub failing_case_index: Option<usize>,
}

/// All-points criterion: the model output must be finite on every test case
/// with relative error below 0.1%.
pub fn validate_model(genome: &Genome, test: &DatasetBatch) -> Verdict {
    let mut max_err: f64 = 0.0;
    let mut failing = None;
    let mut stack = Vec::with_capacity(genome.len());
    for i in 0..test.n_cases() {
        let target = match test.targets()[i] {
            EvalOutcome::Finite(y) => y,
            // A non-finite truth sample carries no measurable error; skip.
            EvalOutcome::Invalid => continue,
        };
        match genome.eval_with(test.case(i), &mut stack) {
            EvalOutcome::Finite(y_hat) => {
                let err = (y_hat - target).abs() / target.abs().max(RELATIVE_ERROR_GUARD);
                if err > max_err {
                    max_err = err;
                }
                if err >= SOLVED_THRESHOLD && failing.is_none() {
                    failing = Some(i);
                }
            }
            EvalOutcome::Invalid => {
                return Verdict {
                    solved: false,
                    max_relative_error: f64::MAX,
                    failing_case_index: Some(i),
                };
            }
        }
    }
    Verdict {
        solved: failing.is_none() && max_err < SOLVED_THRESHOLD,
        max_relative_error: max_err,
        failing_case_index: failing,
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv in {path} at line {line}")]
    Malformed { path: String, line: usize },
}

/// Export a batch as CSV: header `x0,...,x{d-1},y`, one case per row.
/// Invalid targets serialize as an empty `y` field.
pub fn export_csv(batch: &DatasetBatch, path: &Path) -> Result<(), CsvError> {
    let io = |source| CsvError::Io { path: path.display().to_string(), source };
    let mut out = String::new();
    for i in 0..batch.arity() {
        out.push_str(&format!("x{i},"));
    }
    out.push_str("y\n");
    for i in 0..batch.n_cases() {
        for x in batch.case(i) {
            out.push_str(&format!("{x:.16e},"));
        }
        match batch.targets()[i] {
            EvalOutcome::Finite(y) => out.push_str(&format!("{y:.16e}")),
            EvalOutcome::Invalid => {}
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(out.as_bytes()).map_err(io)
}

/// Import a batch written by [`export_csv`].
pub fn import_csv(path: &Path) -> Result<DatasetBatch, CsvError> {
    let text = fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let bad = |line| CsvError::Malformed { path: path.display().to_string(), line };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1))?;
    let columns = header.split(',').count();
    if columns < 2 {
        return Err(bad(1));
    }
    let arity = columns - 1;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            return Err(bad(idx + 1));
        }
        for field in &fields[..arity] {
            inputs.push(field.parse().map_err(|_| bad(idx + 1))?);
        }
        if fields[arity].is_empty() {
            targets.push(EvalOutcome::Invalid);
        } else {
            let y: f64 = fields[arity].parse().map_err(|_| bad(idx + 1))?;
            targets.push(EvalOutcome::from_value(y));
        }
    }
    Ok(DatasetBatch::new(inputs, targets, arity))
}
