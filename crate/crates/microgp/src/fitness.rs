//! Correlation-based fitness with explicit valid/invalid pair accounting.
//!
//! Per fitness case, the model outcome and the target outcome form a pair.
//! Pearson correlation is computed over valid/valid pairs only; mismatched
//! pairs (`c1`) are penalized and matched-invalid pairs (`c2`) rewarded in
//! the total score:
//!
//! ```text
//! score = M * r^4 * (N - (c1 + c2)) - M * (c1 - c2)
//! ```

use crate::evaluator::DatasetBatch;
use crate::genome::{EvalOutcome, Genome};

/// Valid/invalid pair counts over a case batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairTally {
    /// Cases where both model and target are finite.
    pub n_valid: usize,
    /// Cases where exactly one side is invalid.
    pub c1: usize,
    /// Cases where both sides are invalid.
    pub c2: usize,
    /// Total case count.
    pub n_total: usize,
}

/// Pearson correlation over the valid/valid pairs of a batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    /// Correlation in [-1, 1]; 0 when degenerate.
    pub r: f64,
    /// Set when fewer than two valid pairs exist or either side has zero
    /// variance over them.
    pub degenerate: bool,
}

/// Scoring parameters.
#[derive(Debug, Clone)]
pub struct FitnessConfig {
    /// Max-score parameter M. Any positive value yields the same ranking of
    /// models; it only sets the scale.
    pub max_score: f64,
    /// Fitness cases per generation. Capped at 1024.
    pub batch_size: usize,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        FitnessConfig { max_score: 1000.0, batch_size: 512 }
    }
}

impl FitnessConfig {
    pub fn check(&self) {
        assert!(self.max_score > 0.0, "max_score must be positive");
        assert!(
            (1..=1024).contains(&self.batch_size),
            "batch_size must be in 1..=1024"
        );
    }
}

/// Count valid/invalid pair categories. Panics on length mismatch.
pub fn tally(outcomes: &[EvalOutcome], targets: &[EvalOutcome]) -> PairTally {
    assert_eq!(
        outcomes.len(),
        targets.len(),
        "outcome and target vectors must have equal length"
    );
    assert!(!outcomes.is_empty(), "at least one case is required");
    let mut t = PairTally { n_valid: 0, c1: 0, c2: 0, n_total: outcomes.len() };
    for (m, y) in outcomes.iter().zip(targets) {
        match (m.is_valid(), y.is_valid()) {
            (true, true) => t.n_valid += 1,
            (false, false) => t.c2 += 1,
            _ => t.c1 += 1,
        }
    }
    t
}

/// Pearson correlation over valid/valid pairs, one-pass Welford-style.
pub fn correlation(outcomes: &[EvalOutcome], targets: &[EvalOutcome]) -> CorrelationResult {
    assert_eq!(outcomes.len(), targets.len());
    let mut n = 0u64;
    let mut mean_m = 0.0f64;
    let mut mean_y = 0.0f64;
    let mut m2_m = 0.0f64;
    let mut m2_y = 0.0f64;
    let mut cov = 0.0f64;
    for (m, y) in outcomes.iter().zip(targets) {
        if let (EvalOutcome::Finite(a), EvalOutcome::Finite(b)) = (*m, *y) {
            n += 1;
            let k = n as f64;
            let da = a - mean_m;
            let db = b - mean_y;
            mean_m += da / k;
            mean_y += db / k;
            // da uses the pre-update mean, the second factor the post-update
            // one; this is the standard stable co-moment update.
            m2_m += da * (a - mean_m);
            m2_y += db * (b - mean_y);
            cov += da * (b - mean_y);
        }
    }
    if n < 2 || m2_m <= 0.0 || m2_y <= 0.0 {
        return CorrelationResult { r: 0.0, degenerate: true };
    }
    let r = cov / (m2_m * m2_y).sqrt();
    if !r.is_finite() {
        return CorrelationResult { r: 0.0, degenerate: true };
    }
    CorrelationResult { r: r.clamp(-1.0, 1.0), degenerate: false }
}

/// Total score from correlation and pair tally.
pub fn score(corr: CorrelationResult, tally: PairTally, config: &FitnessConfig) -> f64 {
    let m = config.max_score;
    let r = if corr.degenerate { 0.0 } else { corr.r };
    let r4 = r * r * r * r;
    let n = tally.n_total as f64;
    let c1 = tally.c1 as f64;
    let c2 = tally.c2 as f64;
    m * r4 * (n - (c1 + c2)) - m * (c1 - c2)
}

/// Evaluate a genome over a whole batch and score it. Higher is better.
pub fn fitness_of(genome: &Genome, batch: &DatasetBatch, config: &FitnessConfig) -> f64 {
    let mut stack = Vec::with_capacity(genome.len());
    let mut outcomes = Vec::with_capacity(batch.n_cases());
    fitness_of_buffered(genome, batch, config, &mut stack, &mut outcomes)
}

/// Same as [`fitness_of`] but reusing caller-owned scratch buffers, for the
/// batched evaluation hot path.
pub fn fitness_of_buffered(
    genome: &Genome,
    batch: &DatasetBatch,
    config: &FitnessConfig,
    stack: &mut Vec<f64>,
    outcomes: &mut Vec<EvalOutcome>,
) -> f64 {
    outcomes.clear();
    for i in 0..batch.n_cases() {
        outcomes.push(genome.eval_with(batch.case(i), stack));
    }
    let corr = correlation(outcomes, batch.targets());
    let t = tally(outcomes, batch.targets());
    score(corr, t, config)
}
