//! Experiment orchestration: the generation loop under a wall-clock budget,
//! repeated seeded runs, solved-rate statistics, and machine-readable
//! reports.
//!
//! The time budget is checked once, before a generation starts; a generation
//! in progress always runs to completion, so at most one generation of
//! overrun can occur.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmark::{generate_dataset, problem, validate_model, Verdict, TRAIN_CASES};
use crate::evaluator::{evaluate_in_chunks, evaluate_population, Arena, EvalStats};
use crate::fitness::FitnessConfig;
use crate::genome::{random_genome, Genome, GenomeConfig};
use crate::selection::{
    sample_microcosm, step_population, ControlParams, PopulationSchedule, SelectionError,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("batch size {0} exceeds the {TRAIN_CASES} available training cases")]
    BatchTooLarge(usize),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed config file {path} at line {line}")]
    MalformedConfig { path: String, line: usize },
}

/// Everything one experiment needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem_id: String,
    pub schedule: PopulationSchedule,
    /// Wall-clock budget per run, in seconds.
    pub time_limit_secs: f64,
    /// Optional hard cap on generations, mostly for deterministic tests.
    pub max_generations: Option<u64>,
    pub batch_size: usize,
    pub repeats: usize,
    pub base_seed: u64,
    pub fitness: FitnessConfig,
    pub control: ControlParams,
    /// Genome parameters; arity is always overwritten from the problem.
    pub genome: Option<GenomeConfig>,
    /// Evaluate in chunks of at most this many individuals, when set.
    pub max_chunk: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem_id: impl Into<String>, schedule: PopulationSchedule) -> Self {
        ExperimentConfig {
            problem_id: problem_id.into(),
            schedule,
            time_limit_secs: 120.0,
            max_generations: None,
            batch_size: 512,
            repeats: 30,
            base_seed: 0,
            fitness: FitnessConfig::default(),
            control: ControlParams::default(),
            genome: None,
            max_chunk: None,
            out_dir: None,
        }
    }
}

/// Per-generation log line of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenerationLog {
    pub generation: u64,
    pub alive: usize,
    /// Best-ever training score at the end of this generation (monotone).
    pub best_score: f64,
    pub elapsed_secs: f64,
}

/// Complete record of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub problem_id: String,
    pub schedule: String,
    pub seed: u64,
    pub generations: Vec<GenerationLog>,
    pub total_model_evaluations: u64,
    pub total_case_evaluations: u64,
    pub best_genome: Option<String>,
    pub best_train_score: Option<f64>,
    pub verdict: Verdict,
    /// Diagnostic when the run ended abnormally (extinction, arena full).
    pub failure: Option<String>,
    pub wall_clock_secs: f64,
}

/// Aggregate over the repeats of one configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub problem_id: String,
    pub schedule: String,
    pub repeats: usize,
    pub solved: usize,
    pub solved_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub generations_completed: Vec<u64>,
    pub total_case_evaluations: Vec<u64>,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    assert!(n >= 1, "n must be at least 1");
    assert!(successes <= n, "successes must not exceed n");
    assert!(z > 0.0, "z must be positive");
    let nf = n as f64;
    let p_hat = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).clamp(0.0, 1.0), (center + half).clamp(0.0, 1.0))
}

/// Center of the Wilson interval (midpoint of the clamp-free interval).
pub fn wilson_center(successes: usize, n: usize, z: f64) -> f64 {
    let nf = n as f64;
    let p_hat = successes as f64 / nf;
    let z2 = z * z;
    (p_hat + z2 / (2.0 * nf)) / (1.0 + z2 / nf)
}

/// Execute one seeded run to completion and return its record.
pub fn run_one(config: &ExperimentConfig, seed: u64) -> Result<RunRecord, RunnerError> {
    let spec = problem(&config.problem_id)
        .ok_or_else(|| RunnerError::UnknownProblem(config.problem_id.clone()))?;
    if config.batch_size > TRAIN_CASES {
        return Err(RunnerError::BatchTooLarge(config.batch_size));
    }
    config.fitness.check();

    let dataset = generate_dataset(&spec, seed);
    let train = if config.batch_size < dataset.train.n_cases() {
        dataset.train.truncated(config.batch_size)
    } else {
        dataset.train.clone()
    };

    let mut genome_config = config
        .genome
        .clone()
        .unwrap_or_else(|| GenomeConfig::new(spec.arity()));
    genome_config.arity = spec.arity();

    // The dataset owns the raw seed stream; evolution gets its own.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let capacity = 2 * config.schedule.max_target();
    let mut arena = Arena::with_capacity(capacity);
    let mut stats = EvalStats::default();
    let mut log = Vec::new();
    let mut failure = None;

    let initial = config.schedule.target_for_generation(0);
    let start = Instant::now();
    let mut init_failed = false;
    for _ in 0..initial {
        if let Err(e) = arena.acquire(random_genome(&mut rng, &genome_config), 0) {
            failure = Some(e.to_string());
            init_failed = true;
            break;
        }
    }

    let mut hof: Option<(Genome, f64, f64)> = None;
    let mut generation: u64 = 0;
    loop {
        if init_failed || start.elapsed().as_secs_f64() >= config.time_limit_secs {
            break;
        }
        if let Some(cap) = config.max_generations {
            if generation >= cap {
                break;
            }
        }

        match config.max_chunk {
            Some(chunk) => evaluate_in_chunks(&mut arena, &train, &config.fitness, &mut stats, chunk),
            None => evaluate_population(&mut arena, &train, &config.fitness, &mut stats),
        }

        for ind in arena.alive() {
            // Ties on training score break toward lower raw training error.
            // The correlation fitness cannot distinguish a model from its
            // affine rescalings — a whole family shares the top score — but
            // their raw residuals differ, so the hall of fame ratchets
            // toward the family member that actually computes the target.
            // Only newborns are checked: a survivor was already considered
            // the generation it was born.
            match &mut hof {
                None => {
                    let err = validate_model(&ind.genome, &train).max_relative_error;
                    hof = Some((ind.genome.clone(), ind.score, err));
                }
                Some((g, s, e)) => {
                    if ind.score > *s {
                        let err = validate_model(&ind.genome, &train).max_relative_error;
                        (*g, *s, *e) = (ind.genome.clone(), ind.score, err);
                    } else if ind.score == *s && ind.birth_generation == generation {
                        let err = validate_model(&ind.genome, &train).max_relative_error;
                        if err < *e {
                            (*g, *s, *e) = (ind.genome.clone(), ind.score, err);
                        }
                    }
                }
            }
        }

        log.push(GenerationLog {
            generation,
            alive: arena.alive_count(),
            best_score: hof.as_ref().map(|(_, s, _)| *s).unwrap_or(f64::MIN),
            elapsed_secs: start.elapsed().as_secs_f64(),
        });

        let table = sample_microcosm(&arena, &mut rng, config.control.k);
        let target = config.schedule.target_for_generation(generation);
        match step_population(
            &mut arena,
            &table,
            target,
            &mut rng,
            &config.control,
            &genome_config,
            generation + 1,
        ) {
            Ok(_) => {}
            Err(SelectionError::Extinct { alive }) => {
                failure = Some(format!("population extinct-adjacent: {alive} alive"));
                break;
            }
            Err(SelectionError::Arena(e)) => {
                failure = Some(e.to_string());
                break;
            }
        }
        generation += 1;
    }

    let verdict = match &hof {
        Some((genome, _, _)) => validate_model(genome, &dataset.test),
        None => Verdict {
            solved: false,
            max_relative_error: f64::MAX,
            failing_case_index: None,
        },
    };

    Ok(RunRecord {
        schema_version: SCHEMA_VERSION,
        problem_id: config.problem_id.clone(),
        schedule: config.schedule.to_string(),
        seed,
        generations: log,
        total_model_evaluations: stats.total_model_evaluations,
        total_case_evaluations: stats.total_case_evaluations,
        best_genome: hof.as_ref().map(|(g, _, _)| g.to_text()),
        best_train_score: hof.as_ref().map(|(_, s, _)| *s),
        verdict,
        failure,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

/// Run `repeats` independent seeded runs and aggregate. Records are also
/// written to `out_dir` as one JSON file per run when configured.
pub fn run_many(config: &ExperimentConfig) -> Result<(Summary, Vec<RunRecord>), RunnerError> {
    assert!(config.repeats >= 1);
    let mut records = Vec::with_capacity(config.repeats);
    for i in 0..config.repeats {
        let seed = config.base_seed + i as u64;
        records.push(run_one(config, seed)?);
    }
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(|source| RunnerError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for record in &records {
            let path = dir.join(format!(
                "run_{}_{}.json",
                record.problem_id.replace('.', "_"),
                record.seed
            ));
            write_json(record, &path)?;
        }
    }
    Ok((summarize(config, &records), records))
}

/// Aggregate records into a summary for their configuration.
pub fn summarize(config: &ExperimentConfig, records: &[RunRecord]) -> Summary {
    let solved = records.iter().filter(|r| r.verdict.solved).count();
    let n = records.len().max(1);
    let (lo, hi) = wilson_interval(solved, n, 1.96);
    Summary {
        schema_version: SCHEMA_VERSION,
        problem_id: config.problem_id.clone(),
        schedule: config.schedule.to_string(),
        repeats: records.len(),
        solved,
        solved_rate: solved as f64 / n as f64,
        wilson_low: lo,
        wilson_high: hi,
        generations_completed: records.iter().map(|r| r.generations.len() as u64).collect(),
        total_case_evaluations: records.iter().map(|r| r.total_case_evaluations).collect(),
    }
}

// ---------------------------------------------------------------------------
// Serialization: floats carry 17 significant digits everywhere.

struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize a value as JSON with 17-significant-digit floats.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut ser).expect("serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits utf-8")
}

/// Write a value as JSON to a file.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), RunnerError> {
    fs::write(path, to_json_string(value)).map_err(|source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Read a run record back from disk.
pub fn read_record(path: &Path) -> Result<RunRecord, RunnerError> {
    let text = fs::read_to_string(path).map_err(|source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| RunnerError::Io {
        path: path.display().to_string(),
        source: io::Error::new(io::ErrorKind::InvalidData, e),
    })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub files: Vec<ManifestEntry>,
}

fn write_report(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[String],
    manifest: &mut Manifest,
) -> Result<(), RunnerError> {
    if rows.is_empty() {
        return Ok(());
    }
    let path = dir.join(name);
    let mut text = String::with_capacity(rows.len() * 32);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(&path, text).map_err(|source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    manifest.files.push(ManifestEntry { file: name.to_string(), rows: rows.len() });
    Ok(())
}

/// Write the report CSVs plus a JSON manifest to `out_dir`.
///
/// Emitted shapes: solved-count table, per-problem solved rate with Wilson
/// bands, population-size histogram, generations-completed and
/// total-evaluations distributions, and population traces around schedule
/// steps.
pub fn emit_reports(
    summaries: &[Summary],
    records: &[RunRecord],
    out_dir: &Path,
) -> Result<Manifest, RunnerError> {
    fs::create_dir_all(out_dir).map_err(|source| RunnerError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    let mut manifest = Manifest { schema_version: SCHEMA_VERSION, files: Vec::new() };

    // (a) Solved counts per configuration.
    let rows: Vec<String> = summaries
        .iter()
        .map(|s| format!("{},{},{},{}", s.problem_id, s.schedule, s.solved, s.repeats))
        .collect();
    write_report(out_dir, "solved_counts.csv", "problem,schedule,solved,repeats", &rows, &mut manifest)?;

    // (b) Solved rate with Wilson confidence bands.
    let rows: Vec<String> = summaries
        .iter()
        .map(|s| {
            format!(
                "{},{},{:.16e},{:.16e},{:.16e}",
                s.problem_id, s.schedule, s.solved_rate, s.wilson_low, s.wilson_high
            )
        })
        .collect();
    write_report(
        out_dir,
        "solved_rates.csv",
        "problem,schedule,solved_rate,wilson_low,wilson_high",
        &rows,
        &mut manifest,
    )?;

    // (c) Histogram of alive population relative to the scheduled target.
    let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
    for record in records {
        let schedule = PopulationSchedule::parse(&record.schedule).ok();
        for entry in &record.generations {
            let target = schedule
                .as_ref()
                .map(|s| s.target_for_generation(entry.generation))
                .unwrap_or(entry.alive.max(1));
            let ratio = entry.alive as f64 / target as f64;
            // 5%-wide bins keyed by their lower edge in percent.
            let bin = (ratio / 0.05).floor() as i64 * 5;
            *bins.entry(bin).or_insert(0) += 1;
        }
    }
    let rows: Vec<String> = bins
        .iter()
        .map(|(bin, count)| format!("{:.16e},{count}", *bin as f64 / 100.0))
        .collect();
    write_report(
        out_dir,
        "population_histogram.csv",
        "ratio_bin_low,generations",
        &rows,
        &mut manifest,
    )?;

    // (d) Generations completed per run.
    let rows: Vec<String> = records
        .iter()
        .map(|r| format!("{},{},{},{}", r.problem_id, r.schedule, r.seed, r.generations.len()))
        .collect();
    write_report(
        out_dir,
        "generations_completed.csv",
        "problem,schedule,seed,generations",
        &rows,
        &mut manifest,
    )?;

    // (e) Evaluation totals per run.
    let rows: Vec<String> = records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.problem_id, r.schedule, r.seed, r.total_model_evaluations, r.total_case_evaluations
            )
        })
        .collect();
    write_report(
        out_dir,
        "evaluations.csv",
        "problem,schedule,seed,model_evaluations,case_evaluations",
        &rows,
        &mut manifest,
    )?;

    // (f) Population traces around schedule steps.
    let mut rows = Vec::new();
    for record in records {
        let Ok(schedule) = PopulationSchedule::parse(&record.schedule) else {
            continue;
        };
        for &(from, _) in schedule.steps().iter().skip(1) {
            let lo = from.saturating_sub(5);
            let hi = from + 15;
            for entry in &record.generations {
                if entry.generation >= lo && entry.generation <= hi {
                    rows.push(format!(
                        "{},{},{},{},{},{}",
                        record.problem_id,
                        record.schedule,
                        record.seed,
                        entry.generation,
                        entry.alive,
                        schedule.target_for_generation(entry.generation)
                    ));
                }
            }
        }
    }
    write_report(
        out_dir,
        "step_traces.csv",
        "problem,schedule,seed,generation,alive,target",
        &rows,
        &mut manifest,
    )?;

    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest, &manifest_path)?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Config files: flat `key = value` lines mirroring the CLI flags.

/// Parse a flat key-value config file. `#` starts a comment; keys are the
/// long CLI flag names without dashes.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, RunnerError> {
    let text = fs::read_to_string(path).map_err(|source| RunnerError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(RunnerError::MalformedConfig {
            path: path.display().to_string(),
            line: idx + 1,
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new("I.30.5", PopulationSchedule::constant(60));
        c.time_limit_secs = 30.0;
        c.max_generations = Some(6);
        c.batch_size = 32;
        c.repeats = 2;
        c
    }

    #[test]
    fn wilson_center_symmetry() {
        assert_eq!(wilson_center(15, 30, 1.96), 0.5);
    }

    #[test]
    fn wilson_zero_successes_low_edge() {
        let (lo, _) = wilson_interval(0, 30, 1.96);
        assert!(lo.abs() < 1e-12);
    }

    #[test]
    fn wilson_matches_formula_oracle() {
        // Independent substitution of the closed form for (25, 30).
        let (lo, hi) = wilson_interval(25, 30, 1.96);
        let n = 30.0f64;
        let p = 25.0 / 30.0;
        let z = 1.96f64;
        let denom = 1.0 + z * z / n;
        let center = (p + z * z / (2.0 * n)) / denom;
        let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        assert!((lo - (center - half)).abs() < 1e-12);
        assert!((hi - (center + half)).abs() < 1e-12);
    }

    #[test]
    fn wilson_contains_p_hat_and_narrows_with_n() {
        for &(s, n) in &[(3usize, 10usize), (5, 10), (9, 10)] {
            let (lo, hi) = wilson_interval(s, n, 1.96);
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi);
        }
        let (lo1, hi1) = wilson_interval(5, 10, 1.96);
        let (lo2, hi2) = wilson_interval(50, 100, 1.96);
        assert!(hi2 - lo2 < hi1 - lo1);
    }

    #[test]
    #[should_panic]
    fn wilson_rejects_bad_domain() {
        wilson_interval(5, 4, 1.96);
    }

    #[test]
    fn zero_time_limit_runs_zero_generations() {
        let mut c = quick_config();
        c.time_limit_secs = 0.0;
        c.max_generations = None;
        let record = run_one(&c, 1).unwrap();
        assert!(record.generations.is_empty());
        assert!(!record.verdict.solved);
        assert!(record.best_genome.is_none());
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let c = quick_config();
        let a = run_one(&c, 3).unwrap();
        let b = run_one(&c, 3).unwrap();
        assert_eq!(a.generations.len(), b.generations.len());
        for (x, y) in a.generations.iter().zip(&b.generations) {
            assert_eq!(x.generation, y.generation);
            assert_eq!(x.alive, y.alive);
            assert_eq!(x.best_score.to_bits(), y.best_score.to_bits());
        }
        assert_eq!(a.best_genome, b.best_genome);
        assert_eq!(a.total_case_evaluations, b.total_case_evaluations);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn accounting_matches_per_generation_log() {
        let c = quick_config();
        let record = run_one(&c, 5).unwrap();
        let expected: u64 = record
            .generations
            .iter()
            .map(|g| g.alive as u64 * c.batch_size as u64)
            .sum();
        assert_eq!(record.total_case_evaluations, expected);
    }

    #[test]
    fn hall_of_fame_is_monotone() {
        let c = quick_config();
        let record = run_one(&c, 7).unwrap();
        let mut prev = f64::MIN;
        for entry in &record.generations {
            assert!(entry.best_score >= prev);
            prev = entry.best_score;
        }
    }

    #[test]
    fn chunked_run_matches_unchunked() {
        let c = quick_config();
        let mut chunked = c.clone();
        chunked.max_chunk = Some(7);
        let a = run_one(&c, 11).unwrap();
        let b = run_one(&chunked, 11).unwrap();
        assert_eq!(a.best_genome, b.best_genome);
        assert_eq!(
            a.generations.last().map(|g| g.best_score.to_bits()),
            b.generations.last().map(|g| g.best_score.to_bits())
        );
    }

    #[test]
    fn run_many_aggregates_and_persists() {
        let dir = std::env::temp_dir().join("microgp_runner_test");
        let _ = fs::remove_dir_all(&dir);
        let mut c = quick_config();
        c.out_dir = Some(dir.clone());
        let (summary, records) = run_many(&c).unwrap();
        assert_eq!(summary.repeats, 2);
        assert_eq!(
            summary.solved,
            records.iter().filter(|r| r.verdict.solved).count()
        );
        // Re-aggregation from emitted files matches.
        let mut reread = Vec::new();
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                reread.push(read_record(&path).unwrap());
            }
        }
        assert_eq!(reread.len(), records.len());
        let solved_again = reread.iter().filter(|r| r.verdict.solved).count();
        assert_eq!(solved_again, summary.solved);
    }

    #[test]
    fn unknown_problem_is_an_error() {
        let c = ExperimentConfig::new("IV.0.0", PopulationSchedule::constant(10));
        assert!(matches!(run_one(&c, 0), Err(RunnerError::UnknownProblem(_))));
    }

    #[test]
    fn reports_shape() {
        let dir = std::env::temp_dir().join("microgp_reports_test");
        let _ = fs::remove_dir_all(&dir);
        let mut c = quick_config();
        c.repeats = 3;
        let (summary, records) = run_many(&c).unwrap();
        let manifest = emit_reports(&[summary], &records, &dir).unwrap();
        assert!(manifest.files.iter().any(|f| f.file == "solved_counts.csv"));
        let text = fs::read_to_string(dir.join("solved_counts.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "problem,schedule,solved,repeats");
        let row = lines.next().unwrap();
        assert!(row.starts_with("I.30.5,0:60,"));
        assert!(row.ends_with(",3"));
        // Empty inputs produce a manifest with zero entries and no files.
        let empty_dir = std::env::temp_dir().join("microgp_reports_empty");
        let _ = fs::remove_dir_all(&empty_dir);
        let manifest = emit_reports(&[], &[], &empty_dir).unwrap();
        assert!(manifest.files.is_empty());
    }

    #[test]
    fn histogram_matches_hand_count() {
        // Synthetic trace with known sizes.
        let record = RunRecord {
            schema_version: SCHEMA_VERSION,
            problem_id: "I.11.19".into(),
            schedule: "0:100".into(),
            seed: 0,
            generations: vec![
                GenerationLog { generation: 0, alive: 100, best_score: 0.0, elapsed_secs: 0.0 },
                GenerationLog { generation: 1, alive: 101, best_score: 0.0, elapsed_secs: 0.0 },
                GenerationLog { generation: 2, alive: 97, best_score: 0.0, elapsed_secs: 0.0 },
                GenerationLog { generation: 3, alive: 83, best_score: 0.0, elapsed_secs: 0.0 },
            ],
            total_model_evaluations: 0,
            total_case_evaluations: 0,
            best_genome: None,
            best_train_score: None,
            verdict: Verdict { solved: false, max_relative_error: 0.0, failing_case_index: None },
            failure: None,
            wall_clock_secs: 0.0,
        };
        let dir = std::env::temp_dir().join("microgp_histogram_test");
        let _ = fs::remove_dir_all(&dir);
        emit_reports(&[], std::slice::from_ref(&record), &dir).unwrap();
        let text = fs::read_to_string(dir.join("population_histogram.csv")).unwrap();
        // ratios 1.00, 1.01, 0.97, 0.83 -> bins 1.00 (x2), 0.95, 0.80
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 3);
        assert!(text.contains("1.0000000000000000e0,2"));
        assert!(text.contains("9.5000000000000001e-1,1") || text.contains("9.4999999999999996e-1,1"));
        assert!(text.contains("8.0000000000000004e-1,1") || text.contains("8.0000000000000000e-1,1"));
    }

    #[test]
    fn config_file_parsing() {
        let dir = std::env::temp_dir().join("microgp_config_test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.conf");
        fs::write(&path, "problem = I.11.19\nschedule=0:1000\ntime-limit = 30 # seconds\n").unwrap();
        let map = parse_config_file(&path).unwrap();
        assert_eq!(map.get("problem").unwrap(), "I.11.19");
        assert_eq!(map.get("schedule").unwrap(), "0:1000");
        assert_eq!(map.get("time-limit").unwrap(), "30");
        fs::write(&path, "nonsense line\n").unwrap();
        assert!(matches!(
            parse_config_file(&path),
            Err(RunnerError::MalformedConfig { line: 1, .. })
        ));
    }

    #[test]
    fn json_floats_carry_17_significant_digits() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let text = to_json_string(&S { x: 0.5 });
        assert_eq!(text, "{\"x\":5.0000000000000000e-1}");
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.5);
    }
}
