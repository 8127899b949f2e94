//! Evolve one benchmark problem for a short wall-clock budget and validate
//! the best model found on the held-out test split.

use microgp::runner::{run_one, ExperimentConfig};
use microgp::selection::PopulationSchedule;

fn main() {
    let mut config = ExperimentConfig::new("I.30.5", PopulationSchedule::constant(4_000));
    config.time_limit_secs = 20.0;

    let record = run_one(&config, 42).expect("known problem id");

    println!("problem {}  seed {}", record.problem_id, record.seed);
    for entry in record.generations.iter().step_by(10) {
        println!(
            "  gen {:4}  alive {:5}  best score {:12.1}  t={:5.1}s",
            entry.generation, entry.alive, entry.best_score, entry.elapsed_secs
        );
    }
    println!(
        "completed {} generations, {} case evaluations",
        record.generations.len(),
        record.total_case_evaluations
    );
    if let Some(genome) = &record.best_genome {
        println!("best model: {genome}");
    }
    println!(
        "test verdict: solved={} max relative error={:.3e}",
        record.verdict.solved, record.verdict.max_relative_error
    );
}
