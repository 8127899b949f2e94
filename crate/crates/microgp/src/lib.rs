//! Linear genetic programming for symbolic regression, organized around a
//! postfix (RPN) genome language, correlation-based fitness, a slot-recycling
//! population arena, and sampled-microcosm selection that supports very large,
//! scheduled population sizes.
//!
//! Start with the `examples/` directory: each example exercises one major
//! capability end to end. The `microgp` binary wraps the same library for
//! scripted experiments.

pub mod benchmark;
pub mod evaluator;
pub mod fitness;
pub mod genome;
pub mod runner;
pub mod selection;

pub use benchmark::{generate_dataset, registry, validate_model, Dataset, ProblemSpec, Verdict};
pub use evaluator::{evaluate_population, Arena, DatasetBatch, EvalStats, Individual};
pub use fitness::{correlation, fitness_of, score, tally, FitnessConfig, PairTally};
pub use genome::{mutate, random_genome, Genome, GenomeConfig, Instruction};
pub use runner::{run_many, run_one, wilson_interval, ExperimentConfig, RunRecord, Summary};
pub use selection::{
    copy_counts, sample_microcosm, step_population, ControlParams, MicrocosmTable,
    PopulationSchedule,
};
