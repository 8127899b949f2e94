use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use microgp::benchmark::{generate_dataset, problem, registry, validate_model};
use microgp::runner::{
    emit_reports, parse_config_file, read_record, run_many, summarize, to_json_string,
    ExperimentConfig, RunRecord,
};
use microgp::selection::PopulationSchedule;
use microgp::Genome;

#[derive(Parser)]
#[command(name = "microgp", about = "Linear GP symbolic regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunFlags {
    /// Problem id, e.g. I.11.19
    #[arg(long)]
    problem: Option<String>,
    /// Population schedule, e.g. 0:5000000,20:100000
    #[arg(long)]
    schedule: Option<String>,
    /// Wall-clock budget per run in seconds
    #[arg(long)]
    time_limit: Option<f64>,
    /// Independent seeded runs per configuration
    #[arg(long)]
    repeats: Option<usize>,
    /// Base seed; run i uses seed base + i
    #[arg(long)]
    seed: Option<u64>,
    /// Training cases used per fitness evaluation (max 512)
    #[arg(long)]
    batch_size: Option<usize>,
    /// Directory for run records and reports
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rayon worker threads (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Evaluate in chunks of at most this many individuals
    #[arg(long)]
    max_chunk: Option<usize>,
    /// Flat key=value config file; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration
    Run(RunFlags),
    /// Run every benchmark problem with shared settings
    BenchAll(RunFlags),
    /// Aggregate saved run records into report CSVs
    Report {
        /// Directory containing run_*.json records
        #[arg(long)]
        r#in: PathBuf,
        /// Output directory for reports (defaults to the input directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a genome in postfix text form against a problem's test split
    Eval {
        /// Genome text, e.g. "x0 x1 * x2 x3 * +"
        #[arg(long)]
        genome: String,
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn merge(flags: &RunFlags) -> Result<RunFlags, String> {
    let mut merged = flags.clone();
    if let Some(path) = &flags.config {
        let map = parse_config_file(path).map_err(|e| e.to_string())?;
        let parse_err = |k: &str| format!("config key `{k}` has an unparsable value");
        for (key, value) in &map {
            match key.as_str() {
                "problem" => {
                    merged.problem.get_or_insert_with(|| value.clone());
                }
                "schedule" => {
                    merged.schedule.get_or_insert_with(|| value.clone());
                }
                "time-limit" => {
                    if merged.time_limit.is_none() {
                        merged.time_limit = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                "repeats" => {
                    if merged.repeats.is_none() {
                        merged.repeats = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                "seed" => {
                    if merged.seed.is_none() {
                        merged.seed = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                "batch-size" => {
                    if merged.batch_size.is_none() {
                        merged.batch_size = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                "out" => {
                    merged.out.get_or_insert_with(|| PathBuf::from(value));
                }
                "workers" => {
                    if merged.workers.is_none() {
                        merged.workers = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                "max-chunk" => {
                    if merged.max_chunk.is_none() {
                        merged.max_chunk = Some(value.parse().map_err(|_| parse_err(key))?);
                    }
                }
                other => return Err(format!("unknown config key `{other}`")),
            }
        }
    }
    Ok(merged)
}

fn build_config(flags: &RunFlags, problem_id: &str) -> Result<ExperimentConfig, String> {
    let schedule = match &flags.schedule {
        Some(text) => PopulationSchedule::parse(text).map_err(|e| e.to_string())?,
        None => PopulationSchedule::constant(10_000),
    };
    let mut config = ExperimentConfig::new(problem_id, schedule);
    if let Some(v) = flags.time_limit {
        config.time_limit_secs = v;
    }
    if let Some(v) = flags.repeats {
        config.repeats = v;
    }
    if let Some(v) = flags.seed {
        config.base_seed = v;
    }
    if let Some(v) = flags.batch_size {
        config.batch_size = v;
    }
    config.max_chunk = flags.max_chunk;
    config.out_dir = flags.out.clone();
    Ok(config)
}

fn setup_workers(flags: &RunFlags) {
    if let Some(n) = flags.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("worker pool is configured once, before any parallel work");
    }
}

fn cmd_run(flags: RunFlags) -> Result<(), String> {
    let flags = merge(&flags)?;
    setup_workers(&flags);
    let problem_id = flags
        .problem
        .clone()
        .ok_or("a problem id is required (--problem or config file)")?;
    let config = build_config(&flags, &problem_id)?;
    let (summary, records) = run_many(&config).map_err(|e| e.to_string())?;
    if let Some(out) = &config.out_dir {
        emit_reports(std::slice::from_ref(&summary), &records, out).map_err(|e| e.to_string())?;
    }
    println!("{}", to_json_string(&summary));
    Ok(())
}

fn cmd_bench_all(flags: RunFlags) -> Result<(), String> {
    let flags = merge(&flags)?;
    setup_workers(&flags);
    let mut summaries = Vec::new();
    let mut all_records = Vec::new();
    for spec in registry() {
        let config = build_config(&flags, spec.id)?;
        let (summary, records) = run_many(&config).map_err(|e| e.to_string())?;
        eprintln!(
            "{}: solved {}/{} [{:.3}, {:.3}]",
            spec.id, summary.solved, summary.repeats, summary.wilson_low, summary.wilson_high
        );
        summaries.push(summary);
        all_records.extend(records);
    }
    if let Some(out) = &flags.out {
        emit_reports(&summaries, &all_records, out).map_err(|e| e.to_string())?;
    }
    println!("{}", to_json_string(&summaries));
    Ok(())
}

fn cmd_report(dir: PathBuf, out: Option<PathBuf>) -> Result<(), String> {
    let mut records: Vec<RunRecord> = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let is_record = path.extension().is_some_and(|e| e == "json")
            && path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_"));
        if is_record {
            records.push(read_record(&path).map_err(|e| e.to_string())?);
        }
    }
    if records.is_empty() {
        return Err(format!("no run_*.json records found in {}", dir.display()));
    }
    records.sort_by(|a, b| (&a.problem_id, a.seed).cmp(&(&b.problem_id, b.seed)));

    // Group records by (problem, schedule) and summarize each group.
    let mut summaries = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let key = (records[i].problem_id.clone(), records[i].schedule.clone());
        let mut j = i;
        while j < records.len()
            && records[j].problem_id == key.0
            && records[j].schedule == key.1
        {
            j += 1;
        }
        let schedule = PopulationSchedule::parse(&key.1).map_err(|e| e.to_string())?;
        let config = ExperimentConfig::new(key.0, schedule);
        summaries.push(summarize(&config, &records[i..j]));
        i = j;
    }
    let out = out.unwrap_or(dir);
    let manifest = emit_reports(&summaries, &records, &out).map_err(|e| e.to_string())?;
    println!("{}", to_json_string(&manifest));
    Ok(())
}

fn cmd_eval(genome_text: &str, problem_id: &str, seed: u64) -> Result<(), String> {
    let spec = problem(problem_id).ok_or_else(|| format!("unknown problem `{problem_id}`"))?;
    let genome = Genome::parse_text(genome_text).map_err(|e| e.to_string())?;
    if genome.arity() > spec.arity() {
        return Err(format!(
            "genome reads variable x{} but {} has only {} inputs",
            genome.arity() - 1,
            spec.id,
            spec.arity()
        ));
    }
    let dataset = generate_dataset(&spec, seed);
    let verdict = validate_model(&genome, &dataset.test);
    println!("{}", to_json_string(&verdict));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(flags) => cmd_run(flags),
        Command::BenchAll(flags) => cmd_bench_all(flags),
        Command::Report { r#in, out } => cmd_report(r#in, out),
        Command::Eval { genome, problem, seed } => cmd_eval(&genome, &problem, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
