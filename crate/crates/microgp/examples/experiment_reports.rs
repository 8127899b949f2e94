//! Run a small experiment grid, persist per-run records, and emit the
//! aggregate report CSVs with Wilson confidence bands.

use microgp::runner::{emit_reports, run_many, ExperimentConfig};
use microgp::selection::PopulationSchedule;

fn main() {
    let out = std::env::temp_dir().join("microgp_reports_example");
    let _ = std::fs::remove_dir_all(&out);

    let mut summaries = Vec::new();
    let mut records = Vec::new();
    for problem in ["I.11.19", "I.30.5"] {
        let mut config =
            ExperimentConfig::new(problem, PopulationSchedule::parse("0:2000,10:500").unwrap());
        config.time_limit_secs = 6.0;
        config.repeats = 3;
        config.out_dir = Some(out.clone());
        let (summary, mut run_records) = run_many(&config).expect("known problem ids");
        println!(
            "{problem}: solved {}/{}  rate {:.2} in Wilson [{:.2}, {:.2}]",
            summary.solved,
            summary.repeats,
            summary.solved_rate,
            summary.wilson_low,
            summary.wilson_high
        );
        summaries.push(summary);
        records.append(&mut run_records);
    }

    let manifest = emit_reports(&summaries, &records, &out).unwrap();
    println!("\nreports in {}:", out.display());
    for entry in &manifest.files {
        println!("  {} ({} rows)", entry.file, entry.rows);
    }
}
