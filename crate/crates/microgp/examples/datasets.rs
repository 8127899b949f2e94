//! Benchmark datasets: generation, CSV round trips, and validating a
//! hand-written model against the 0.1% all-points criterion.

use microgp::benchmark::{generate_dataset, registry, validate_model};
use microgp::genome::Genome;

fn main() {
    println!("{:10} {:>6} {:>6} {:>6}", "problem", "arity", "train", "test");
    for spec in registry() {
        let ds = generate_dataset(&spec, 0);
        println!(
            "{:10} {:>6} {:>6} {:>6}",
            spec.id,
            spec.arity(),
            ds.train.n_cases(),
            ds.test.n_cases()
        );
    }

    let spec = microgp::benchmark::problem("II.6.15a").unwrap();
    let ds = generate_dataset(&spec, 0);

    // Round-trip the test split through the CSV interchange format.
    let dir = std::env::temp_dir().join("microgp_datasets_example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("II.6.15a_test.csv");
    microgp::benchmark::export_csv(&ds.test, &path).unwrap();
    let back = microgp::benchmark::import_csv(&path).unwrap();
    assert_eq!(back.n_cases(), ds.test.n_cases());
    println!("\nwrote and re-read {}", path.display());

    // The ground-truth expression in genome form validates as solved; a
    // 0.2% rescale of it does not.
    let truth = Genome::parse_text(spec.truth_rpn).unwrap();
    let verdict = validate_model(&truth, &ds.test);
    println!("truth genome:   solved={} err={:.2e}", verdict.solved, verdict.max_relative_error);

    let scaled = Genome::parse_text(&format!("{} 1.002 *", spec.truth_rpn)).unwrap();
    let verdict = validate_model(&scaled, &ds.test);
    println!("truth * 1.002:  solved={} err={:.2e}", verdict.solved, verdict.max_relative_error);
}
