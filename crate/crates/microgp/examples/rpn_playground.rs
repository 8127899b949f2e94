//! Tour of the postfix genome language: parsing, evaluation, invalid
//! propagation, and a few mutation steps.

use microgp::genome::{mutate, stack_effect, EvalOutcome, Genome, GenomeConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(genome: &Genome, inputs: &[f64]) {
    match genome.eval(inputs) {
        EvalOutcome::Finite(v) => println!("  {} @ {inputs:?} = {v}", genome.to_text()),
        EvalOutcome::Invalid => println!("  {} @ {inputs:?} = invalid", genome.to_text()),
    }
}

fn main() {
    // Parse a dot product in postfix form: x0*x1 + x2*x3.
    let dot = Genome::parse_text("x0 x1 * x2 x3 * +").unwrap();
    println!("dot product, {} instructions:", dot.len());
    show(&dot, &[1.0, 2.0, 3.0, 4.0]);

    // Constants are part of the genome and appear inline in the text form.
    let affine = Genome::parse_text("x0 2.5 * 1 +").unwrap();
    println!("affine with constants {:?}:", affine.constants());
    show(&affine, &[4.0]);

    // Any non-finite intermediate value makes the whole case invalid.
    let fragile = Genome::parse_text("x0 inv").unwrap();
    println!("1/x0 near and at the pole:");
    show(&fragile, &[0.5]);
    show(&fragile, &[0.0]);

    // Malformed programs are rejected with the offending token position.
    for bad in ["x0 +", "x0 x1", "x0 woble *"] {
        println!("  {bad:?} -> {}", Genome::parse_text(bad).unwrap_err());
    }

    // stack_effect is the static check behind genome validity.
    let effect = stack_effect(dot.code());
    println!(
        "dot product stack effect: max_deficit={} final_depth={}",
        effect.max_deficit, effect.final_depth
    );

    // Mutation always yields a valid genome; watch one drift for a while.
    let cfg = GenomeConfig::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut current = dot;
    println!("ten mutation steps:");
    for step in 1..=10 {
        current = mutate(&current, &mut rng, &cfg);
        assert!(current.validate());
        println!("  step {step:2}: {}", current.to_text());
    }
}
