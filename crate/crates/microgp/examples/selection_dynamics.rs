//! Watch the sampled-microcosm control loop hold a population at a soft
//! target, then follow a stepped schedule through its drop.
//!
//! Fitness is random here on purpose: population control is independent of
//! what the scores mean.

use microgp::evaluator::Arena;
use microgp::genome::{random_genome, GenomeConfig};
use microgp::selection::{
    sample_microcosm, step_population, ControlParams, PopulationSchedule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn run_schedule(schedule: &PopulationSchedule, generations: u64, seed: u64) {
    let params = ControlParams::default();
    let cfg = GenomeConfig::new(3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arena = Arena::with_capacity(2 * schedule.max_target());
    for _ in 0..schedule.target_for_generation(0) {
        arena.acquire(random_genome(&mut rng, &cfg), 0).unwrap();
    }

    println!("schedule {schedule}:");
    for g in 0..generations {
        for slot in arena.alive_slots() {
            arena.get_mut(slot).score = rng.random();
        }
        let table = sample_microcosm(&arena, &mut rng, params.k);
        let target = schedule.target_for_generation(g);
        let delta =
            step_population(&mut arena, &table, target, &mut rng, &params, &cfg, g + 1).unwrap();
        if g % 5 == 0 || (18..=30).contains(&g) {
            println!(
                "  gen {g:3}  target {target:6}  alive {:6}  (+{} births, -{} deaths)",
                delta.alive_after, delta.births, delta.deaths
            );
        }
    }
    println!(
        "  arena: {} fresh slots ever constructed, {} recycled in the dead pool",
        arena.fresh_slots_created(),
        arena.dead_pool_len()
    );
}

fn main() {
    run_schedule(&PopulationSchedule::constant(10_000), 40, 1);
    run_schedule(&PopulationSchedule::parse("0:20000,20:1000").unwrap(), 40, 2);
}
