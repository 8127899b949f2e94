//! Batched population evaluation over a recycled individual arena.
//!
//! The arena never deallocates slots: storage from dead individuals goes to
//! a LIFO dead pool and is recycled for newborns, so a stable-size
//! generation loop constructs no new slots after warm-up.
//!
//! Dispatch contract: the unit of outer parallelism is the individual, the
//! unit of inner work is the fitness case. Each individual's batch is
//! evaluated sequentially by whichever worker owns it, so results are
//! bitwise identical for any worker count or chunk size.

use rayon::prelude::*;
use thiserror::Error;

use crate::fitness::{correlation, score, tally, FitnessConfig};
use crate::genome::{stack_effect, BinaryOp, EvalOutcome, Genome, Instruction, UnaryOp};

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("arena is full (capacity {capacity})")]
    Capacity { capacity: usize },
}

/// One population member living in an arena slot.
#[derive(Debug, Clone)]
pub struct Individual {
    pub slot_id: usize,
    pub genome: Genome,
    /// Fitness from the most recent evaluation; NaN until first evaluated.
    pub score: f64,
    pub alive: bool,
    pub birth_generation: u64,
}

/// Fixed-capacity individual storage with a LIFO dead pool.
#[derive(Debug)]
pub struct Arena {
    slots: Vec<Individual>,
    dead_pool: Vec<usize>,
    capacity: usize,
    alive_count: usize,
    fresh_slots_created: u64,
}

impl Arena {
    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity >= 1);
        Arena {
            slots: Vec::new(),
            dead_pool: Vec::new(),
            capacity,
            alive_count: 0,
            fresh_slots_created: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn alive_count(&self) -> usize {
        self.alive_count
    }

    pub fn dead_pool_len(&self) -> usize {
        self.dead_pool.len()
    }

    /// Total slots ever constructed; stable once the arena is warmed up.
    pub fn fresh_slots_created(&self) -> u64 {
        self.fresh_slots_created
    }

    /// Place a genome into a slot, preferring dead-pool reuse over fresh
    /// construction. Returns the slot id.
    pub fn acquire(&mut self, genome: Genome, birth_generation: u64) -> Result<usize, ArenaError> {
        if let Some(slot_id) = self.dead_pool.pop() {
            let ind = &mut self.slots[slot_id];
            debug_assert!(!ind.alive);
            ind.genome = genome;
            ind.score = f64::NAN;
            ind.alive = true;
            ind.birth_generation = birth_generation;
            self.alive_count += 1;
            return Ok(slot_id);
        }
        if self.slots.len() >= self.capacity {
            return Err(ArenaError::Capacity { capacity: self.capacity });
        }
        let slot_id = self.slots.len();
        self.slots.push(Individual {
            slot_id,
            genome,
            score: f64::NAN,
            alive: true,
            birth_generation,
        });
        self.fresh_slots_created += 1;
        self.alive_count += 1;
        Ok(slot_id)
    }

    /// Kill an individual and return its slot to the dead pool.
    pub fn release(&mut self, slot_id: usize) {
        let ind = &mut self.slots[slot_id];
        assert!(ind.alive, "release of a dead slot {slot_id}");
        ind.alive = false;
        self.dead_pool.push(slot_id);
        self.alive_count -= 1;
    }

    pub fn get(&self, slot_id: usize) -> &Individual {
        &self.slots[slot_id]
    }

    pub fn get_mut(&mut self, slot_id: usize) -> &mut Individual {
        &mut self.slots[slot_id]
    }

    /// Iterate over alive individuals.
    pub fn alive(&self) -> impl Iterator<Item = &Individual> {
        self.slots.iter().filter(|i| i.alive)
    }

    /// Slot ids of alive individuals, in slot order.
    pub fn alive_slots(&self) -> Vec<usize> {
        self.slots
            .iter()
            .filter(|i| i.alive)
            .map(|i| i.slot_id)
            .collect()
    }
}

/// Evaluation accounting across a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// One per individual per generation.
    pub total_model_evaluations: u64,
    /// Individuals times cases.
    pub total_case_evaluations: u64,
}

/// A batch of fitness cases: inputs row-major, one target outcome per case.
#[derive(Debug, Clone)]
pub struct DatasetBatch {
    inputs: Vec<f64>,
    targets: Vec<EvalOutcome>,
    arity: usize,
}

impl DatasetBatch {
    pub fn new(inputs: Vec<f64>, targets: Vec<EvalOutcome>, arity: usize) -> Self {
        assert!(arity >= 1);
        assert!(!targets.is_empty(), "a batch needs at least one case");
        assert!(targets.len() <= 1024, "at most 1024 cases per batch");
        assert_eq!(inputs.len(), targets.len() * arity, "input row count must match target count");
        DatasetBatch { inputs, targets, arity }
    }

    pub fn n_cases(&self) -> usize {
        self.targets.len()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn case(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.arity..(i + 1) * self.arity]
    }

    pub fn targets(&self) -> &[EvalOutcome] {
        &self.targets
    }

    /// Restrict to the first `n` cases.
    pub fn truncated(&self, n: usize) -> DatasetBatch {
        assert!(n >= 1 && n <= self.n_cases());
        DatasetBatch {
            inputs: self.inputs[..n * self.arity].to_vec(),
            targets: self.targets[..n].to_vec(),
            arity: self.arity,
        }
    }
}

/// Batch inputs transposed to one column per variable, for case-parallel
/// execution: the VM interprets each instruction once and applies it across
/// every case, so dispatch cost is paid per instruction instead of per
/// instruction per case, and the arithmetic inner loops vectorize.
pub struct ColumnBatch {
    cols: Vec<f64>,
    n: usize,
    arity: usize,
}

impl ColumnBatch {
    pub fn new(batch: &DatasetBatch) -> Self {
        let n = batch.n_cases();
        let arity = batch.arity();
        let mut cols = vec![0.0; n * arity];
        for i in 0..n {
            for (v, &x) in batch.case(i).iter().enumerate() {
                cols[v * n + i] = x;
            }
        }
        ColumnBatch { cols, n, arity }
    }

    pub fn n_cases(&self) -> usize {
        self.n
    }

    #[inline]
    fn col(&self, v: usize) -> &[f64] {
        &self.cols[v * self.n..(v + 1) * self.n]
    }
}

/// Reusable stack/flag buffers for [`eval_genome_batch`].
#[derive(Default)]
pub struct ColumnScratch {
    stack: Vec<f64>,
    bad: Vec<bool>,
}

#[inline]
fn apply_unary_col(a: &mut [f64], bad: &mut [bool], op: UnaryOp) {
    // One monomorphic loop per operator, so the operator dispatch sits
    // outside the loop and each body inlines `UnaryOp::apply` at a constant.
    macro_rules! arm {
        ($v:ident) => {{
            for (x, b) in a.iter_mut().zip(bad.iter_mut()) {
                let v = UnaryOp::$v.apply(*x);
                *b |= !v.is_finite();
                *x = v;
            }
        }};
    }
    match op {
        UnaryOp::Sq => arm!(Sq),
        UnaryOp::Sqrt => arm!(Sqrt),
        UnaryOp::Inv => arm!(Inv),
        UnaryOp::Cos => arm!(Cos),
        UnaryOp::Sin => arm!(Sin),
        UnaryOp::Tan => arm!(Tan),
        UnaryOp::Acos => arm!(Acos),
        UnaryOp::Asin => arm!(Asin),
        UnaryOp::Atan => arm!(Atan),
        UnaryOp::Tanh => arm!(Tanh),
        UnaryOp::Log => arm!(Log),
        UnaryOp::Exp => arm!(Exp),
    }
}

#[inline]
fn apply_binary_col(a: &mut [f64], b: &[f64], bad: &mut [bool], op: BinaryOp) {
    macro_rules! arm {
        ($v:ident) => {{
            for ((x, &y), bd) in a.iter_mut().zip(b.iter()).zip(bad.iter_mut()) {
                let v = BinaryOp::$v.apply(*x, y);
                *bd |= !v.is_finite();
                *x = v;
            }
        }};
    }
    match op {
        BinaryOp::Add => arm!(Add),
        BinaryOp::Sub => arm!(Sub),
        BinaryOp::Mul => arm!(Mul),
        BinaryOp::Div => arm!(Div),
    }
}

/// Evaluate `genome` against every case of the batch at once, writing one
/// outcome per case. Produces exactly the outcomes of [`Genome::eval_with`]
/// case by case: same operations in the same order per lane, with a sticky
/// invalid flag standing in for the scalar VM's early return.
pub fn eval_genome_batch(
    genome: &Genome,
    columns: &ColumnBatch,
    scratch: &mut ColumnScratch,
    outcomes: &mut Vec<EvalOutcome>,
) {
    let n = columns.n;
    outcomes.clear();
    // Shape problems — stack underflow, leftover operands, out-of-range
    // operand indexes — are case-independent and invalidate every case.
    let effect = stack_effect(genome.code());
    let operands_ok = genome.code().iter().all(|ins| match *ins {
        Instruction::PushVar(v) => v < columns.arity,
        Instruction::PushConst(c) => c < genome.constants().len(),
        _ => true,
    });
    if effect.max_deficit > 0 || effect.final_depth != 1 || !operands_ok {
        outcomes.resize(n, EvalOutcome::Invalid);
        return;
    }

    let mut height = 0isize;
    let mut max_height = 0isize;
    for ins in genome.code() {
        height += ins.net_effect();
        max_height = max_height.max(height);
    }
    scratch.stack.clear();
    scratch.stack.resize(max_height as usize * n, 0.0);
    scratch.bad.clear();
    scratch.bad.resize(n, false);
    let stack = scratch.stack.as_mut_slice();
    let bad = scratch.bad.as_mut_slice();

    let mut d = 0usize;
    for ins in genome.code() {
        // Once every lane is invalid the outcome is settled; bail out like
        // the scalar VM's early return. The scan is cheap next to an
        // instruction's arithmetic.
        if bad.iter().all(|&b| b) {
            outcomes.resize(n, EvalOutcome::Invalid);
            return;
        }
        match *ins {
            Instruction::PushVar(v) => {
                let dst = &mut stack[d * n..(d + 1) * n];
                for ((slot, &x), b) in dst.iter_mut().zip(columns.col(v)).zip(bad.iter_mut()) {
                    *b |= !x.is_finite();
                    *slot = x;
                }
                d += 1;
            }
            Instruction::PushConst(c) => {
                let value = genome.constants()[c];
                if !value.is_finite() {
                    bad.fill(true);
                }
                stack[d * n..(d + 1) * n].fill(value);
                d += 1;
            }
            Instruction::Unary(op) => {
                apply_unary_col(&mut stack[(d - 1) * n..d * n], bad, op);
            }
            Instruction::Binary(op) => {
                let (lo, hi) = stack.split_at_mut((d - 1) * n);
                apply_binary_col(&mut lo[(d - 2) * n..], &hi[..n], bad, op);
                d -= 1;
            }
        }
    }
    debug_assert_eq!(d, 1);
    for (j, &flagged) in bad.iter().enumerate() {
        outcomes.push(if flagged { EvalOutcome::Invalid } else { EvalOutcome::Finite(stack[j]) });
    }
}

/// Evaluate every alive individual against the batch, caching scores in the
/// arena and updating `stats`. Results are independent of worker count.
pub fn evaluate_population(
    arena: &mut Arena,
    batch: &DatasetBatch,
    config: &FitnessConfig,
    stats: &mut EvalStats,
) {
    let slots = arena.alive_slots();
    evaluate_slots(arena, &slots, batch, config, stats);
}

/// Like [`evaluate_population`] but processing at most `max_chunk`
/// individuals per dispatch. Results are identical for any chunk size.
pub fn evaluate_in_chunks(
    arena: &mut Arena,
    batch: &DatasetBatch,
    config: &FitnessConfig,
    stats: &mut EvalStats,
    max_chunk: usize,
) {
    assert!(max_chunk >= 1);
    let slots = arena.alive_slots();
    for chunk in slots.chunks(max_chunk) {
        evaluate_slots(arena, chunk, batch, config, stats);
    }
}

fn evaluate_slots(
    arena: &mut Arena,
    slots: &[usize],
    batch: &DatasetBatch,
    config: &FitnessConfig,
    stats: &mut EvalStats,
) {
    config.check();
    let columns = ColumnBatch::new(batch);
    let slice: &Vec<Individual> = &arena.slots;
    let scores: Vec<f64> = slots
        .par_iter()
        .map_init(
            || (ColumnScratch::default(), Vec::new()),
            |(scratch, outcomes), &slot| {
                eval_genome_batch(&slice[slot].genome, &columns, scratch, outcomes);
                let corr = correlation(outcomes, batch.targets());
                let t = tally(outcomes, batch.targets());
                score(corr, t, config)
            },
        )
        .collect();
    for (&slot, &score) in slots.iter().zip(&scores) {
        arena.slots[slot].score = score;
    }
    stats.total_model_evaluations += slots.len() as u64;
    stats.total_case_evaluations += slots.len() as u64 * batch.n_cases() as u64;
}
