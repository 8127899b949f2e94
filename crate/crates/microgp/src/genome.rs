//! The genome language: linear RPN programs with embedded constants.
//!
//! A program is a flat instruction sequence evaluated by a single stack pass.
//! Every public constructor (random generation, mutation, repair, parsing)
//! guarantees the stack-validity invariant: the stack never underflows and
//! exactly one value remains at the end. Evaluation is pure; any non-finite
//! intermediate poisons the whole fitness case to [`EvalOutcome::Invalid`].

use std::fmt;

use rand::prelude::*;
use rand_distr::Normal;
use thiserror::Error;

/// Unary operators of the instruction set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Sq,
    Sqrt,
    Inv,
    Cos,
    Sin,
    Tan,
    Acos,
    Asin,
    Atan,
    Tanh,
    Log,
    Exp,
}

/// Binary operators of the instruction set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub const UNARY_OPS: [UnaryOp; 12] = [
    UnaryOp::Sq,
    UnaryOp::Sqrt,
    UnaryOp::Inv,
    UnaryOp::Cos,
    UnaryOp::Sin,
    UnaryOp::Tan,
    UnaryOp::Acos,
    UnaryOp::Asin,
    UnaryOp::Atan,
    UnaryOp::Tanh,
    UnaryOp::Log,
    UnaryOp::Exp,
];

pub const BINARY_OPS: [BinaryOp; 4] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div];

impl UnaryOp {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Sq => x * x,
            UnaryOp::Sqrt => x.sqrt(),
            UnaryOp::Inv => 1.0 / x,
            UnaryOp::Cos => x.cos(),
            UnaryOp::Sin => x.sin(),
            UnaryOp::Tan => x.tan(),
            UnaryOp::Acos => x.acos(),
            UnaryOp::Asin => x.asin(),
            UnaryOp::Atan => x.atan(),
            UnaryOp::Tanh => x.tanh(),
            UnaryOp::Log => x.ln(),
            UnaryOp::Exp => x.exp(),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            UnaryOp::Sq => "sq",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Inv => "inv",
            UnaryOp::Cos => "cos",
            UnaryOp::Sin => "sin",
            UnaryOp::Tan => "tan",
            UnaryOp::Acos => "acos",
            UnaryOp::Asin => "asin",
            UnaryOp::Atan => "atan",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Log => "log",
            UnaryOp::Exp => "exp",
        }
    }
}

impl BinaryOp {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

/// One instruction of a linear RPN program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    /// Push input variable `x<i>`.
    PushVar(usize),
    /// Push an entry of the genome's constant table.
    PushConst(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

impl Instruction {
    /// Operands consumed from the stack.
    #[inline]
    pub fn operands(self) -> usize {
        match self {
            Instruction::PushVar(_) | Instruction::PushConst(_) => 0,
            Instruction::Unary(_) => 1,
            Instruction::Binary(_) => 2,
        }
    }

    /// Net change in stack depth.
    #[inline]
    pub fn net_effect(self) -> isize {
        match self {
            Instruction::PushVar(_) | Instruction::PushConst(_) => 1,
            Instruction::Unary(_) => 0,
            Instruction::Binary(_) => -1,
        }
    }
}

/// Outcome of evaluating one fitness case.
///
/// `Finite` never wraps a NaN or infinity; anything non-finite produced
/// during execution collapses the case to `Invalid`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalOutcome {
    Finite(f64),
    Invalid,
}

impl EvalOutcome {
    /// Wrap a raw value, demoting non-finite values to `Invalid`.
    #[inline]
    pub fn from_value(v: f64) -> Self {
        if v.is_finite() {
            EvalOutcome::Finite(v)
        } else {
            EvalOutcome::Invalid
        }
    }

    #[inline]
    pub fn is_valid(self) -> bool {
        matches!(self, EvalOutcome::Finite(_))
    }

    #[inline]
    pub fn value(self) -> Option<f64> {
        match self {
            EvalOutcome::Finite(v) => Some(v),
            EvalOutcome::Invalid => None,
        }
    }
}

/// Relative weights of the mutation operators.
#[derive(Debug, Clone)]
pub struct MutationWeights {
    pub point_replace: f64,
    pub insert: f64,
    pub delete: f64,
    pub const_perturb: f64,
    pub const_replace: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights {
            point_replace: 0.35,
            insert: 0.15,
            delete: 0.15,
            const_perturb: 0.25,
            const_replace: 0.10,
        }
    }
}

/// Parameters for genome construction and mutation.
#[derive(Debug, Clone)]
pub struct GenomeConfig {
    /// Number of input variables of the problem.
    pub arity: usize,
    /// Minimum instruction count.
    pub min_len: usize,
    /// Maximum instruction count.
    pub max_len: usize,
    /// Range fresh constants are drawn from.
    pub const_range: (f64, f64),
    /// Maximum size of the constant table.
    pub const_count_max: usize,
    pub weights: MutationWeights,
    /// When a push is emitted, probability it is a variable rather than a
    /// constant.
    pub var_bias: f64,
}

impl GenomeConfig {
    pub fn new(arity: usize) -> Self {
        assert!(arity >= 1, "arity must be at least 1");
        GenomeConfig {
            arity,
            min_len: 3,
            max_len: 64,
            const_range: (-5.0, 5.0),
            const_count_max: 8,
            weights: MutationWeights::default(),
            var_bias: 0.75,
        }
    }

    fn check(&self) {
        assert!(self.min_len >= 1 && self.min_len <= self.max_len);
        assert!(self.const_range.0 <= self.const_range.1);
    }
}

/// A linear RPN program: instruction sequence plus its constant table.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    code: Vec<Instruction>,
    constants: Vec<f64>,
}

/// Result of simulating stack arithmetic over an instruction sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackEffect {
    /// Largest pre-instruction operand deficit encountered (0 for a program
    /// that never underflows).
    pub max_deficit: usize,
    /// Stack depth after the last instruction, counting underflows negative.
    pub final_depth: isize,
}

/// Simulate stack arithmetic without evaluating.
pub fn stack_effect(code: &[Instruction]) -> StackEffect {
    let mut depth: isize = 0;
    let mut max_deficit: isize = 0;
    for ins in code {
        let deficit = ins.operands() as isize - depth;
        if deficit > max_deficit {
            max_deficit = deficit;
        }
        depth += ins.net_effect();
    }
    StackEffect {
        max_deficit: max_deficit.max(0) as usize,
        final_depth: depth,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown token `{token}` at position {position}")]
    UnknownToken { position: usize, token: String },
    #[error("operand deficit at token `{token}` (position {position})")]
    OperandDeficit { position: usize, token: String },
    #[error("program leaves {depth} values on the stack, expected exactly 1")]
    FinalDepth { depth: isize },
    #[error("empty program")]
    Empty,
}

impl Genome {
    /// Build a genome from raw parts. The caller is responsible for validity;
    /// use [`Genome::validate`] to check.
    pub fn from_parts(code: Vec<Instruction>, constants: Vec<f64>) -> Self {
        Genome { code, constants }
    }

    pub fn code(&self) -> &[Instruction] {
        &self.code
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Smallest input length this genome can be evaluated on.
    pub fn arity(&self) -> usize {
        self.code
            .iter()
            .filter_map(|ins| match ins {
                Instruction::PushVar(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// True iff the program is stack-valid and all constant references are in
    /// bounds. Variable indices are checked against the input at evaluation
    /// time, not here.
    pub fn validate(&self) -> bool {
        if self.code.is_empty() {
            return false;
        }
        let effect = stack_effect(&self.code);
        if effect.max_deficit != 0 || effect.final_depth != 1 {
            return false;
        }
        self.code.iter().all(|ins| match ins {
            Instruction::PushConst(i) => *i < self.constants.len(),
            _ => true,
        })
    }

    /// Evaluate on one fitness case.
    pub fn eval(&self, inputs: &[f64]) -> EvalOutcome {
        let mut stack = Vec::with_capacity(self.code.len());
        self.eval_with(inputs, &mut stack)
    }

    /// Evaluate reusing a caller-owned stack buffer. This is the hot path for
    /// batched evaluation: one buffer serves every case of a batch.
    pub fn eval_with(&self, inputs: &[f64], stack: &mut Vec<f64>) -> EvalOutcome {
        stack.clear();
        for ins in &self.code {
            let v = match *ins {
                Instruction::PushVar(i) => match inputs.get(i) {
                    Some(&x) => x,
                    None => return EvalOutcome::Invalid,
                },
                Instruction::PushConst(i) => match self.constants.get(i) {
                    Some(&c) => c,
                    None => return EvalOutcome::Invalid,
                },
                Instruction::Unary(op) => match stack.pop() {
                    Some(a) => op.apply(a),
                    None => return EvalOutcome::Invalid,
                },
                Instruction::Binary(op) => {
                    let b = match stack.pop() {
                        Some(b) => b,
                        None => return EvalOutcome::Invalid,
                    };
                    let a = match stack.pop() {
                        Some(a) => a,
                        None => return EvalOutcome::Invalid,
                    };
                    op.apply(a, b)
                }
            };
            if !v.is_finite() {
                return EvalOutcome::Invalid;
            }
            stack.push(v);
        }
        match (stack.pop(), stack.is_empty()) {
            (Some(v), true) => EvalOutcome::Finite(v),
            _ => EvalOutcome::Invalid,
        }
    }

    /// Whitespace-separated RPN text: `x<i>` for variables, decimal literals
    /// for constants, operator tokens for operators.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, ins) in self.code.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match ins {
                Instruction::PushVar(v) => {
                    out.push('x');
                    out.push_str(&v.to_string());
                }
                Instruction::PushConst(c) => {
                    out.push_str(&format_constant(self.constants[*c]));
                }
                Instruction::Unary(op) => out.push_str(op.token()),
                Instruction::Binary(op) => out.push_str(op.token()),
            }
        }
        out
    }

    /// Parse RPN text. Token positions in errors are 1-based.
    pub fn parse_text(text: &str) -> Result<Genome, ParseError> {
        let mut code = Vec::new();
        let mut constants = Vec::new();
        let mut depth: isize = 0;
        let mut any = false;
        for (idx, token) in text.split_whitespace().enumerate() {
            any = true;
            let position = idx + 1;
            let ins = parse_token(token).ok_or_else(|| ParseError::UnknownToken {
                position,
                token: token.to_string(),
            })?;
            let ins = match ins {
                Token::Instruction(i) => i,
                Token::Constant(c) => {
                    constants.push(c);
                    Instruction::PushConst(constants.len() - 1)
                }
            };
            if depth < ins.operands() as isize {
                return Err(ParseError::OperandDeficit {
                    position,
                    token: token.to_string(),
                });
            }
            depth += ins.net_effect();
            code.push(ins);
        }
        if !any {
            return Err(ParseError::Empty);
        }
        if depth != 1 {
            return Err(ParseError::FinalDepth { depth });
        }
        Ok(Genome { code, constants })
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn format_constant(c: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips exactly,
    // but prints integral values without a decimal point; keep them
    // distinguishable from variable indices by always parsing digits as
    // constants, so plain "{}" is fine.
    format!("{c}")
}

enum Token {
    Instruction(Instruction),
    Constant(f64),
}

fn parse_token(token: &str) -> Option<Token> {
    for op in UNARY_OPS {
        if token == op.token() {
            return Some(Token::Instruction(Instruction::Unary(op)));
        }
    }
    for op in BINARY_OPS {
        if token == op.token() {
            return Some(Token::Instruction(Instruction::Binary(op)));
        }
    }
    if let Some(rest) = token.strip_prefix('x') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return rest.parse().ok().map(|i| Token::Instruction(Instruction::PushVar(i)));
        }
    }
    match token.parse::<f64>() {
        Ok(c) if c.is_finite() => Some(Token::Constant(c)),
        _ => None,
    }
}

/// True iff a program state of `depth` values with `rem` instructions left
/// can still end at depth exactly 1.
#[inline]
fn can_finish(depth: isize, rem: usize) -> bool {
    let rem = rem as isize;
    depth + rem >= 1 && depth - rem <= 1
}

fn random_push<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &GenomeConfig,
    constants: &mut Vec<f64>,
) -> Instruction {
    let can_const = cfg.const_count_max > 0 || !constants.is_empty();
    if !can_const || rng.random::<f64>() < cfg.var_bias {
        return Instruction::PushVar(rng.random_range(0..cfg.arity));
    }
    // Reuse an existing table entry or mint a fresh one while room remains.
    if !constants.is_empty() && (constants.len() >= cfg.const_count_max || rng.random::<f64>() < 0.5)
    {
        Instruction::PushConst(rng.random_range(0..constants.len()))
    } else {
        constants.push(rng.random_range(cfg.const_range.0..=cfg.const_range.1));
        Instruction::PushConst(constants.len() - 1)
    }
}

/// Relative frequency of instruction classes (push, unary, binary) in
/// random construction. An RPN expression structurally needs one more push
/// than it has binary operators, while unaries are decorations, so a
/// push/binary-heavy prior concentrates random programs on compositional
/// arithmetic instead of stacks of transcendental wrappers.
const KIND_WEIGHTS: [f64; 3] = [0.4, 0.2, 0.4];

/// Pick an instruction class by `KIND_WEIGHTS` among the legal ones.
fn pick_kind<R: Rng + ?Sized>(rng: &mut R, legal: [bool; 3]) -> usize {
    let total: f64 = KIND_WEIGHTS
        .iter()
        .zip(legal)
        .filter_map(|(w, l)| l.then_some(w))
        .sum();
    let mut t = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, (&w, l)) in KIND_WEIGHTS.iter().zip(legal).enumerate() {
        if l {
            if t < w {
                return i;
            }
            t -= w;
            last = i;
        }
    }
    last
}

fn random_instruction<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &GenomeConfig,
    constants: &mut Vec<f64>,
) -> Instruction {
    match pick_kind(rng, [true; 3]) {
        0 => random_push(rng, cfg, constants),
        1 => Instruction::Unary(*UNARY_OPS.choose(rng).unwrap()),
        _ => Instruction::Binary(*BINARY_OPS.choose(rng).unwrap()),
    }
}

/// Generate a random stack-valid genome with length uniform in
/// `[min_len, max_len]`.
///
/// Construction only ever emits an instruction that is legal at the current
/// simulated depth and still allows the program to close at depth 1, so the
/// result always validates.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R, cfg: &GenomeConfig) -> Genome {
    cfg.check();
    let len = rng.random_range(cfg.min_len..=cfg.max_len);
    let mut code = Vec::with_capacity(len);
    let mut constants = Vec::new();
    let mut depth: isize = 0;
    for i in 0..len {
        let rem = len - i - 1;
        let legal = [
            can_finish(depth + 1, rem),
            depth >= 1 && can_finish(depth, rem),
            depth >= 2 && can_finish(depth - 1, rem),
        ];
        debug_assert!(
            legal.iter().any(|&l| l),
            "no legal instruction at depth {depth} with {rem} remaining"
        );
        let ins = match pick_kind(rng, legal) {
            0 => random_push(rng, cfg, &mut constants),
            1 => Instruction::Unary(*UNARY_OPS.choose(rng).unwrap()),
            _ => Instruction::Binary(*BINARY_OPS.choose(rng).unwrap()),
        };
        depth += ins.net_effect();
        code.push(ins);
    }
    debug_assert_eq!(depth, 1);
    Genome { code, constants }
}

/// Turn an arbitrary instruction sequence into a stack-valid genome within
/// the configured length bounds.
///
/// Operand deficits are fixed by a fair coin per deficit point: either pushes
/// are inserted in front of the starving instruction or the instruction is
/// dropped. Excess final depth is reduced the same way, by appending binary
/// reductions or removing surplus pushes. Minimal edits are not attempted.
pub fn repair<R: Rng + ?Sized>(genome: &Genome, rng: &mut R, cfg: &GenomeConfig) -> Genome {
    cfg.check();
    let mut constants = genome.constants.clone();
    let mut out: Vec<Instruction> = Vec::with_capacity(genome.code.len() + 4);
    let mut depth: isize = 0;

    // Fix operand deficits in one forward pass.
    'instr: for &ins in &genome.code {
        if let Instruction::PushConst(i) = ins {
            if i >= constants.len() {
                // Dangling constant reference; re-point it into the table.
                let fixed = random_push(rng, cfg, &mut constants);
                depth += 1;
                out.push(fixed);
                continue;
            }
        }
        while depth < ins.operands() as isize {
            if rng.random::<bool>() {
                out.push(random_push(rng, cfg, &mut constants));
                depth += 1;
            } else {
                continue 'instr; // truncate: drop the starving instruction
            }
        }
        depth += ins.net_effect();
        out.push(ins);
    }

    if out.is_empty() {
        out.push(random_push(rng, cfg, &mut constants));
        depth = 1;
    }

    // Reduce surplus depth down to exactly 1.
    while depth > 1 {
        if rng.random::<bool>() {
            out.push(Instruction::Binary(*BINARY_OPS.choose(rng).unwrap()));
            depth -= 1;
        } else if let Some(j) = removable_push(&out) {
            out.remove(j);
            depth -= 1;
        } else {
            out.push(Instruction::Binary(*BINARY_OPS.choose(rng).unwrap()));
            depth -= 1;
        }
    }

    enforce_length_bounds(&mut out, rng, cfg, &mut constants);
    let g = Genome { code: out, constants };
    debug_assert!(g.validate());
    g
}

/// Index of the last push whose removal keeps the prefix stack-valid, if any.
fn removable_push(code: &[Instruction]) -> Option<usize> {
    // Removing a push at j lowers the depth seen by everything after j by 1.
    let mut depth_before = Vec::with_capacity(code.len());
    let mut depth: isize = 0;
    for ins in code {
        depth_before.push(depth);
        depth += ins.net_effect();
    }
    'candidate: for j in (0..code.len()).rev() {
        if code[j].operands() != 0 {
            continue;
        }
        for t in j + 1..code.len() {
            if depth_before[t] - 1 < code[t].operands() as isize {
                continue 'candidate;
            }
        }
        return Some(j);
    }
    None
}

fn enforce_length_bounds<R: Rng + ?Sized>(
    code: &mut Vec<Instruction>,
    rng: &mut R,
    cfg: &GenomeConfig,
    constants: &mut Vec<f64>,
) {
    if code.len() > cfg.max_len {
        // Cut to a prefix whose surplus depth still fits within max_len once
        // closed with binary reductions. A prefix of length 1 (a push, since
        // valid programs start with one) always qualifies.
        let mut depth: isize = 0;
        let mut cut = 1;
        let mut cut_depth = 1;
        for (i, ins) in code.iter().enumerate() {
            depth += ins.net_effect();
            let len = i + 1;
            if depth >= 1 && len + (depth as usize - 1) <= cfg.max_len {
                cut = len;
                cut_depth = depth;
            }
        }
        code.truncate(cut);
        for _ in 1..cut_depth {
            code.push(Instruction::Binary(*BINARY_OPS.choose(rng).unwrap()));
        }
    }
    while code.len() < cfg.min_len {
        code.push(Instruction::Unary(*UNARY_OPS.choose(rng).unwrap()));
    }
    compact_constants(code, constants);
}

/// Drop constants no instruction references, remapping the survivors.
fn compact_constants(code: &mut [Instruction], constants: &mut Vec<f64>) {
    let mut remap = vec![usize::MAX; constants.len()];
    let mut kept = 0;
    for ins in code.iter() {
        if let Instruction::PushConst(i) = ins {
            if remap[*i] == usize::MAX {
                remap[*i] = kept;
                kept += 1;
            }
        }
    }
    if kept == constants.len() {
        return;
    }
    let old = std::mem::take(constants);
    constants.resize(kept, 0.0);
    for (i, value) in old.into_iter().enumerate() {
        if remap[i] != usize::MAX {
            constants[remap[i]] = value;
        }
    }
    for ins in code.iter_mut() {
        if let Instruction::PushConst(i) = ins {
            *i = remap[*i];
        }
    }
}

/// Apply one mutation operator, chosen by the configured weights, and return
/// a new genome. The result always validates and differs from the input.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rng: &mut R, cfg: &GenomeConfig) -> Genome {
    debug_assert!(genome.validate());
    for _ in 0..32 {
        let child = mutate_once(genome, rng, cfg);
        if child != *genome {
            debug_assert!(child.validate());
            return child;
        }
    }
    // Degenerate configs (e.g. arity 1, length 1, no constants) can make
    // distinct results improbable; fall back to a fresh genome.
    random_genome(rng, cfg)
}

fn mutate_once<R: Rng + ?Sized>(genome: &Genome, rng: &mut R, cfg: &GenomeConfig) -> Genome {
    let w = &cfg.weights;
    let has_consts = !genome.constants.is_empty();
    let can_insert = genome.len() < cfg.max_len;
    let can_delete = genome.len() > cfg.min_len;
    let weights = [
        w.point_replace,
        if can_insert { w.insert } else { 0.0 },
        if can_delete { w.delete } else { 0.0 },
        if has_consts { w.const_perturb } else { 0.0 },
        if has_consts { w.const_replace } else { 0.0 },
    ];
    let total: f64 = weights.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut op = 0;
    for (i, &wi) in weights.iter().enumerate() {
        if pick < wi {
            op = i;
            break;
        }
        pick -= wi;
    }

    let mut code = genome.code.clone();
    let mut constants = genome.constants.clone();
    match op {
        0 => {
            let i = rng.random_range(0..code.len());
            code[i] = random_instruction(rng, cfg, &mut constants);
        }
        1 => {
            let i = rng.random_range(0..=code.len());
            code.insert(i, random_instruction(rng, cfg, &mut constants));
        }
        2 => {
            let i = rng.random_range(0..code.len());
            code.remove(i);
        }
        3 => {
            let i = rng.random_range(0..constants.len());
            let sigma = 0.1 * constants[i].abs() + 0.01;
            let delta: f64 = Normal::new(0.0, sigma).unwrap().sample(rng);
            let c = constants[i] + delta;
            constants[i] = if c.is_finite() { c } else { constants[i] };
        }
        _ => {
            let i = rng.random_range(0..constants.len());
            constants[i] = rng.random_range(cfg.const_range.0..=cfg.const_range.1);
        }
    }

    let mut candidate = Genome { code, constants };
    if candidate.validate() && candidate.len() >= cfg.min_len && candidate.len() <= cfg.max_len {
        compact_constants(&mut candidate.code, &mut candidate.constants);
        candidate
    } else {
        repair(&candidate, rng, cfg)
    }
}
