//! Test-side oracles, written independently of the library's execution
//! paths: a structured interpreter, a closed-form model of the 1:1:8 round
//! schedule for single-certificate runs, and exhaustive enumerators.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use speedup::codec::{length_lex, Bits};
use speedup::proofsys::{work_limit, CostPoly};
use speedup::vm::{ExecOutcome, Instruction, Program};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Halted { output: Vec<bool>, steps: u64 },
    Fault { steps: u64 },
    OutOfSteps,
}

impl Outcome {
    pub fn from_exec(e: &ExecOutcome) -> Outcome {
        match e {
            ExecOutcome::Halted { output, steps } => Outcome::Halted {
                output: output.as_slice().to_vec(),
                steps: *steps,
            },
            ExecOutcome::Fault { steps, .. } => Outcome::Fault { steps: *steps },
            ExecOutcome::BudgetExhausted(_) => Outcome::OutOfSteps,
        }
    }

    /// Same observable result, ignoring step counts.
    pub fn same_result(&self, o: &Outcome) -> bool {
        match (self, o) {
            (Outcome::Halted { output: a, .. }, Outcome::Halted { output: b, .. }) => a == b,
            (Outcome::Fault { .. }, Outcome::Fault { .. }) => true,
            (Outcome::OutOfSteps, Outcome::OutOfSteps) => true,
            _ => false,
        }
    }
}

enum Flow {
    Next,
    Halt,
    Fault,
    Out,
}

struct Interp<'a> {
    ins: &'a [Instruction],
    ends: Vec<usize>,
    regs: [BigUint; 8],
    input: &'a [bool],
    cursor: usize,
    lenient: bool,
    output: Vec<bool>,
    steps: u64,
    budget: u64,
}

impl Interp<'_> {
    fn tick(&mut self) -> bool {
        self.steps += 1;
        self.steps <= self.budget
    }

    /// Runs `[from, to)`, treating each loop as a unit.
    fn block(&mut self, from: usize, to: usize) -> Flow {
        let mut i = from;
        while i < to {
            if !self.tick() {
                return Flow::Out;
            }
            match self.ins[i] {
                Instruction::Halt => return Flow::Halt,
                Instruction::Nop => {}
                Instruction::LoadI(r, v) => self.regs[r as usize] = BigUint::from(v),
                Instruction::Mov(a, b) => self.regs[a as usize] = self.regs[b as usize].clone(),
                Instruction::Add(a, b) => {
                    let v = &self.regs[a as usize] + &self.regs[b as usize];
                    self.regs[a as usize] = v;
                }
                Instruction::Sub(a, b) => {
                    let (x, y) = (&self.regs[a as usize], &self.regs[b as usize]);
                    self.regs[a as usize] = if x > y { x - y } else { BigUint::zero() };
                }
                Instruction::Mul(a, b) => {
                    let v = &self.regs[a as usize] * &self.regs[b as usize];
                    self.regs[a as usize] = v;
                }
                Instruction::Read(r) => match self.input.get(self.cursor) {
                    Some(&b) => {
                        self.regs[r as usize] = BigUint::from(b as u8);
                        self.cursor += 1;
                    }
                    None if self.lenient => {
                        self.regs[r as usize] = BigUint::zero();
                        self.regs[7] = BigUint::from(1u8);
                    }
                    None => return Flow::Fault,
                },
                Instruction::Write(r) => self.output.push(!self.regs[r as usize].is_zero()),
                Instruction::LoopStart(r) => {
                    let end = self.ends[i];
                    let count = self.regs[r as usize].to_u64().unwrap_or(u64::MAX);
                    for _ in 0..count {
                        match self.block(i + 1, end) {
                            Flow::Next => {}
                            f => return f,
                        }
                        // LOOPEND, then the LOOPSTART re-check.
                        if !self.tick() || !self.tick() {
                            return Flow::Out;
                        }
                    }
                    i = end + 1;
                    continue;
                }
                Instruction::LoopEnd => unreachable!("loop ends are consumed by their start"),
                Instruction::Jz(..) | Instruction::Jmp(_) => panic!("oracle is jump-free"),
            }
            i += 1;
        }
        Flow::Next
    }
}

fn loop_ends(ins: &[Instruction]) -> Vec<usize> {
    let mut ends = vec![usize::MAX; ins.len()];
    let mut stack = Vec::new();
    for (i, x) in ins.iter().enumerate() {
        match x {
            Instruction::LoopStart(_) => stack.push(i),
            Instruction::LoopEnd => ends[stack.pop().expect("balanced")] = i,
            _ => {}
        }
    }
    ends
}

/// Reference semantics of a jump-free program.
pub fn oracle_run(p: &Program, x: &[bool], lenient: bool, budget: u64) -> Outcome {
    let ins = p.instructions();
    let mut it = Interp {
        ins,
        ends: loop_ends(ins),
        regs: Default::default(),
        input: x,
        cursor: 0,
        lenient,
        output: Vec::new(),
        steps: 0,
        budget,
    };
    it.regs[0] = BigUint::from(x.len());
    match it.block(0, ins.len()) {
        Flow::Halt => Outcome::Halted {
            output: it.output,
            steps: it.steps,
        },
        Flow::Fault => Outcome::Fault { steps: it.steps },
        // Falling off the end faults without charging a step.
        Flow::Next => Outcome::Fault { steps: it.steps },
        Flow::Out => Outcome::OutOfSteps,
    }
}

/// Every bitstring of length at most `n`.
pub fn all_inputs(n: usize) -> Vec<Vec<bool>> {
    let mut out = vec![Vec::new()];
    for len in 1..=n {
        for v in 0..1u32 << len {
            out.push((0..len).rev().map(|i| (v >> i) & 1 == 1).collect());
        }
    }
    out
}

/// Every well-formed program of at most `max_len` instructions over
/// `alphabet`.
pub fn all_programs(alphabet: &[Instruction], max_len: usize) -> Vec<Program> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        alphabet: &[Instruction],
        max_len: usize,
        depth: i32,
        cur: &mut Vec<Instruction>,
        out: &mut Vec<Program>,
    ) {
        if depth == 0 && !cur.is_empty() {
            out.push(Program::new(cur.clone()).expect("balanced by construction"));
        }
        if cur.len() == max_len {
            return;
        }
        for &i in alphabet {
            let d = match i {
                Instruction::LoopStart(_) => depth + 1,
                Instruction::LoopEnd => depth - 1,
                _ => depth,
            };
            // Leave room to close every open loop.
            if d < 0 || d as usize > max_len - cur.len() - 1 {
                continue;
            }
            cur.push(i);
            rec(alphabet, max_len, d, cur, out);
            cur.pop();
        }
    }
    rec(alphabet, max_len, 0, &mut cur, &mut out);
    out
}

/// Small instruction alphabet for exhaustive sweeps.
pub fn sweep_alphabet() -> Vec<Instruction> {
    use Instruction::*;
    vec![
        Halt,
        Nop,
        LoadI(0, 0),
        LoadI(1, 0),
        LoadI(1, 3),
        Mov(0, 0),
        Mov(1, 1),
        Mov(1, 0),
        Sub(1, 1),
        Sub(0, 0),
        Add(1, 0),
        Mul(1, 0),
        Read(1),
        Write(1),
        Write(0),
        LoopStart(0),
        LoopStart(1),
        LoopEnd,
    ]
}

/// Closed-form model of a round-scheduled run whose proof source is a
/// single scripted certificate at `index` (everything else rejected), with
/// fixed shares. Ticks are 1-based; in each round of ten the first tick
/// goes to A, the second to B and the remaining eight to C.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesPrediction {
    pub t_a: u64,
    pub t_b: u64,
    pub time_m: u64,
    pub halt_period: u64,
    pub halted_with_pprime: bool,
}

pub fn a_tick_global(m: u64) -> u64 {
    10 * (m - 1) + 1
}

pub fn b_tick_global(m: u64) -> u64 {
    10 * (m - 1) + 2
}

pub fn c_tick_global(m: u64) -> u64 {
    let r = (m - 1) / 8;
    10 * r + 3 + (m - 1) % 8
}

#[allow(clippy::too_many_arguments)]
pub fn des_single_cert(
    cert_len: usize,
    index: u64,
    exponent: u32,
    t: &CostPoly,
    time_pstar: u64,
    time_pprime: u64,
) -> DesPrediction {
    // A: each candidate costs its full work limit.
    let w: u64 = (0..index)
        .map(|i| work_limit(length_lex(i).len()))
        .sum::<u64>()
        + work_limit(cert_len);
    let t_a = a_tick_global(w);
    // B ticks strictly before T_A, then one grant every 2^e B ticks.
    let b_before = w - 1;
    let t_b = b_tick_global(b_before + t.evaluator_steps() * (1u64 << exponent));
    // C: period k covers C ticks k..2k-1.
    let mut k = 1u64;
    loop {
        let start = c_tick_global(k);
        let fast = t_b < start;
        let need = if fast { time_pprime } else { time_pstar };
        if need <= k {
            return DesPrediction {
                t_a,
                t_b,
                time_m: c_tick_global(k + need - 1),
                halt_period: k,
                halted_with_pprime: fast,
            };
        }
        k *= 2;
    }
}

pub fn ones(n: usize) -> Bits {
    Bits::from_bools(vec![true; n])
}

/// Grants a VM run consumes before it stops; `None` if it is still running
/// after `budget` steps. A fetch fault takes a grant but no step.
fn grants(e: &ExecOutcome) -> Option<u64> {
    match e {
        ExecOutcome::Halted { steps, .. } => Some(*steps),
        ExecOutcome::Fault { reason, steps } => {
            Some(steps + matches!(reason, speedup::vm::FaultReason::PcOutOfRange) as u64)
        }
        ExecOutcome::BudgetExhausted(_) => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevinOracle {
    pub tick: u64,
    pub program: Program,
    pub y: Bits,
}

struct Dove {
    len: u32,
    program: Program,
    executed: u64,
    demand: Option<u64>,
    solves: Option<Bits>,
}

/// Naive per-tick dovetailer: every valid program of length `l` accrues
/// `2^-l` credit per tick from tick 0; each tick the largest credit of at
/// least one is paid for one step (ties to the shorter, then
/// lexicographically smaller code). A candidate's work is its own run on
/// `x` followed by `g` on the output, cut off at `verify_budget` steps.
pub fn levin_oracle(
    g: &Program,
    x: &Bits,
    verify_budget: u64,
    max_ticks: u64,
) -> Option<LevinOracle> {
    let vm = speedup::vm::Vm::new(speedup::vm::ReadMode::Strict);
    let mut live = Vec::new();
    let max_len = 63 - max_ticks.leading_zeros();
    for len in 1..=max_len {
        for v in 0..1u64 << len {
            let bits = Bits::from_uint(v as u128, len);
            let Ok(p) = Program::decode(&bits) else {
                continue;
            };
            // A length-l code gets at most max_ticks / 2^l grants.
            let run = vm.run(&p, x, max_ticks >> len);
            let (demand, solves) = match (&run, grants(&run)) {
                (ExecOutcome::Halted { output, steps }, _) => {
                    let check = vm.run(g, output, verify_budget);
                    let ok = check.halted_output() == Some(x);
                    let v = grants(&check).unwrap_or(verify_budget);
                    (Some(steps + v), ok.then(|| output.clone()))
                }
                (_, d) => (d, None),
            };
            live.push(Dove {
                len,
                program: p,
                executed: 0,
                demand,
                solves,
            });
        }
    }
    for t in 1..=max_ticks {
        let t = t as u128;
        let mut best: Option<usize> = None;
        for (i, d) in live.iter().enumerate() {
            let step = 1u128 << d.len;
            let key = d.executed as u128 * step;
            if d.demand == Some(d.executed) || key + step > t {
                continue;
            }
            best = match best {
                Some(b) => {
                    let o = &live[b];
                    let ok = o.executed as u128 * (1u128 << o.len);
                    // (t - key) / 2^len against the incumbent's credit.
                    if ((t - key) << o.len) > ((t - ok) << d.len) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
                None => Some(i),
            };
        }
        let Some(b) = best else { continue };
        let d = &mut live[b];
        d.executed += 1;
        if d.demand == Some(d.executed) {
            if let Some(y) = &d.solves {
                return Some(LevinOracle {
                    tick: t as u64,
                    program: d.program.clone(),
                    y: y.clone(),
                });
            }
        }
    }
    None
}

/// Every single catalog step that applies to `p`.
pub fn single_steps(p: &Program) -> Vec<(speedup::proofsys::RewriteStep, Program)> {
    use speedup::proofsys::{apply_rewrite, RewriteStep, CATALOG};
    let mut out = Vec::new();
    for rule in CATALOG {
        for pos in 0..=p.len() as u64 {
            let regs: Vec<Option<u8>> = if rule.params() == 1 {
                (0..8).map(Some).collect()
            } else {
                vec![None]
            };
            for r in regs {
                let step = match r {
                    Some(r) => RewriteStep::with_reg(rule, pos, r),
                    None => RewriteStep::new(rule, pos),
                };
                if let Ok(q) = apply_rewrite(p, &step) {
                    out.push((step, q));
                }
            }
        }
    }
    out
}

/// Exhaustive soundness sweep: every rewrite of every program of at most
/// `max_len` instructions over [`sweep_alphabet`] agrees with the original
/// on all inputs of at most `max_input` bits, and every static bound
/// dominates the measured steps. Returns applications per rule.
pub fn rule_sweep(
    max_len: usize,
    max_input: usize,
) -> Result<std::collections::BTreeMap<speedup::proofsys::Rule, usize>, String> {
    let inputs = all_inputs(max_input);
    let mut applied = std::collections::BTreeMap::new();
    for p in all_programs(&sweep_alphabet(), max_len) {
        let runs: Vec<Outcome> = inputs
            .iter()
            .map(|x| oracle_run(&p, x, false, 1 << 16))
            .collect();
        for (step, q) in single_steps(&p) {
            *applied.entry(step.rule).or_insert(0) += 1;
            for (x, want) in inputs.iter().zip(&runs) {
                let got = oracle_run(&q, x, false, 1 << 16);
                if !got.same_result(want) {
                    return Err(format!(
                        "{step:?} on {} -> {} differs on {x:?}: {want:?} vs {got:?}",
                        p.to_asm(),
                        q.to_asm()
                    ));
                }
            }
        }
        if let Ok(t) = speedup::proofsys::cost_bound(&p) {
            for (x, r) in inputs.iter().zip(&runs) {
                if let Outcome::Halted { steps, .. } = r {
                    if t.eval(x.len() as u64) < (*steps).into() {
                        return Err(format!("bound of {} below {steps} on {x:?}", p.to_asm()));
                    }
                }
            }
        }
    }
    Ok(applied)
}
