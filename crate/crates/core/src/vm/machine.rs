//! Step-counted execution with pause/resume.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::nat::Nat;
use super::program::{Instruction, Program, EOF_REG, NUM_REGS};
use crate::codec::Bits;

/// Bumped whenever instruction semantics change; states from other versions
/// are refused by [`Vm::resume`].
pub const VM_VERSION: u32 = 1;

/// Behaviour of READ once the input is exhausted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadMode {
    /// Fault.
    #[default]
    Strict,
    /// Load 0 and raise the EOF flag register R7.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultReason {
    /// The program counter left the program (fell off the end or jumped
    /// outside it). Detected at fetch, so no step is consumed.
    PcOutOfRange,
    /// Strict-mode READ past the end of input.
    ReadPastEnd,
    /// LOOPEND reached without its LOOPSTART frame on top of the stack.
    LoopMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Halted,
    Faulted(FaultReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("invalid state: {0}")]
    InvalidState(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoopFrame {
    pub pc: u32,
    pub remaining: u64,
}

/// A paused execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineState {
    program: Arc<Program>,
    pc: u64,
    #[serde(with = "nat_regs")]
    regs: [Nat; NUM_REGS as usize],
    loop_stack: Vec<LoopFrame>,
    input: Bits,
    cursor: usize,
    output: Bits,
    steps_used: u64,
    status: Status,
    version: u32,
    mode: ReadMode,
}

mod nat_regs {
    use super::Nat;
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(regs: &[Nat; 8], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(regs.iter().map(|r| r.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Nat; 8], D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let nats = v
            .iter()
            .map(|s| s.parse::<BigUint>().map(Nat::from))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        nats.try_into()
            .map_err(|_| serde::de::Error::custom("expected 8 registers"))
    }
}

impl MachineState {
    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn pc(&self) -> u64 {
        self.pc
    }

    pub fn register(&self, r: u8) -> &Nat {
        &self.regs[r as usize]
    }

    pub fn loop_stack(&self) -> &[LoopFrame] {
        &self.loop_stack
    }

    pub fn input(&self) -> &Bits {
        &self.input
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn output(&self) -> &Bits {
        &self.output
    }

    pub fn steps_used(&self) -> u64 {
        self.steps_used
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// SHA-256 over a canonical serialization of the full state.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.program.to_hex().as_bytes());
        h.update(self.pc.to_be_bytes());
        for r in &self.regs {
            let b = r.to_bytes_be();
            h.update((b.len() as u64).to_be_bytes());
            h.update(&b);
        }
        for f in &self.loop_stack {
            h.update(f.pc.to_be_bytes());
            h.update(f.remaining.to_be_bytes());
        }
        h.update(self.input.to_hex().as_bytes());
        h.update((self.cursor as u64).to_be_bytes());
        h.update(self.output.to_hex().as_bytes());
        h.update(self.steps_used.to_be_bytes());
        h.update(format!("{:?}{}{:?}", self.status, self.version, self.mode).as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecOutcome {
    Halted { output: Bits, steps: u64 },
    BudgetExhausted(Box<MachineState>),
    Fault { reason: FaultReason, steps: u64 },
}

impl ExecOutcome {
    pub fn steps(&self) -> u64 {
        match self {
            ExecOutcome::Halted { steps, .. } | ExecOutcome::Fault { steps, .. } => *steps,
            ExecOutcome::BudgetExhausted(s) => s.steps_used,
        }
    }

    pub fn halted_output(&self) -> Option<&Bits> {
        match self {
            ExecOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }
}

/// The universal machine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Vm {
    pub read_mode: ReadMode,
}

impl Vm {
    pub fn new(read_mode: ReadMode) -> Self {
        Vm { read_mode }
    }

    /// Fresh state with R0 = l(x).
    pub fn start(&self, program: Arc<Program>, x: &Bits) -> MachineState {
        let mut regs: [Nat; NUM_REGS as usize] = Default::default();
        regs[0] = Nat::from(x.len() as u64);
        MachineState {
            program,
            pc: 0,
            regs,
            loop_stack: Vec::new(),
            input: x.clone(),
            cursor: 0,
            output: Bits::new(),
            steps_used: 0,
            status: Status::Running,
            version: VM_VERSION,
            mode: self.read_mode,
        }
    }

    pub fn run(&self, p: &Program, x: &Bits, budget: u64) -> ExecOutcome {
        self.run_arc(Arc::new(p.clone()), x, budget)
    }

    pub fn run_arc(&self, p: Arc<Program>, x: &Bits, budget: u64) -> ExecOutcome {
        self.drive(self.start(p, x), budget)
    }

    pub fn resume(&self, state: MachineState, budget: u64) -> Result<ExecOutcome, VmError> {
        if state.version != VM_VERSION {
            return Err(VmError::InvalidState(format!(
                "state from VM version {}, this is {}",
                state.version, VM_VERSION
            )));
        }
        if state.mode != self.read_mode {
            return Err(VmError::InvalidState("read mode mismatch".into()));
        }
        if state.status != Status::Running {
            return Err(VmError::InvalidState(format!(
                "cannot resume a {:?} state",
                state.status
            )));
        }
        Ok(self.drive(state, budget))
    }

    fn drive(&self, mut s: MachineState, budget: u64) -> ExecOutcome {
        let limit = s.steps_used.saturating_add(budget);
        while s.steps_used < limit {
            match self.step(&mut s) {
                Status::Running => {}
                Status::Halted => {
                    return ExecOutcome::Halted {
                        output: s.output,
                        steps: s.steps_used,
                    }
                }
                Status::Faulted(reason) => {
                    return ExecOutcome::Fault {
                        reason,
                        steps: s.steps_used,
                    }
                }
            }
        }
        ExecOutcome::BudgetExhausted(Box::new(s))
    }

    /// Executes one instruction. A no-op on a state that already stopped.
    #[inline]
    pub fn step(&self, s: &mut MachineState) -> Status {
        if s.status != Status::Running {
            return s.status;
        }
        let prog = &*s.program;
        let Some(&ins) = usize::try_from(s.pc)
            .ok()
            .and_then(|pc| prog.instructions().get(pc))
        else {
            s.status = Status::Faulted(FaultReason::PcOutOfRange);
            return s.status;
        };
        let pc = s.pc as usize;
        s.steps_used += 1;
        let mut next = s.pc + 1;
        use Instruction::*;
        match ins {
            Halt => s.status = Status::Halted,
            Nop => {}
            LoadI(r, v) => s.regs[r as usize] = Nat::from(v),
            Mov(a, b) => s.regs[a as usize] = s.regs[b as usize].clone(),
            Add(a, b) => s.regs[a as usize] = s.regs[a as usize].add(&s.regs[b as usize]),
            Sub(a, b) => {
                s.regs[a as usize] = s.regs[a as usize].saturating_sub(&s.regs[b as usize])
            }
            Mul(a, b) => s.regs[a as usize] = s.regs[a as usize].mul(&s.regs[b as usize]),
            Jz(r, t) => {
                if s.regs[r as usize].is_zero() {
                    next = t;
                }
            }
            Jmp(t) => next = t,
            Read(r) => {
                if let Some(bit) = s.input.get(s.cursor) {
                    s.regs[r as usize] = Nat::from(bit as u64);
                    s.cursor += 1;
                } else {
                    match s.mode {
                        ReadMode::Strict => {
                            s.status = Status::Faulted(FaultReason::ReadPastEnd);
                            return s.status;
                        }
                        ReadMode::Lenient => {
                            s.regs[r as usize] = Nat::ZERO;
                            s.regs[EOF_REG as usize] = Nat::from(1);
                        }
                    }
                }
            }
            Write(r) => {
                let bit = !s.regs[r as usize].is_zero();
                s.output.push(bit);
            }
            LoopStart(r) => {
                let reentry = s.loop_stack.last().is_some_and(|f| f.pc as usize == pc);
                if reentry {
                    let top = s.loop_stack.last_mut().expect("frame");
                    top.remaining -= 1;
                    if top.remaining == 0 {
                        s.loop_stack.pop();
                        next = prog.partner(pc) as u64 + 1;
                    }
                } else {
                    let count = s.regs[r as usize].saturating_u64();
                    if count == 0 {
                        next = prog.partner(pc) as u64 + 1;
                    } else {
                        s.loop_stack.push(LoopFrame {
                            pc: pc as u32,
                            remaining: count,
                        });
                    }
                }
            }
            LoopEnd => {
                let start = prog.partner(pc);
                if s.loop_stack.last().is_some_and(|f| f.pc as usize == start) {
                    next = start as u64;
                } else {
                    s.status = Status::Faulted(FaultReason::LoopMismatch);
                    return s.status;
                }
            }
        }
        s.pc = next;
        s.status
    }
}
