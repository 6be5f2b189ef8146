//! The fixed catalog of behaviour-preserving rewrites.
//!
//! Rules that move instructions to new indices are refused on programs that
//! contain jumps, since absolute jump targets would silently change meaning.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{BitReader, Bits, ReadError};
use crate::vm::{Instruction, Program, EOF_REG, NUM_REGS};

/// Largest constant trip count the unrolling rule accepts.
pub const MAX_UNROLL: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Insert NOP before `pos` (`pos == len` appends).
    NopInsert = 0,
    NopDelete = 1,
    /// `MOV r, r` → `NOP`.
    MovSelfToNop = 2,
    /// `NOP` → `MOV r, r`; one register parameter.
    NopToMovSelf = 3,
    /// `SUB r, r` → `LOADI r, 0`.
    SubSelfToZero = 4,
    /// `LOADI r, 0` → `SUB r, r`.
    ZeroToSubSelf = 5,
    /// Swap the instructions at `pos` and `pos + 1` when independent.
    Swap = 6,
    /// `LOADI r, c; LOOPSTART r; B; LOOPEND` → `LOADI r, c; B^c` for
    /// `c <= MAX_UNROLL`.
    Unroll = 7,
    /// `LOOPSTART r; LOOPEND` → nothing.
    DeleteEmptyLoop = 8,
    /// `MOV r, r` → nothing.
    MovSelfDelete = 9,
}

pub const CATALOG: [Rule; 10] = [
    Rule::NopInsert,
    Rule::NopDelete,
    Rule::MovSelfToNop,
    Rule::NopToMovSelf,
    Rule::SubSelfToZero,
    Rule::ZeroToSubSelf,
    Rule::Swap,
    Rule::Unroll,
    Rule::DeleteEmptyLoop,
    Rule::MovSelfDelete,
];

impl Rule {
    pub fn from_id(id: u8) -> Option<Rule> {
        CATALOG.get(id as usize).copied()
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    /// Number of 3-bit register parameters.
    pub fn params(self) -> usize {
        usize::from(self == Rule::NopToMovSelf)
    }

    fn shifts_indices(self) -> bool {
        matches!(
            self,
            Rule::NopInsert
                | Rule::NopDelete
                | Rule::Swap
                | Rule::Unroll
                | Rule::DeleteEmptyLoop
                | Rule::MovSelfDelete
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewriteStep {
    pub rule: Rule,
    pub pos: u64,
    pub params: Vec<u8>,
}

impl RewriteStep {
    pub fn new(rule: Rule, pos: u64) -> Self {
        RewriteStep {
            rule,
            pos,
            params: Vec::new(),
        }
    }

    pub fn with_reg(rule: Rule, pos: u64, r: u8) -> Self {
        RewriteStep {
            rule,
            pos,
            params: vec![r],
        }
    }

    /// rule id (4 bits), gamma(pos + 1), then 3 bits per register
    /// parameter.
    pub fn encode_into(&self, b: &mut Bits) {
        b.push_uint(self.rule.id() as u128, 4);
        b.push_gamma0(self.pos);
        for &r in &self.params {
            b.push_uint(r as u128, 3);
        }
    }

    pub fn decode_from(rd: &mut BitReader<'_>) -> Result<RewriteStep, StepDecodeError> {
        let id = rd.read_uint(4)? as u8;
        let rule = Rule::from_id(id).ok_or(StepDecodeError::UnknownRule(id))?;
        let pos = rd.read_gamma0()?;
        let params = (0..rule.params())
            .map(|_| rd.read_uint(3).map(|r| r as u8))
            .collect::<Result<_, _>>()?;
        Ok(RewriteStep { rule, pos, params })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepDecodeError {
    #[error("rule id {0} is outside the catalog")]
    UnknownRule(u8),
    #[error(transparent)]
    Read(#[from] ReadError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("position {0} out of range")]
    Position(u64),
    #[error("pattern of {0:?} does not match")]
    Mismatch(Rule),
    #[error("{0:?} would move jump targets")]
    HasJumps(Rule),
    #[error("instructions are not independent")]
    NotIndependent,
    #[error("wrong parameters")]
    Params,
    #[error("result is not a well-formed program")]
    IllFormed,
}

/// Registers read or written by a straight-line instruction, or `None` if
/// the instruction is not straight-line.
fn footprint(i: &Instruction) -> Option<Vec<u8>> {
    use Instruction::*;
    match *i {
        Nop | Write(_) => Some(i.registers()),
        LoadI(..) | Mov(..) | Add(..) | Sub(..) | Mul(..) => Some(i.registers()),
        Read(r) => Some(vec![r, EOF_REG]),
        Halt | Jz(..) | Jmp(_) | LoopStart(_) | LoopEnd => None,
    }
}

pub fn independent(a: &Instruction, b: &Instruction) -> bool {
    let (Some(fa), Some(fb)) = (footprint(a), footprint(b)) else {
        return false;
    };
    let same_tape = matches!(
        (a, b),
        (Instruction::Read(_), Instruction::Read(_))
            | (Instruction::Write(_), Instruction::Write(_))
    );
    !same_tape && fa.iter().all(|r| !fb.contains(r))
}

/// Applies one catalog step. Also returns the number of instructions
/// written, as checker work.
pub fn apply_rewrite_counted(
    p: &Program,
    step: &RewriteStep,
) -> Result<(Program, u64), RewriteError> {
    use Instruction::*;
    let rule = step.rule;
    if step.params.len() != rule.params() || step.params.iter().any(|&r| r >= NUM_REGS) {
        return Err(RewriteError::Params);
    }
    if rule.shifts_indices() && p.has_jumps() {
        return Err(RewriteError::HasJumps(rule));
    }
    let ins = p.instructions();
    let limit = if rule == Rule::NopInsert {
        ins.len()
    } else {
        ins.len().saturating_sub(1)
    };
    let pos = usize::try_from(step.pos)
        .ok()
        .filter(|&i| i <= limit && (rule == Rule::NopInsert || i < ins.len()))
        .ok_or(RewriteError::Position(step.pos))?;
    let mismatch = || RewriteError::Mismatch(rule);
    let mut out = ins.to_vec();
    match rule {
        Rule::NopInsert => out.insert(pos, Nop),
        Rule::NopDelete => {
            if ins[pos] != Nop {
                return Err(mismatch());
            }
            out.remove(pos);
        }
        Rule::MovSelfToNop => match ins[pos] {
            Mov(a, b) if a == b => out[pos] = Nop,
            _ => return Err(mismatch()),
        },
        Rule::NopToMovSelf => {
            if ins[pos] != Nop {
                return Err(mismatch());
            }
            let r = step.params[0];
            out[pos] = Mov(r, r);
        }
        Rule::SubSelfToZero => match ins[pos] {
            Sub(a, b) if a == b => out[pos] = LoadI(a, 0),
            _ => return Err(mismatch()),
        },
        Rule::ZeroToSubSelf => match ins[pos] {
            LoadI(r, 0) => out[pos] = Sub(r, r),
            _ => return Err(mismatch()),
        },
        Rule::Swap => {
            let (a, b) = (
                ins[pos],
                *ins.get(pos + 1).ok_or(RewriteError::Position(step.pos))?,
            );
            if !independent(&a, &b) {
                return Err(RewriteError::NotIndependent);
            }
            out.swap(pos, pos + 1);
        }
        Rule::Unroll => {
            let (LoadI(r, c), Some(&LoopStart(q))) = (ins[pos], ins.get(pos + 1)) else {
                return Err(mismatch());
            };
            if r != q || c > MAX_UNROLL {
                return Err(mismatch());
            }
            let start = pos + 1;
            let end = p.partner(start);
            let body = &ins[start + 1..end];
            let mut v = ins[..=pos].to_vec();
            for _ in 0..c {
                v.extend_from_slice(body);
            }
            v.extend_from_slice(&ins[end + 1..]);
            out = v;
        }
        Rule::DeleteEmptyLoop => match (ins[pos], ins.get(pos + 1)) {
            (LoopStart(_), Some(LoopEnd)) => {
                out.drain(pos..pos + 2);
            }
            _ => return Err(mismatch()),
        },
        Rule::MovSelfDelete => match ins[pos] {
            Mov(a, b) if a == b => {
                out.remove(pos);
            }
            _ => return Err(mismatch()),
        },
    }
    let written = out.len() as u64;
    let q = Program::new(out).map_err(|_| RewriteError::IllFormed)?;
    Ok((q, written))
}

pub fn apply_rewrite(p: &Program, step: &RewriteStep) -> Result<Program, RewriteError> {
    apply_rewrite_counted(p, step).map(|(q, _)| q)
}
