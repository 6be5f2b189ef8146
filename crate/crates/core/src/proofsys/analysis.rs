//! Static worst-case step bounds for the jump-free fragment.
//!
//! Each register carries a polynomial upper bound on its value (or ⊤ when
//! no polynomial bound is known). Straight-line code is summed; a loop costs
//! `1 + count * (body + 2)` where `count` bounds the counter register on
//! entry. Register bounds across a loop are joined to a fixpoint, and any
//! register still growing after it has been widened once goes to ⊤.

use thiserror::Error;

use super::costpoly::CostPoly;
use crate::vm::{Instruction, Program, EOF_REG, NUM_REGS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotCertifiable {
    #[error("instruction {0} is a jump")]
    Jump(usize),
    #[error("loop at {0} has no polynomial bound on its counter")]
    UnboundedLoop(usize),
    #[error("bound coefficients overflow")]
    Overflow,
}

type Regs = [Option<CostPoly>; NUM_REGS as usize];

struct Analyzer<'a> {
    ins: &'a [Instruction],
    prog: &'a Program,
    work: u64,
}

fn join_regs(a: &Regs, b: &Regs) -> Regs {
    std::array::from_fn(|k| match (&a[k], &b[k]) {
        (Some(x), Some(y)) => Some(x.join(y)),
        _ => None,
    })
}

fn add(a: &CostPoly, b: &CostPoly) -> Result<CostPoly, NotCertifiable> {
    a.checked_add(b).ok_or(NotCertifiable::Overflow)
}

impl Analyzer<'_> {
    /// Abstractly executes `[from, to)`, returning the step bound. Stops at
    /// a top-level HALT when `top` is set.
    fn block(
        &mut self,
        from: usize,
        to: usize,
        regs: &mut Regs,
        top: bool,
    ) -> Result<CostPoly, NotCertifiable> {
        let mut cost = CostPoly::constant(0);
        let mut steps: u64 = 0;
        let mut pc = from;
        while pc < to {
            self.work += 1;
            let ins = self.ins[pc];
            use Instruction::*;
            match ins {
                Jz(..) | Jmp(_) => return Err(NotCertifiable::Jump(pc)),
                LoopStart(r) => {
                    let end = self.prog.partner(pc);
                    let count = regs[r as usize]
                        .clone()
                        .ok_or(NotCertifiable::UnboundedLoop(pc))?;
                    let body = self.loop_body(pc + 1, end, regs)?;
                    let per_iter = add(&body, &CostPoly::constant(2))?;
                    let total = count
                        .checked_mul(&per_iter)
                        .ok_or(NotCertifiable::Overflow)?;
                    cost = add(&cost, &total)?;
                    steps += 1;
                    pc = end + 1;
                    continue;
                }
                LoopEnd => unreachable!("loop ends are consumed with their start"),
                Halt => {
                    steps += 1;
                    if top {
                        break;
                    }
                }
                Nop | Write(_) => steps += 1,
                LoadI(r, c) => {
                    regs[r as usize] = Some(CostPoly::constant(c));
                    steps += 1;
                }
                Mov(a, b) => {
                    regs[a as usize] = regs[b as usize].clone();
                    steps += 1;
                }
                // Saturating subtraction never exceeds its left operand.
                Sub(..) => steps += 1,
                Add(a, b) => {
                    regs[a as usize] = match (&regs[a as usize], &regs[b as usize]) {
                        (Some(x), Some(y)) => Some(add(x, y)?),
                        _ => None,
                    };
                    steps += 1;
                }
                Mul(a, b) => {
                    regs[a as usize] = match (&regs[a as usize], &regs[b as usize]) {
                        (Some(x), Some(y)) => {
                            Some(x.checked_mul(y).ok_or(NotCertifiable::Overflow)?)
                        }
                        _ => None,
                    };
                    steps += 1;
                }
                Read(r) => {
                    regs[r as usize] = Some(CostPoly::constant(1));
                    // A lenient READ past the end raises the EOF flag.
                    let eof = &mut regs[EOF_REG as usize];
                    *eof = eof.as_ref().map(|e| e.join(&CostPoly::constant(1)));
                    steps += 1;
                }
            }
            pc += 1;
        }
        add(&cost, &CostPoly::constant(steps))
    }

    /// Register fixpoint over any number of iterations of `[from, to)`,
    /// then the cost of one iteration under the fixpoint.
    fn loop_body(
        &mut self,
        from: usize,
        to: usize,
        regs: &mut Regs,
    ) -> Result<CostPoly, NotCertifiable> {
        let mut widened = [false; NUM_REGS as usize];
        let mut cur = regs.clone();
        loop {
            let mut after = cur.clone();
            self.block(from, to, &mut after, false)?;
            let next = join_regs(&cur, &after);
            if next == cur {
                break;
            }
            for k in 0..NUM_REGS as usize {
                if next[k] != cur[k] {
                    if widened[k] {
                        cur[k] = None;
                    } else {
                        widened[k] = true;
                        cur[k] = next[k].clone();
                    }
                }
            }
        }
        let mut scratch = cur.clone();
        let body = self.block(from, to, &mut scratch, false)?;
        *regs = cur;
        Ok(body)
    }
}

/// Polynomial bound on the steps `p` takes on any input of length `n`.
pub fn cost_bound(p: &Program) -> Result<CostPoly, NotCertifiable> {
    cost_bound_with_work(p).0
}

/// [`cost_bound`] together with the number of abstract instruction visits.
pub fn cost_bound_with_work(p: &Program) -> (Result<CostPoly, NotCertifiable>, u64) {
    if let Some(i) = p.instructions().iter().position(Instruction::is_jump) {
        return (Err(NotCertifiable::Jump(i)), i as u64 + 1);
    }
    let mut regs: Regs = std::array::from_fn(|_| Some(CostPoly::constant(0)));
    regs[0] = Some(CostPoly::n());
    let mut a = Analyzer {
        ins: p.instructions(),
        prog: p,
        work: 0,
    };
    let r = a.block(0, p.len(), &mut regs, true);
    (r, a.work)
}
