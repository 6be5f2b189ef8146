//! Levin search for inverting an easy function `g`: every valid program `p`
//! runs on the target `x` at rate `2^{-l(p)}`, and whatever it prints is
//! checked by running `g` on it, with the checking steps charged to `p`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{Bits, CreditScheduler, KraftLedger, ShareExponent, ShareMode};
use crate::vm::{valid_encodings_of_length, MachineState, Program, ReadMode, Status, Vm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InversionProblem {
    pub g: Program,
    pub x: Bits,
    /// Steps `g` may take on one candidate before the candidate is dropped.
    pub verify_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinConfig {
    pub global_budget: u64,
    pub read_mode: ReadMode,
    /// Longest candidate encoding ever materialized.
    pub max_len: usize,
}

impl Default for LevinConfig {
    fn default() -> Self {
        LevinConfig {
            global_budget: 1 << 24,
            read_mode: ReadMode::Strict,
            max_len: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LevinEvent {
    Header {
        g: String,
        x: String,
        verify_budget: u64,
    },
    Materialize {
        len_bits: u64,
        count: u64,
        kraft_total: String,
    },
    CandidateOutput {
        program: String,
        y: String,
        steps: u64,
    },
    Verified {
        program: String,
        y: String,
        g_of_y: String,
        steps: u64,
    },
    Found {
        program: String,
        y: String,
        l_p: u64,
        time_p: u64,
        time_verify: u64,
    },
    BudgetExhausted {
        budget: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinRecord {
    pub tick: u64,
    pub process: String,
    #[serde(flatten)]
    pub event: LevinEvent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevinResult {
    pub y: Bits,
    pub program: Program,
    pub l_p: u64,
    pub time_p: u64,
    pub time_verify: u64,
    pub total_ticks: u64,
    pub candidates: u64,
    pub trace: Vec<LevinRecord>,
}

impl LevinResult {
    /// `2^{l(p)+1} (time_p + time_verify)`.
    pub fn allowance(&self) -> u128 {
        (1u128 << (self.l_p + 1)) * (self.time_p + self.time_verify) as u128
    }

    pub fn trace_jsonl(&self) -> String {
        records_jsonl(&self.trace)
    }
}

pub fn records_jsonl(records: &[LevinRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevinError {
    #[error("no solution within {ticks} ticks")]
    NoSolutionWithinBudget { ticks: u64, trace: Vec<LevinRecord> },
}

enum Phase {
    Run(MachineState),
    Verify {
        y: Bits,
        time_p: u64,
        g: MachineState,
    },
}

struct Cand {
    program: Arc<Program>,
    phase: Phase,
}

pub fn levin_search(prob: &InversionProblem, cfg: &LevinConfig) -> Result<LevinResult, LevinError> {
    let vm = Vm::new(cfg.read_mode);
    let g = Arc::new(prob.g.clone());
    let mut sched: CreditScheduler<usize> = CreditScheduler::new(ShareMode::Fixed);
    let mut ledger: KraftLedger<usize> = KraftLedger::new();
    let mut cands: Vec<Cand> = Vec::new();
    let mut trace = Vec::new();
    let push = |trace: &mut Vec<LevinRecord>, tick, event| {
        trace.push(LevinRecord {
            tick,
            process: "L".into(),
            event,
        })
    };
    push(
        &mut trace,
        0,
        LevinEvent::Header {
            g: prob.g.to_hex(),
            x: prob.x.to_string(),
            verify_budget: prob.verify_budget,
        },
    );
    let mut next_len = 1usize;
    loop {
        // Length-l candidates first become eligible on tick 2^l; bring them
        // in just before, with credit counted from tick 0.
        while next_len <= cfg.max_len && sched.now() + 1 >= 1u64 << next_len {
            let encs = valid_encodings_of_length(next_len);
            let exp = ShareExponent::new(next_len as u32).expect("len >= 1");
            for bits in &encs {
                let p = Arc::new(Program::decode(bits).expect("generator yields valid codes"));
                let id = cands.len();
                ledger
                    .kraft_add(id, exp)
                    .expect("a prefix-free code satisfies Kraft");
                sched.add_with_origin(id, exp, 0);
                let m = vm.start(p.clone(), &prob.x);
                cands.push(Cand {
                    program: p,
                    phase: Phase::Run(m),
                });
            }
            if !encs.is_empty() {
                push(
                    &mut trace,
                    sched.now(),
                    LevinEvent::Materialize {
                        len_bits: next_len as u64,
                        count: encs.len() as u64,
                        kraft_total: ledger.total().to_string(),
                    },
                );
            }
            next_len += 1;
        }
        // Fast-forward over ticks on which nobody is eligible.
        let next_mat = (next_len <= cfg.max_len).then(|| 1u64 << next_len);
        let next_run = sched.next_eligible_tick();
        let target = match (next_run, next_mat) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => u64::MAX,
        };
        if target > sched.now() + 1 {
            let to = (target - 1).min(cfg.global_budget);
            sched.skip_to(to.max(sched.now()));
        }
        if sched.now() >= cfg.global_budget {
            push(
                &mut trace,
                sched.now(),
                LevinEvent::BudgetExhausted {
                    budget: cfg.global_budget,
                },
            );
            return Err(LevinError::NoSolutionWithinBudget {
                ticks: sched.now(),
                trace,
            });
        }
        let Some(grant) = sched.tick() else {
            continue;
        };
        let now = sched.now();
        let id = grant.id();
        let cand = &mut cands[id];
        match &mut cand.phase {
            Phase::Run(m) => match vm.step(m) {
                Status::Running => {}
                Status::Halted => {
                    let y = m.output().clone();
                    let time_p = m.steps_used();
                    push(
                        &mut trace,
                        now,
                        LevinEvent::CandidateOutput {
                            program: cand.program.to_hex(),
                            y: y.to_string(),
                            steps: time_p,
                        },
                    );
                    let gm = vm.start(g.clone(), &y);
                    cand.phase = Phase::Verify { y, time_p, g: gm };
                }
                Status::Faulted(_) => {
                    sched.remove(id);
                }
            },
            Phase::Verify { y, time_p, g: gm } => match vm.step(gm) {
                Status::Running => {
                    if gm.steps_used() >= prob.verify_budget {
                        sched.remove(id);
                    }
                }
                Status::Halted => {
                    let gy = gm.output().clone();
                    let time_verify = gm.steps_used();
                    push(
                        &mut trace,
                        now,
                        LevinEvent::Verified {
                            program: cand.program.to_hex(),
                            y: y.to_string(),
                            g_of_y: gy.to_string(),
                            steps: time_verify,
                        },
                    );
                    if gy == prob.x {
                        let l_p = cand.program.length_bits() as u64;
                        push(
                            &mut trace,
                            now,
                            LevinEvent::Found {
                                program: cand.program.to_hex(),
                                y: y.to_string(),
                                l_p,
                                time_p: *time_p,
                                time_verify,
                            },
                        );
                        return Ok(LevinResult {
                            y: y.clone(),
                            program: (*cand.program).clone(),
                            l_p,
                            time_p: *time_p,
                            time_verify,
                            total_ticks: now,
                            candidates: cands.len() as u64,
                            trace,
                        });
                    }
                    sched.remove(id);
                }
                Status::Faulted(_) => {
                    sched.remove(id);
                }
            },
        }
    }
}
