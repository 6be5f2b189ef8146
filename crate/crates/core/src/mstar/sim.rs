//! The simulator: processes A (proof search), B (bound evaluation) and C
//! (doubling-period execution of the current fastest program) sharing the
//! pool `L`, `t_fast` and `p_fast`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use thiserror::Error;

use super::config::{MConfig, ProofSource, SchedulerMode};
use super::trace::{Event, Proc, Trace, INF};
use crate::codec::{length_lex, Bits, CreditScheduler, KraftError, KraftLedger, ShareExponent};
use crate::proofsys::{check_certificate, work_limit, CostPoly, Verdict, KAPPA};
use crate::vm::{MachineState, Program, Status, Vm};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MStarError {
    #[error("global budget of {budget} ticks exhausted")]
    GlobalBudgetExhausted { budget: u64, trace: Box<Trace> },
    #[error("invalid scenario: {0}")]
    ScenarioInvalid(String),
}

/// Result of a finished run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MRun {
    pub output: Bits,
    pub trace: Trace,
}

/// A certificate accepted by process A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptedCert {
    pub index: u64,
    pub len_bits: u64,
    pub p: Program,
    pub t: CostPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct InFlight {
    index: u64,
    len_bits: u64,
    work: u64,
    ticks_left: u64,
    verdict: Verdict,
    scripted: bool,
}

/// Process A's resumable state: the enumeration counter, the candidate
/// being checked and everything accepted so far. Carried between runs in
/// persistent mode.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AState {
    next_index: u64,
    in_flight: Option<InFlight>,
    accepted: Vec<AcceptedCert>,
}

impl AState {
    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    pub fn accepted(&self) -> &[AcceptedCert] {
        &self.accepted
    }
}

struct PoolEntry {
    id: u64,
    p: Arc<Program>,
    eval: MachineState,
}

struct Shared {
    ledger: KraftLedger<String>,
    entries: Vec<PoolEntry>,
    sched: CreditScheduler<usize>,
    t_fast: Option<BigUint>,
    p_fast: Arc<Program>,
}

struct ProcC {
    k: u64,
    used: u64,
    machine: Option<MachineState>,
    idle: bool,
}

struct Sim<'a> {
    vm: Vm,
    cfg: &'a MConfig,
    pstar: Arc<Program>,
    x: &'a Bits,
    scripted: BTreeMap<u64, &'a Bits>,
    a: AState,
    pool: Shared,
    c: ProcC,
    tick: u64,
    steps: [u64; 3],
    next_entry: u64,
    trace: Trace,
}

fn fmt_t_fast(t: &Option<BigUint>) -> String {
    t.as_ref()
        .map_or_else(|| INF.to_string(), |v| v.to_string())
}

impl<'a> Sim<'a> {
    fn new(pstar: &Program, x: &'a Bits, cfg: &'a MConfig, a: AState) -> Self {
        let scripted = match &cfg.proof_source {
            ProofSource::Scripted(es) => es.iter().map(|e| (e.index, &e.bits)).collect(),
            _ => BTreeMap::new(),
        };
        let pstar = Arc::new(pstar.clone());
        let mut trace = Trace::default();
        trace.push(
            0,
            Proc::M,
            Event::Header {
                pstar: pstar.to_hex(),
                x: x.to_string(),
                n: x.len() as u64,
                kappa: KAPPA,
                scheduler: format!("{:?}", cfg.scheduler).to_lowercase(),
                share_mode: serde_json::to_value(cfg.share_mode)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                read_mode: format!("{:?}", cfg.read_mode).to_lowercase(),
                proof_source: cfg.proof_source.kind().to_string(),
            },
        );
        Sim {
            vm: Vm::new(cfg.read_mode),
            cfg,
            pool: Shared {
                ledger: KraftLedger::new(),
                entries: Vec::new(),
                sched: CreditScheduler::new(cfg.share_mode),
                t_fast: None,
                p_fast: pstar.clone(),
            },
            pstar,
            x,
            scripted,
            a,
            c: ProcC {
                k: 0,
                used: 0,
                machine: None,
                idle: false,
            },
            tick: 0,
            steps: [0; 3],
            next_entry: 0,
            trace,
        }
    }

    fn reset_pool(&mut self) {
        self.pool.ledger = KraftLedger::new();
        self.pool.entries.clear();
        self.pool.sched = CreditScheduler::new(self.cfg.share_mode);
    }

    fn pool_add(&mut self, p: &Program, t: &CostPoly) {
        let key = format!("{}/{}", p.to_hex(), t.encode().to_hex());
        let exponent = (p.length_bits() + t.bit_len()) as u32;
        let exp = ShareExponent::new(exponent).expect("codes are non-empty");
        match self.pool.ledger.kraft_add(key.clone(), exp) {
            Ok(()) => {
                let id = self.next_entry;
                self.next_entry += 1;
                let eval = self.vm.start(Arc::new(t.evaluator_program()), self.x);
                let slot = self.pool.entries.len();
                self.pool.entries.push(PoolEntry {
                    id,
                    p: Arc::new(p.clone()),
                    eval,
                });
                self.pool.sched.add(slot, exp);
                let row = self.pool.ledger.rows().pop().expect("row just added");
                self.trace.push(
                    self.tick,
                    Proc::A,
                    Event::PoolAdd {
                        entry: id,
                        p: p.to_hex(),
                        t: t.coeffs().to_vec(),
                        exponent,
                        row,
                        kraft_total: self.pool.ledger.total().to_string(),
                    },
                );
            }
            Err(e) => {
                let reason = match e {
                    KraftError::DuplicateEntry(_) => "duplicate".to_string(),
                    other => other.to_string(),
                };
                self.trace.push(
                    self.tick,
                    Proc::A,
                    Event::KraftSkip {
                        p: p.to_hex(),
                        t: t.coeffs().to_vec(),
                        exponent,
                        reason,
                    },
                );
            }
        }
    }

    fn a_tick(&mut self) {
        if matches!(self.cfg.proof_source, ProofSource::Empty) {
            return;
        }
        if self.a.in_flight.is_none() {
            let index = self.a.next_index;
            self.a.next_index += 1;
            let (bits, scripted) = match self.scripted.get(&index) {
                Some(b) => ((*b).clone(), true),
                None => (length_lex(index), false),
            };
            let report = check_certificate(&bits, &self.pstar);
            self.a.in_flight = Some(InFlight {
                index,
                len_bits: bits.len() as u64,
                work: report.work,
                ticks_left: work_limit(bits.len()),
                verdict: report.verdict,
                scripted,
            });
        }
        let f = self.a.in_flight.as_mut().expect("candidate in flight");
        f.ticks_left -= 1;
        if f.ticks_left > 0 {
            return;
        }
        let f = self.a.in_flight.take().expect("candidate in flight");
        match f.verdict {
            Verdict::Accepted { p, t } => {
                self.trace.push(
                    self.tick,
                    Proc::A,
                    Event::CertAccepted {
                        index: f.index,
                        len_bits: f.len_bits,
                        work: f.work,
                        p: p.to_hex(),
                        t: t.coeffs().to_vec(),
                        a_ticks: self.steps[0],
                    },
                );
                self.pool_add(&p, &t);
                self.a.accepted.push(AcceptedCert {
                    index: f.index,
                    len_bits: f.len_bits,
                    p,
                    t,
                });
            }
            Verdict::Invalid(reason) if f.scripted => self.trace.push(
                self.tick,
                Proc::A,
                Event::CertRejected {
                    index: f.index,
                    len_bits: f.len_bits,
                    reason: reason.to_string(),
                },
            ),
            Verdict::Invalid(_) => {}
        }
    }

    fn b_tick(&mut self) {
        let Some(grant) = self.pool.sched.tick() else {
            return;
        };
        let slot = grant.id();
        let entry = &mut self.pool.entries[slot];
        match self.vm.step(&mut entry.eval) {
            Status::Running => {}
            Status::Halted => {
                let value = entry.eval.register(1).to_biguint();
                let steps = entry.eval.steps_used();
                let (id, p) = (entry.id, entry.p.clone());
                self.pool.sched.remove(slot);
                let faster = self.pool.t_fast.as_ref().is_none_or(|t| value < *t);
                if faster {
                    self.pool.t_fast = Some(value.clone());
                    self.pool.p_fast = p.clone();
                }
                self.trace.push(
                    self.tick,
                    Proc::B,
                    Event::TBoundComputed {
                        entry: id,
                        value: value.to_string(),
                        steps,
                        t_fast: fmt_t_fast(&self.pool.t_fast),
                    },
                );
                if faster {
                    self.trace.push(
                        self.tick,
                        Proc::B,
                        Event::FastUpdate {
                            entry: id,
                            t_fast: value.to_string(),
                            p_fast: p.to_hex(),
                        },
                    );
                }
            }
            Status::Faulted(reason) => {
                let id = entry.id;
                self.pool.sched.remove(slot);
                self.trace.push(
                    self.tick,
                    Proc::B,
                    Event::BoundDead {
                        entry: id,
                        reason: format!("{reason:?}"),
                    },
                );
            }
        }
    }

    /// One C step; returns the output once the period's program halts.
    fn c_tick(&mut self) -> Option<Bits> {
        let c = &mut self.c;
        if c.k == 0 || c.used == c.k {
            c.k = if c.k == 0 { 1 } else { c.k * 2 };
            c.used = 0;
            c.idle = false;
            c.machine = Some(self.vm.start(self.pool.p_fast.clone(), self.x));
            self.trace.push(
                self.tick,
                Proc::C,
                Event::PeriodStart {
                    k: c.k,
                    program: self.pool.p_fast.to_hex(),
                },
            );
        }
        c.used += 1;
        if c.idle {
            return None;
        }
        let m = c.machine.as_mut().expect("period started");
        match self.vm.step(m) {
            Status::Running => None,
            Status::Halted => {
                let output = m.output().clone();
                self.trace.push(
                    self.tick,
                    Proc::C,
                    Event::Halt {
                        output: output.to_string(),
                        k: c.k,
                        steps_in_period: c.used,
                    },
                );
                Some(output)
            }
            Status::Faulted(_) => {
                c.idle = true;
                None
            }
        }
    }

    fn advance(&mut self, proc_idx: usize) -> Result<(), MStarError> {
        if self.tick >= self.cfg.global_budget {
            self.trace.push(
                self.tick,
                Proc::M,
                Event::BudgetExhausted {
                    budget: self.cfg.global_budget,
                },
            );
            self.summary();
            return Err(MStarError::GlobalBudgetExhausted {
                budget: self.cfg.global_budget,
                trace: Box::new(std::mem::take(&mut self.trace)),
            });
        }
        self.tick += 1;
        self.steps[proc_idx] += 1;
        Ok(())
    }

    fn summary(&mut self) {
        let [a, b, c] = self.steps;
        self.trace.push(
            self.tick,
            Proc::M,
            Event::Summary {
                steps_a: a,
                steps_b: b,
                steps_c: c,
                total: a + b + c,
                ledger: self.pool.ledger.rows(),
            },
        );
    }

    fn finish(mut self, output: Bits) -> (MRun, AState) {
        for p in [Proc::A, Proc::B] {
            self.trace
                .push(self.tick, Proc::M, Event::Abort { aborted: p });
        }
        self.summary();
        (
            MRun {
                output,
                trace: self.trace,
            },
            self.a,
        )
    }

    fn run_rounds(mut self) -> Result<(MRun, AState), MStarError> {
        let carried: Vec<AcceptedCert> = self.a.accepted.clone();
        for c in &carried {
            self.pool_add(&c.p, &c.t);
        }
        loop {
            let slot = (self.tick % 10) as usize;
            let proc_idx = slot.min(2);
            self.advance(proc_idx)?;
            match proc_idx {
                0 => self.a_tick(),
                1 => self.b_tick(),
                _ => {
                    if let Some(out) = self.c_tick() {
                        return Ok(self.finish(out));
                    }
                }
            }
        }
    }

    fn run_cycles(mut self) -> Result<(MRun, AState), MStarError> {
        for cycle in 0u32.. {
            let len = 1u64.checked_shl(cycle).unwrap_or(u64::MAX);
            self.trace
                .push(self.tick, Proc::M, Event::CycleStart { cycle, length: len });
            self.a = AState::default();
            self.reset_pool();
            for _ in 0..len {
                self.advance(0)?;
                self.a_tick();
            }
            for _ in 0..len {
                self.advance(1)?;
                self.b_tick();
            }
            for _ in 0..len.saturating_mul(8) {
                self.advance(2)?;
                if let Some(out) = self.c_tick() {
                    return Ok(self.finish(out));
                }
            }
        }
        unreachable!("cycle counter exhausted")
    }
}

/// Runs `M_{p*}` on `x` from a fresh state.
pub fn run_mstar(pstar: &Program, x: &Bits, cfg: &MConfig) -> Result<MRun, MStarError> {
    run_mstar_persistent(pstar, x, cfg, &mut AState::default())
}

/// Runs `M_{p*}` on `x`, resuming process A from `a` and storing its final
/// state back. Certificates accepted in earlier runs enter the pool at tick
/// 0.
pub fn run_mstar_persistent(
    pstar: &Program,
    x: &Bits,
    cfg: &MConfig,
    a: &mut AState,
) -> Result<MRun, MStarError> {
    match cfg.scheduler {
        SchedulerMode::Round => {
            let sim = Sim::new(pstar, x, cfg, std::mem::take(a));
            let (run, state) = sim.run_rounds()?;
            *a = state;
            Ok(run)
        }
        SchedulerMode::Cycles => {
            if *a != AState::default() {
                return Err(MStarError::ScenarioInvalid(
                    "persistent process A is only defined for round scheduling".into(),
                ));
            }
            run_mstar_cycles(pstar, x, cfg)
        }
    }
}

/// The sequential alternative: cycle `j` gives A then B `2^j` ticks each
/// from scratch, then C `8 * 2^j` ticks continuing its period ladder.
/// `t_fast` and `p_fast` persist across cycles.
pub fn run_mstar_cycles(pstar: &Program, x: &Bits, cfg: &MConfig) -> Result<MRun, MStarError> {
    let sim = Sim::new(pstar, x, cfg, AState::default());
    sim.run_cycles().map(|(run, _)| run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::ShareMode;
    use crate::mstar::config::ScriptedEntry;
    use crate::proofsys::{Certificate, RewriteStep, Rule};

    fn prog(s: &str) -> Program {
        Program::parse_asm(s).unwrap()
    }

    fn busy2() -> Program {
        prog("LOOPSTART R0; LOOPSTART R0; NOP; LOOPEND; LOOPEND; HALT")
    }

    fn busy2_cert() -> Bits {
        Certificate::new(
            prog("HALT"),
            CostPoly::constant(1),
            vec![
                RewriteStep::new(Rule::NopDelete, 2),
                RewriteStep::new(Rule::DeleteEmptyLoop, 1),
                RewriteStep::new(Rule::DeleteEmptyLoop, 0),
            ],
        )
        .encode()
    }

    #[test]
    fn empty_pool_runs_pstar_by_doubling() {
        let p = prog("NOP; NOP; WRITE R0; HALT");
        let x = Bits::parse("1").unwrap();
        let run = run_mstar(&p, &x, &MConfig::default()).unwrap();
        assert_eq!(run.output.to_string(), "1");
        // Periods 1 and 2 fail, period 4 finishes on its fourth step.
        assert_eq!(
            run.trace.periods().iter().map(|p| p.1).collect::<Vec<_>>(),
            [1, 2, 4]
        );
        let (a, b, c, total) = run.trace.summary().unwrap();
        assert_eq!(c, 1 + 2 + 4);
        assert_eq!(total, a + b + c);
        // C tick number 7 is global tick 9 of the first round.
        assert_eq!(run.trace.time_m(), Some(9));
    }

    #[test]
    fn scripted_certificate_switches_program() {
        let cfg = MConfig {
            proof_source: ProofSource::Scripted(vec![ScriptedEntry {
                index: 1,
                bits: busy2_cert(),
            }]),
            ..MConfig::default()
        };
        let x = Bits::from_bools(vec![true; 100]);
        let run = run_mstar(&busy2(), &x, &cfg).unwrap();
        assert!(run.output.is_empty());
        assert!(run
            .trace
            .iter()
            .any(|r| matches!(r.event, Event::FastUpdate { .. })));
        let periods = run.trace.periods();
        assert!(periods.last().unwrap().1 >= 1);
        assert_eq!(periods.last().map(|p| p.1), run.trace.halt().map(|h| h.2));
    }

    #[test]
    fn budget_exhaustion_returns_partial_trace() {
        let p = prog("LOADI R1, 1; LOOPSTART R1; LOADI R1, 2; NOP; LOOPEND; JMP 1");
        let cfg = MConfig {
            global_budget: 500,
            ..MConfig::default()
        };
        match run_mstar(&p, &Bits::new(), &cfg) {
            Err(MStarError::GlobalBudgetExhausted { trace, .. }) => {
                assert_eq!(trace.summary().unwrap().3, 500)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn persistent_a_resumes_enumeration() {
        let cfg = MConfig {
            proof_source: ProofSource::Enumerate,
            ..MConfig::default()
        };
        let p = prog("NOP; HALT");
        let mut a = AState::default();
        run_mstar_persistent(&p, &Bits::new(), &cfg, &mut a).unwrap();
        let first = a.next_index();
        assert!(first > 0);
        run_mstar_persistent(&p, &Bits::new(), &cfg, &mut a).unwrap();
        assert!(a.next_index() > first);
    }

    #[test]
    fn cycles_give_same_output() {
        let cfg = MConfig {
            proof_source: ProofSource::Scripted(vec![ScriptedEntry {
                index: 1,
                bits: busy2_cert(),
            }]),
            share_mode: ShareMode::Fixed,
            ..MConfig::default()
        };
        let x = Bits::from_bools(vec![true; 30]);
        let r = run_mstar(&busy2(), &x, &cfg).unwrap();
        let c = run_mstar_cycles(&busy2(), &x, &cfg).unwrap();
        assert_eq!(r.output, c.output);
        assert_eq!(c.trace, run_mstar_cycles(&busy2(), &x, &cfg).unwrap().trace);
    }
}
