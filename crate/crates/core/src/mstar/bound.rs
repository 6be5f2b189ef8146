//! Recomputes the running-time guarantees from a trace.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trace::{Event, Trace};
use crate::codec::Bits;
use crate::proofsys::CostPoly;
use crate::vm::{ExecOutcome, Program, ReadMode, Vm};

/// The designated `(p', t')` pair and the length of its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub p: Program,
    pub t: CostPoly,
    pub proof_len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
    #[serde(rename = "iv")]
    Iv,
    #[serde(rename = "pre-pool")]
    PrePool,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::I => "i",
            Case::Ii => "ii",
            Case::Iii => "iii",
            Case::Iv => "iv",
            Case::PrePool => "pre-pool",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundError {
    #[error("the run did not halt")]
    NoHalt,
    #[error("trace has no header")]
    NoHeader,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

impl Inequality {
    fn le(lhs: &BigUint, rhs: &BigUint) -> Self {
        Inequality {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p_prime: String,
    pub t_prime: Vec<u64>,
    pub n: u64,
    pub l_p: u64,
    pub l_t: u64,
    pub l_proof: u64,
    pub kappa: u64,
    /// `t_{p'}(x)`, the bound's value on `x`.
    pub t_value: String,
    /// `time_{t_{p'}}(x)`, steps to evaluate the bound.
    pub time_t: u64,
    /// `time_{p'}(x)` by direct execution.
    pub time_p_prime: Option<u64>,
    pub time_m: u64,
    /// Tick at which the reference entered the pool; `None` if C halted first.
    pub t_a: Option<u64>,
    /// Tick at which B finished `t_{p'}(x)`; `None` if C halted first.
    pub t_b: Option<u64>,
    /// `T_A + 10 * 2^{l(p')+l(t')} * time_t`, for comparison with `t_b`.
    pub t_b_bound: Option<String>,
    pub k0: Option<u64>,
    pub periods: u64,
    pub slack: u64,
    pub case: Case,
    pub d_p: String,
    pub c_p: String,
    /// `time_M <= max{4 T_B, 5 t_{p'}(x)} + slack`.
    pub case_bound: Inequality,
    /// `time_M <= 5 t_{p'}(x) + d_p time_t + c_p`.
    pub theorem_bound: Inequality,
    /// False for modes the constants do not cover (work-conserving shares,
    /// cycle scheduling); the inequalities are then informational.
    pub applicable: bool,
    pub pass: bool,
}

fn header(trace: &Trace) -> Result<(Bits, u64, ReadMode, bool), BoundError> {
    match trace.header() {
        Some(Event::Header {
            x,
            kappa,
            read_mode,
            share_mode,
            scheduler,
            ..
        }) => {
            let x = Bits::parse(x).map_err(|_| BoundError::NoHeader)?;
            let mode = if read_mode == "lenient" {
                ReadMode::Lenient
            } else {
                ReadMode::Strict
            };
            Ok((
                x,
                *kappa,
                mode,
                share_mode == "fixed" && scheduler == "round",
            ))
        }
        _ => Err(BoundError::NoHeader),
    }
}

struct RefTicks {
    t_a: Option<u64>,
    t_b: Option<(u64, String)>,
}

fn reference_ticks(trace: &Trace, r: &Reference) -> RefTicks {
    let hex = r.p.to_hex();
    let mut entry = None;
    let mut out = RefTicks {
        t_a: None,
        t_b: None,
    };
    for rec in trace.iter() {
        match &rec.event {
            Event::PoolAdd {
                entry: id, p, t, ..
            } if entry.is_none() && *p == hex && t.as_slice() == r.t.coeffs() => {
                entry = Some(*id);
                out.t_a = Some(rec.tick);
            }
            Event::TBoundComputed {
                entry: id, t_fast, ..
            } if Some(*id) == entry && out.t_b.is_none() => {
                out.t_b = Some((rec.tick, t_fast.clone()));
            }
            _ => {}
        }
    }
    out
}

/// Period in progress at `tick` (the last one started strictly before).
fn period_at(trace: &Trace, tick: u64) -> Option<u64> {
    trace
        .periods()
        .into_iter()
        .take_while(|&(t, _)| t < tick)
        .last()
        .map(|(_, k)| k)
}

/// Which branch of the running-time argument the run took.
pub fn classify_termination(trace: &Trace, r: &Reference) -> Result<Case, BoundError> {
    let (halt_tick, _, k_halt) = trace.halt().ok_or(BoundError::NoHalt)?;
    let ticks = reference_ticks(trace, r);
    match ticks.t_a {
        Some(t) if t <= halt_tick => {}
        _ => return Ok(Case::PrePool),
    }
    let Some((t_b, t_fast)) = ticks.t_b.filter(|(t, _)| *t <= halt_tick) else {
        return Ok(Case::I);
    };
    let k0 = period_at(trace, t_b).unwrap_or(0);
    if k_halt == k0 {
        return Ok(Case::Ii);
    }
    let t_fast: Option<BigUint> = t_fast.parse().ok();
    let fits = t_fast.is_some_and(|tf| BigUint::from(2 * k0) >= tf);
    if k_halt == 2 * k0 && fits {
        Ok(Case::Iii)
    } else {
        Ok(Case::Iv)
    }
}

/// `d_p = 40 * 2^{l(p) + l(t)}`.
pub fn d_p(l_p: u64, l_t: u64) -> BigUint {
    BigUint::from(40u32) << (l_p + l_t)
}

/// `c_p = 40 * 2^{l(proof) + 1} * kappa * l(proof)^2`.
pub fn c_p(l_proof: u64, kappa: u64) -> BigUint {
    (BigUint::from(40u32) << (l_proof + 1)) * kappa * l_proof * l_proof
}

pub fn verify_bound(trace: &Trace, r: &Reference) -> Result<BoundReport, BoundError> {
    let (x, kappa, read_mode, applicable) = header(trace)?;
    let time_m = trace.time_m().ok_or(BoundError::NoHalt)?;
    let ticks = reference_ticks(trace, r);
    let t_a = ticks.t_a.filter(|&t| t <= time_m);
    let case = classify_termination(trace, r)?;
    let t_b = ticks.t_b.filter(|(t, _)| *t <= time_m).map(|(t, _)| t);

    let vm = Vm::new(read_mode);
    let eval = r.t.evaluator_program();
    let mut s = vm.start(std::sync::Arc::new(eval), &x);
    while vm.step(&mut s) == crate::vm::Status::Running {}
    let t_value = s.register(1).to_biguint();
    let time_t = s.steps_used();
    let direct_budget = t_value
        .clone()
        .try_into()
        .unwrap_or(u64::MAX)
        .saturating_add(1);
    let time_p_prime = match vm.run(&r.p, &x, direct_budget) {
        ExecOutcome::Halted { steps, .. } => Some(steps),
        _ => None,
    };

    let l_p = r.p.length_bits() as u64;
    let l_t = r.t.bit_len() as u64;
    let periods = trace.periods().len() as u64;
    let slack = 10 * (periods + 1);
    // Before B's check (or before the pool add), T_B lies beyond time_M.
    let t_b_eff = t_b.unwrap_or(time_m);
    let four_tb = BigUint::from(t_b_eff) * 4u32;
    let five_t = &t_value * 5u32;
    let case_rhs = four_tb.max(five_t.clone()) + slack;
    let dp = d_p(l_p, l_t);
    let cp = c_p(r.proof_len, kappa);
    let thm_rhs = &five_t + &dp * time_t + &cp;
    let tm = BigUint::from(time_m);
    let case_bound = Inequality::le(&tm, &case_rhs);
    let theorem_bound = Inequality::le(&tm, &thm_rhs);
    let t_b_bound = t_a.map(|t| BigUint::from(t) + (BigUint::from(10u32) << (l_p + l_t)) * time_t);
    Ok(BoundReport {
        p_prime: r.p.to_hex(),
        t_prime: r.t.coeffs().to_vec(),
        n: x.len() as u64,
        l_p,
        l_t,
        l_proof: r.proof_len,
        kappa,
        t_value: t_value.to_string(),
        time_t,
        time_p_prime,
        time_m,
        t_a,
        t_b,
        t_b_bound: t_b_bound.map(|b| b.to_string()),
        k0: t_b.and_then(|t| period_at(trace, t)),
        periods,
        slack,
        case,
        d_p: dp.to_string(),
        c_p: cp.to_string(),
        pass: case_bound.pass && theorem_bound.pass,
        case_bound,
        theorem_bound,
        applicable,
    })
}
