//! Running scenarios and turning traces into reports. Every verdict in a
//! [`RunReport`] is computed by [`evaluate_trace`] from the trace and the
//! scenario alone, so `verify` reproduces `run` exactly.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::{KppSpec, LevinSpec, Scenario};
use crate::codec::Bits;
use crate::kcomplexity::{
    brute_kpp_witness, build_mwrap, kpp_trajectory, KppEstimate, WrapConfig, DEFAULT_C_M,
};
use crate::levin::{levin_search, LevinError, LevinRecord};
use crate::mstar::{
    classify_termination, run_mstar_persistent, verify_bound, AState, BoundReport, Case, Event,
    MStarError, SchedulerMode, Trace,
};
use crate::proofsys::KAPPA;
use crate::vm::{ExecOutcome, Program, Vm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ticks {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub total: u64,
}

/// C's work when `p_fast` never changed: `2^m - 1 + tau` with
/// `m = ceil(log2 tau)`, at most `4 tau`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CAlone {
    pub tau: u64,
    pub c_steps: u64,
    pub closed_form: u64,
    pub pass: bool,
}

pub fn c_alone_closed_form(tau: u64) -> u64 {
    let m = tau.max(1).next_power_of_two();
    m - 1 + tau
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub input_index: Option<usize>,
    pub n: u64,
    pub trace_file: String,
    pub output: Option<String>,
    pub expected_output: Option<String>,
    pub time_m: Option<u64>,
    pub ticks: Option<Ticks>,
    pub periods: u64,
    pub fast_updates: u64,
    pub case: Option<Case>,
    pub bound: Option<BoundReport>,
    pub c_alone: Option<CAlone>,
    pub error: Option<String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub scheduler: SchedulerMode,
    pub share_mode: crate::codec::ShareMode,
    pub persistent_a: bool,
    pub kappa: u64,
    pub runs: Vec<RunReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub mode: Option<SchedulerMode>,
    pub budget: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: Report,
    /// `(file name, trace)` per input.
    pub traces: Vec<(String, Trace)>,
}

fn direct_run(p: &Program, x: &Bits, s: &Scenario) -> Option<(Bits, u64)> {
    match Vm::new(s.config.read_mode).run(p, x, s.config.global_budget) {
        ExecOutcome::Halted { output, steps } => Some((output, steps)),
        _ => None,
    }
}

pub fn trace_file_name(index: usize) -> String {
    format!("input-{index:03}.trace.jsonl")
}

/// Recomputes every verdict for one run from its trace.
pub fn evaluate_trace(s: &Scenario, trace_file: &str, trace: &Trace) -> RunReport {
    let mut checks = Vec::new();
    let x = trace.input().and_then(|x| Bits::parse(x).ok());
    let mut r = RunReport {
        input_index: x
            .as_ref()
            .and_then(|x| s.inputs.iter().position(|i| i == x)),
        n: x.as_ref().map_or(0, |x| x.len() as u64),
        trace_file: trace_file.into(),
        output: trace.halt().map(|(_, o, _)| o.to_string()),
        expected_output: None,
        time_m: trace.time_m(),
        ticks: trace
            .summary()
            .map(|(a, b, c, total)| Ticks { a, b, c, total }),
        periods: trace.periods().len() as u64,
        fast_updates: trace.t_fast_series().len() as u64 - 1,
        case: None,
        bound: None,
        c_alone: None,
        error: None,
        checks: Vec::new(),
        pass: false,
    };
    let (Some(x), Some(pstar)) = (x, s.pstar.as_ref()) else {
        r.error = Some("trace has no readable header".into());
        r.checks.push(Check::new("header", false, "missing"));
        return r;
    };
    if trace
        .iter()
        .any(|rec| matches!(rec.event, Event::BudgetExhausted { .. }))
    {
        r.error = Some(format!(
            "global budget of {} ticks exhausted",
            s.config.global_budget
        ));
    }
    checks.push(Check::new(
        "halted",
        r.output.is_some(),
        r.error.clone().unwrap_or_default(),
    ));
    let direct = direct_run(pstar, &x, s);
    r.expected_output = direct.as_ref().map(|(o, _)| o.to_string());
    checks.push(Check::new(
        "output_matches_direct",
        r.output.is_some() && r.output == r.expected_output,
        match &direct {
            Some((_, steps)) => format!("p* halts directly in {steps} steps"),
            None => "p* did not halt directly within the budget".into(),
        },
    ));

    if let (Some(time_m), Some(ticks), Some((_, tau))) = (r.time_m, r.ticks, &direct) {
        let updated_before_halt = trace
            .t_fast_series()
            .iter()
            .skip(1)
            .any(|&(t, _)| t <= time_m);
        if !updated_before_halt {
            let closed = c_alone_closed_form(*tau);
            let pass = ticks.c == closed && ticks.c <= 4 * tau;
            r.c_alone = Some(CAlone {
                tau: *tau,
                c_steps: ticks.c,
                closed_form: closed,
                pass,
            });
            checks.push(Check::new(
                "c_alone",
                pass,
                format!(
                    "C steps {} vs 2^m - 1 + tau = {closed}, 4 tau = {}",
                    ticks.c,
                    4 * tau
                ),
            ));
        }
    }

    if let (Some(sr), Some(_)) = (&s.reference, r.time_m) {
        match (
            classify_termination(trace, &sr.reference),
            verify_bound(trace, &sr.reference),
        ) {
            (Ok(case), Ok(b)) => {
                r.case = Some(case);
                if let Some(want) = sr.expect_case {
                    checks.push(Check::new(
                        "expected_case",
                        case == want,
                        format!("got {case}, want {want}"),
                    ));
                }
                if b.applicable {
                    checks.push(Check::new(
                        "theorem_bound",
                        b.theorem_bound.pass,
                        format!("{} <= {}", b.theorem_bound.lhs, b.theorem_bound.rhs),
                    ));
                    checks.push(Check::new(
                        "case_bound",
                        b.case_bound.pass,
                        format!("{} <= {}", b.case_bound.lhs, b.case_bound.rhs),
                    ));
                }
                r.bound = Some(b);
            }
            (Err(e), _) | (_, Err(e)) => {
                checks.push(Check::new("bound", false, e.to_string()));
            }
        }
    } else if s.reference.is_none() && r.time_m.is_some() && trace_pool_empty(trace) {
        r.case = Some(Case::PrePool);
    }

    r.pass = checks.iter().all(|c| c.pass);
    r.checks = checks;
    r
}

fn trace_pool_empty(trace: &Trace) -> bool {
    let halt = trace.time_m().unwrap_or(u64::MAX);
    !trace
        .iter()
        .any(|r| r.tick <= halt && matches!(r.event, Event::PoolAdd { .. }))
}

pub fn run_experiment(s: &Scenario, opts: &RunOptions) -> Experiment {
    let mut s = s.clone();
    if let Some(m) = opts.mode {
        s.config.scheduler = m;
    }
    if let Some(b) = opts.budget {
        s.config.global_budget = b;
    }
    let mut runs = Vec::new();
    let mut traces = Vec::new();
    let mut a = AState::default();
    if let Some(pstar) = s.pstar.clone() {
        for (i, x) in s.inputs.iter().enumerate() {
            if !s.persistent_a {
                a = AState::default();
            }
            let name = trace_file_name(i);
            let res = run_mstar_persistent(&pstar, x, &s.config, &mut a);
            let trace = match res {
                Ok(run) => run.trace,
                Err(MStarError::GlobalBudgetExhausted { trace, .. }) => *trace,
                Err(e @ MStarError::ScenarioInvalid(_)) => {
                    runs.push(RunReport {
                        input_index: Some(i),
                        n: x.len() as u64,
                        trace_file: String::new(),
                        output: None,
                        expected_output: None,
                        time_m: None,
                        ticks: None,
                        periods: 0,
                        fast_updates: 0,
                        case: None,
                        bound: None,
                        c_alone: None,
                        error: Some(e.to_string()),
                        checks: vec![Check::new("scenario", false, e.to_string())],
                        pass: false,
                    });
                    continue;
                }
            };
            runs.push(evaluate_trace(&s, &name, &trace));
            traces.push((name, trace));
        }
    }
    let pass = !runs.is_empty() && runs.iter().all(|r| r.pass);
    Experiment {
        report: Report {
            scenario: s.name.clone(),
            scheduler: s.config.scheduler,
            share_mode: s.config.share_mode,
            persistent_a: s.persistent_a,
            kappa: KAPPA,
            runs,
            pass,
        },
        traces,
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

/// Writes `<out>/<scenario>/input-NNN.trace.jsonl` and `report.json`;
/// returns the scenario directory.
pub fn write_experiment(e: &Experiment, out: &Path) -> std::io::Result<PathBuf> {
    let dir = out.join(&e.report.scenario);
    std::fs::create_dir_all(&dir)?;
    for (name, t) in &e.traces {
        std::fs::write(dir.join(name), t.to_jsonl())?;
    }
    std::fs::write(dir.join("report.json"), to_json(&e.report))?;
    Ok(dir)
}

/// Runs scenarios on worker threads; results come back in input order.
pub fn run_all(scenarios: &[Scenario], opts: &RunOptions) -> Vec<Experiment> {
    std::thread::scope(|sc| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| sc.spawn(move || run_experiment(s, opts)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlantedCheck {
    pub program: String,
    pub l_p: u64,
    pub time_p: u64,
    pub time_verify: u64,
    pub allowance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevinReport {
    pub scenario: String,
    pub g: String,
    pub x: String,
    pub y: Option<String>,
    pub program: Option<String>,
    pub l_p: Option<u64>,
    pub time_p: Option<u64>,
    pub time_verify: Option<u64>,
    pub total_ticks: u64,
    pub allowance: Option<String>,
    /// `total_ticks / (2^{l(p)} (time_p + time_verify))`.
    pub measured_factor: Option<f64>,
    pub planted: Option<PlantedCheck>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Runs `p` on `x`, then `g` on the result; `(time_p, time_verify, g(p(x)))`.
fn planted_cost(spec: &LevinSpec, p: &Program) -> Option<(u64, u64, Bits)> {
    let vm = Vm::new(spec.config.read_mode);
    let ExecOutcome::Halted { output: y, steps } = vm.run(p, &spec.problem.x, 1 << 32) else {
        return None;
    };
    let ExecOutcome::Halted {
        output: gy,
        steps: vs,
    } = vm.run(&spec.problem.g, &y, spec.problem.verify_budget)
    else {
        return None;
    };
    Some((steps, vs, gy))
}

pub fn run_levin(name: &str, spec: &LevinSpec) -> (LevinReport, Vec<LevinRecord>) {
    let mut checks = Vec::new();
    let mut rep = LevinReport {
        scenario: name.into(),
        g: spec.problem.g.to_hex(),
        x: spec.problem.x.to_string(),
        y: None,
        program: None,
        l_p: None,
        time_p: None,
        time_verify: None,
        total_ticks: 0,
        allowance: None,
        measured_factor: None,
        planted: None,
        checks: Vec::new(),
        pass: false,
    };
    let records = match levin_search(&spec.problem, &spec.config) {
        Ok(res) => {
            rep.y = Some(res.y.to_string());
            rep.program = Some(res.program.to_hex());
            rep.l_p = Some(res.l_p);
            rep.time_p = Some(res.time_p);
            rep.time_verify = Some(res.time_verify);
            rep.total_ticks = res.total_ticks;
            rep.allowance = Some(res.allowance().to_string());
            rep.measured_factor = Some(
                res.total_ticks as f64
                    / ((1u128 << res.l_p) as f64 * (res.time_p + res.time_verify) as f64),
            );
            let vm = Vm::new(spec.config.read_mode);
            let recheck = vm
                .run(&spec.problem.g, &res.y, spec.problem.verify_budget)
                .halted_output()
                .is_some_and(|o| *o == spec.problem.x);
            checks.push(Check::new(
                "g_of_y_is_x",
                recheck,
                "independent re-run of g",
            ));
            checks.push(Check::new(
                "levin_factor",
                res.total_ticks as u128 <= res.allowance(),
                format!("{} <= {}", res.total_ticks, res.allowance()),
            ));
            if let Some(pl) = &spec.planted {
                let l = pl.length_bits() as u64;
                match planted_cost(spec, pl) {
                    Some((tp, tv, gy)) if gy == spec.problem.x => {
                        let allowance = (1u128 << (l + 1)) * (tp + tv) as u128;
                        let pass = res.total_ticks as u128 <= allowance;
                        checks.push(Check::new(
                            "planted_factor",
                            pass,
                            format!("{} <= {allowance}", res.total_ticks),
                        ));
                        rep.planted = Some(PlantedCheck {
                            program: pl.to_hex(),
                            l_p: l,
                            time_p: tp,
                            time_verify: tv,
                            allowance: allowance.to_string(),
                            pass,
                        });
                    }
                    _ => checks.push(Check::new(
                        "planted_factor",
                        false,
                        "planted program does not invert g on x",
                    )),
                }
            }
            res.trace
        }
        Err(LevinError::NoSolutionWithinBudget { ticks, trace }) => {
            rep.total_ticks = ticks;
            checks.push(Check::new(
                "found",
                false,
                format!("no solution within {ticks} ticks"),
            ));
            trace
        }
    };
    rep.pass = checks.iter().all(|c| c.pass);
    rep.checks = checks;
    (rep, records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KppReport {
    pub scenario: String,
    pub pstar: String,
    pub effort: u64,
    pub estimate: KppEstimate,
    pub trajectory: Vec<(u64, u64)>,
    pub brute: Option<u64>,
    pub brute_witness_index: Option<u64>,
    pub wrap_length: Option<u64>,
    pub c_m: u64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

pub fn run_kpp(name: &str, pstar: &Program, spec: &KppSpec) -> KppReport {
    let (est, traj) = kpp_trajectory(pstar, spec.effort);
    let mut checks = vec![Check::new(
        "non_increasing",
        traj.windows(2).all(|w| w[1].1 <= w[0].1),
        format!("{} trajectory points", traj.len()),
    )];
    let brute = brute_kpp_witness(pstar, spec.max_deriv);
    let idx = brute.certificate_index();
    if let Some(i) = idx.filter(|&i| i < spec.effort) {
        checks.push(Check::new(
            "oracle_agreement",
            est.current_min_bits == brute.len_bits(),
            format!(
                "estimate {} vs depth-{} oracle {} (witness index {i})",
                est.current_min_bits,
                spec.max_deriv,
                brute.len_bits()
            ),
        ));
    }
    let wrap = est.witness_certificate.as_ref().and_then(|c| {
        build_mwrap(
            &est.witness,
            &WrapConfig {
                pstar: pstar.clone(),
                certificate: c.clone(),
                c_m: DEFAULT_C_M,
            },
        )
        .ok()
    });
    if let Some(w) = &wrap {
        checks.push(Check::new(
            "wrap_overhead",
            w.modeled_length_bits - est.current_min_bits == DEFAULT_C_M,
            format!("{} - {}", w.modeled_length_bits, est.current_min_bits),
        ));
    }
    KppReport {
        scenario: name.into(),
        pstar: pstar.to_hex(),
        effort: spec.effort,
        pass: checks.iter().all(|c| c.pass),
        estimate: est,
        trajectory: traj,
        brute: Some(brute.len_bits()),
        brute_witness_index: idx,
        wrap_length: wrap.map(|w| w.modeled_length_bits),
        c_m: DEFAULT_C_M,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let expect = [(1, 1), (2, 3), (3, 6), (4, 7), (5, 12), (8, 15), (9, 24)];
        for (tau, c) in expect {
            assert_eq!(c_alone_closed_form(tau), c, "tau {tau}");
            assert!(c <= 4 * tau);
        }
    }
}
