//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every check recomputes its quantities on the test side rather
//! than trusting the reports the library writes.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use common::*;
use speedup::codec::Bits;
use speedup::harness::{builtin, delay, load_scenario, run_all, Experiment, RunOptions, Scenario};
use speedup::kcomplexity::{brute_kpp_witness, kpp_estimate, kpp_trajectory};
use speedup::levin::levin_search;
use speedup::mstar::{
    classify_termination, run_mstar, Case, Event, MConfig, MStarError, ProofSource, Trace,
};
use speedup::proofsys::{check_certificate, CostPoly, Verdict, CATALOG};
use speedup::vm::{Program, ReadMode, Vm};

type Verdicts = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdicts + 'a>);

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn corpus() -> Vec<Scenario> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p).unwrap()).collect()
}

fn lenient(s: &Scenario) -> bool {
    s.config.read_mode == ReadMode::Lenient
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_correctness(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let mut runs = 0;
    let mut empty_pools = 0;
    let mut rejected = 0;
    let mut mid_period = 0;
    let mut case_iv = 0;
    for e in exps {
        let s = &scen[&e.report.scenario];
        let pstar = s.pstar.as_ref().unwrap();
        if s.config.proof_source == ProofSource::Empty {
            empty_pools += 1;
        }
        for ((_, t), x) in e.traces.iter().zip(&s.inputs) {
            let (_, out, _) = t
                .halt()
                .ok_or_else(|| format!("{}: n={} did not halt", s.name, x.len()))?;
            let want = match oracle_run(pstar, x.as_slice(), lenient(s), u64::MAX) {
                Outcome::Halted { output, .. } => Bits::from_bools(output).to_string(),
                o => return Err(format!("{}: p* does not halt: {o:?}", s.name)),
            };
            ensure(out == want, || {
                format!("{}: n={} output {out} != {want}", s.name, x.len())
            })?;
            runs += 1;
            let mut period_start = 0;
            for r in t.iter() {
                match &r.event {
                    Event::PeriodStart { .. } => period_start = r.tick,
                    Event::FastUpdate { .. } if r.tick > period_start => mid_period += 1,
                    Event::CertRejected { .. } => rejected += 1,
                    _ => {}
                }
            }
        }
        case_iv += e
            .report
            .runs
            .iter()
            .filter(|r| r.case == Some(Case::Iv))
            .count();
    }
    ensure(exps.len() >= 20, || {
        format!("only {} scenarios", exps.len())
    })?;
    ensure(
        empty_pools > 0 && rejected > 0 && mid_period > 0 && case_iv > 0,
        || {
            format!("corpus coverage: empty {empty_pools}, rejected {rejected}, mid-period {mid_period}, loose {case_iv}")
        },
    )?;
    Ok(format!(
        "{runs} runs over {} scenarios equal direct execution",
        exps.len()
    ))
}

struct BoundFacts {
    time_m: u64,
    t_value: BigUint,
    t_b: u64,
    periods: u64,
    case: Case,
    theorem_rhs: BigUint,
}

/// Everything the bound checks need, recomputed from the trace and the
/// reference alone.
fn bound_facts(s: &Scenario, trace: &Trace, x: &Bits) -> Result<BoundFacts, String> {
    let r = &s.reference.as_ref().unwrap().reference;
    let time_m = trace.time_m().ok_or("no halt")?;
    let (kappa, share, sched) = match trace.header() {
        Some(Event::Header {
            kappa,
            share_mode,
            scheduler,
            ..
        }) => (*kappa, share_mode.clone(), scheduler.clone()),
        _ => return Err("no header".into()),
    };
    assert_eq!((share.as_str(), sched.as_str()), ("fixed", "round"));
    let n = x.len() as u64;
    let t_value = r.t.eval(n);
    let time_t = 3 * r.t.degree() as u64 + 2;
    let hex = r.p.to_hex();
    let mut entry = None;
    let mut t_a = None;
    let mut t_b = None;
    let mut periods = Vec::new();
    for rec in trace.iter() {
        match &rec.event {
            Event::PoolAdd {
                entry: id, p, t, ..
            } if entry.is_none() && *p == hex && t.as_slice() == r.t.coeffs() => {
                entry = Some(*id);
                t_a = Some(rec.tick);
            }
            Event::TBoundComputed { entry: id, .. } if Some(*id) == entry && t_b.is_none() => {
                t_b = Some(rec.tick)
            }
            Event::PeriodStart { k, .. } => periods.push((rec.tick, *k)),
            _ => {}
        }
    }
    let (_, _, k_halt) = trace.halt().unwrap();
    // The period running when B finished; C halts in it (ii), in the next
    // one with room for t_fast (iii), or later (iv).
    let case = match (t_a.filter(|&t| t <= time_m), t_b.filter(|&t| t <= time_m)) {
        (None, _) => Case::PrePool,
        (Some(_), None) => Case::I,
        (Some(_), Some(tb)) => {
            let k0 = periods.iter().rfind(|(t, _)| *t < tb).map_or(0, |p| p.1);
            if k_halt == k0 {
                Case::Ii
            } else if k_halt == 2 * k0 && BigUint::from(2 * k0) >= t_value {
                Case::Iii
            } else {
                Case::Iv
            }
        }
    };
    let l_p = r.p.length_bits() as u64;
    let l_t = r.t.bit_len() as u64;
    let l_proof = r.proof_len;
    let d_p = BigUint::from(40u32) << (l_p + l_t);
    let c_p = (BigUint::from(40u32) << (l_proof + 1)) * kappa * l_proof * l_proof;
    let theorem_rhs = &t_value * 5u32 + d_p * time_t + c_p;
    Ok(BoundFacts {
        time_m,
        t_value,
        t_b: t_b.filter(|&t| t <= time_m).unwrap_or(time_m),
        periods: periods.len() as u64,
        case,
        theorem_rhs,
    })
}

fn bound_scenarios<'a>(
    exps: &'a [Experiment],
    scen: &'a BTreeMap<String, Scenario>,
) -> Vec<(&'a Scenario, &'a Experiment)> {
    exps.iter()
        .map(|e| (&scen[&e.report.scenario], e))
        .filter(|(s, _)| {
            s.reference.is_some()
                && s.config.share_mode == speedup::codec::ShareMode::Fixed
                && s.config.scheduler == speedup::mstar::SchedulerMode::Round
        })
        .collect()
}

fn c2_theorem(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let mut checked = 0;
    let mut worst = 0f64;
    let sc = bound_scenarios(exps, scen);
    for (s, e) in &sc {
        for ((_, t), x) in e.traces.iter().zip(&s.inputs) {
            let f = bound_facts(s, t, x)?;
            ensure(BigUint::from(f.time_m) <= f.theorem_rhs, || {
                format!("{} n={}: {} > {}", s.name, x.len(), f.time_m, f.theorem_rhs)
            })?;
            let ratio = f.time_m as f64 / f.theorem_rhs.to_string().parse::<f64>().unwrap();
            worst = worst.max(ratio);
            checked += 1;
        }
    }
    ensure(sc.len() >= 3, || format!("only {} scenarios", sc.len()))?;
    Ok(format!(
        "{checked} runs in {} scenarios; max time_M / rhs = {worst:.2e}",
        sc.len()
    ))
}

fn c3_cases(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let sc = bound_scenarios(exps, scen);
    for (s, e) in &sc {
        let r = s.reference.as_ref().unwrap();
        for ((_, t), x) in e.traces.iter().zip(&s.inputs) {
            let f = bound_facts(s, t, x)?;
            let rhs = (BigUint::from(4 * f.t_b)).max(&f.t_value * 5u32)
                + BigUint::from(10 * (f.periods + 1));
            ensure(BigUint::from(f.time_m) <= rhs, || {
                format!("{} n={}: {} > {rhs}", s.name, x.len(), f.time_m)
            })?;
            let lib = classify_termination(t, &r.reference).map_err(|e| e.to_string())?;
            ensure(lib == f.case, || {
                format!(
                    "{} n={}: classified {lib}, trace says {}",
                    s.name,
                    x.len(),
                    f.case
                )
            })?;
            if let Some(want) = r.expect_case {
                ensure(want == lib, || {
                    format!("{} n={}: {lib}, expected {want}", s.name, x.len())
                })?;
            }
            // Halting before the reference even entered the pool is the
            // earliest form of case i.
            let label = match lib {
                Case::PrePool => "i (pre-pool)".to_string(),
                c => c.to_string(),
            };
            *seen.entry(label).or_default() += 1;
        }
    }
    for c in ["i", "ii", "iii"] {
        ensure(seen.contains_key(c), || {
            format!("no case {c} run: {seen:?}")
        })?;
    }
    Ok(format!("cases {seen:?}"))
}

fn c4_c_alone() -> Verdicts {
    let cfg = MConfig::default();
    for tau in 1..=4096u64 {
        let run = run_mstar(&delay(tau), &Bits::new(), &cfg).map_err(|e| e.to_string())?;
        let (_, _, c, _) = run.trace.summary().ok_or("no summary")?;
        let mut closed = tau;
        let mut k = 1;
        while k < tau {
            closed += k;
            k *= 2;
        }
        ensure(c == closed && c <= 4 * tau, || {
            format!("tau {tau}: {c} C-steps, closed form {closed}")
        })?;
    }
    Ok("tau = 1..4096: C-steps equal the closed form and stay within 4 tau".into())
}

fn kraft_in_trace(t: &Trace) -> Result<usize, String> {
    let mut sum = BigUint::from(0u8);
    let scale = 256u32;
    let mut adds = 0;
    for r in t.iter() {
        match &r.event {
            Event::CycleStart { .. } => sum = BigUint::from(0u8),
            Event::PoolAdd {
                exponent,
                kraft_total,
                ..
            } => {
                sum += BigUint::from(1u8) << (scale - exponent);
                let (num, exp) = match kraft_total.split_once("/2^") {
                    Some((n, e)) => (n.parse::<BigUint>().unwrap(), e.parse::<u32>().unwrap()),
                    None => (kraft_total.parse::<BigUint>().unwrap(), 0),
                };
                ensure(num.clone() << (scale - exp) == sum, || {
                    format!("tick {}: ledger {kraft_total} disagrees with adds", r.tick)
                })?;
                ensure(sum <= BigUint::from(1u8) << scale, || {
                    format!("tick {}: Kraft total {kraft_total} > 1", r.tick)
                })?;
                adds += 1;
            }
            _ => {}
        }
    }
    Ok(adds)
}

fn slots(t: u64) -> (u64, u64, u64) {
    let a = t.div_ceil(10);
    let b = (t + 8) / 10;
    (a, b, t - a - b)
}

fn c5_kraft_and_ratio(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let mut adds = 0;
    let mut rounds = 0;
    for e in exps {
        let s = &scen[&e.report.scenario];
        for (_, t) in &e.traces {
            adds += kraft_in_trace(t).map_err(|m| format!("{}: {m}", s.name))?;
            if s.config.scheduler == speedup::mstar::SchedulerMode::Round {
                let (a, b, c, total) = t.summary().ok_or("no summary")?;
                ensure((a, b, c) == slots(total), || {
                    format!("{}: summary {a}:{b}:{c} at tick {total}", s.name)
                })?;
                rounds += 1;
            }
        }
    }
    let pool = [
        ("busy2", ProofSource::Enumerate),
        ("copy_input", ProofSource::Enumerate),
        ("busy2", scen["busy2_case_iii"].config.proof_source.clone()),
        (
            "slow_scan",
            scen["scan_fixed_64"].config.proof_source.clone(),
        ),
    ];
    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (0..pool.len(), 1u64..400, 0usize..60);
    runner
        .run(&strategy, |(i, r, n)| {
            let (name, src) = &pool[i];
            let cfg = MConfig {
                proof_source: src.clone(),
                global_budget: 10 * r,
                ..MConfig::default()
            };
            let t = match run_mstar(&builtin(name).unwrap(), &ones(n), &cfg) {
                Ok(run) => run.trace,
                Err(MStarError::GlobalBudgetExhausted { trace, .. }) => *trace,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let (a, b, c, total) = t.summary().unwrap();
            if total == 10 * r {
                prop_assert_eq!((a, b, c), (r, r, 8 * r));
            } else {
                prop_assert_eq!((a, b, c), slots(total));
            }
            kraft_in_trace(&t).map_err(TestCaseError::fail)?;
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{adds} pool adds within Kraft; {rounds} corpus summaries and 256 budget cuts exactly 1:1:8"
    ))
}

fn c6_levin(scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let mut lines = Vec::new();
    let vm = Vm::new(ReadMode::Strict);
    for s in scen.values().filter(|s| s.levin.is_some()) {
        let spec = s.levin.as_ref().unwrap();
        let res = levin_search(&spec.problem, &spec.config).map_err(|e| e.to_string())?;
        let gy = vm.run(&spec.problem.g, &res.y, spec.problem.verify_budget);
        ensure(gy.halted_output() == Some(&spec.problem.x), || {
            format!("{}: g(y) != x", s.name)
        })?;
        let tp = match vm.run(&res.program, &spec.problem.x, 1 << 32) {
            speedup::vm::ExecOutcome::Halted { output, steps } if output == res.y => steps,
            _ => return Err(format!("{}: program does not print y", s.name)),
        };
        let tv = gy.steps();
        let allowance = (1u128 << (res.program.length_bits() + 1)) * (tp + tv) as u128;
        ensure(res.total_ticks as u128 <= allowance, || {
            format!("{}: {} > {allowance}", s.name, res.total_ticks)
        })?;
        if let Some(pl) = &spec.planted {
            let run = vm.run(pl, &spec.problem.x, 1 << 32);
            let y = run.halted_output().ok_or("planted program does not halt")?;
            let v = vm.run(&spec.problem.g, y, spec.problem.verify_budget);
            ensure(v.halted_output() == Some(&spec.problem.x), || {
                format!("{}: planted program is no preimage finder", s.name)
            })?;
            let planted = (1u128 << (pl.length_bits() + 1)) * (run.steps() + v.steps()) as u128;
            ensure(res.total_ticks as u128 <= planted, || {
                format!(
                    "{}: {} > planted allowance {planted}",
                    s.name, res.total_ticks
                )
            })?;
        }
        lines.push(format!("{} {}<={}", s.name, res.total_ticks, allowance));
    }
    ensure(lines.len() >= 3, || {
        format!("only {} problems", lines.len())
    })?;
    Ok(lines.join(", "))
}

fn c7_kpp() -> Verdicts {
    let programs = [
        "NOP; HALT",
        "MOV R0, R0; HALT",
        "HALT; NOP",
        "NOP; NOP; HALT",
    ];
    let mut lines = Vec::new();
    for src in programs {
        let p = Program::parse_asm(src).unwrap();
        let w = brute_kpp_witness(&p, 2);
        let idx = w.certificate_index().ok_or("witness beyond index range")?;
        if let Some(cert) = &w.certificate {
            ensure(check_certificate(cert, &p).verdict.is_accepted(), || {
                format!("{src}: witness certificate rejected")
            })?;
        }
        let (est, traj) = kpp_trajectory(&p, idx + 1);
        ensure(traj.windows(2).all(|w| w[1].1 <= w[0].1), || {
            format!("{src}: trajectory increases")
        })?;
        ensure(est.current_min_bits == w.len_bits(), || {
            format!(
                "{src}: {} at effort {}, oracle {}",
                est.current_min_bits,
                idx + 1,
                w.len_bits()
            )
        })?;
        let before = kpp_estimate(&p, idx);
        ensure(before.current_min_bits >= est.current_min_bits, || {
            format!("{src}: estimate increased with effort")
        })?;
        lines.push(format!("{src} -> {} bits at index {idx}", w.len_bits()));
    }
    Ok(lines.join("; "))
}

fn c8_ratio(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let s = &scen["scan_ratio"];
    let e = exps
        .iter()
        .find(|e| e.report.scenario == "scan_ratio")
        .unwrap();
    let t = &s.reference.as_ref().unwrap().reference.t;
    let mut pts = Vec::new();
    for ((_, tr), x) in e.traces.iter().zip(&s.inputs) {
        let tm = tr.time_m().ok_or("no halt")?;
        let tv: f64 = t.eval(x.len() as u64).to_string().parse().unwrap();
        pts.push((x.len(), tm as f64 / tv));
    }
    let ns: Vec<usize> = pts.iter().map(|p| p.0).collect();
    ensure(ns.first() == Some(&64) && ns.last() == Some(&2048), || {
        format!("sizes {ns:?}")
    })?;
    ensure(pts.windows(2).all(|w| w[1].1 < w[0].1), || {
        format!("not decreasing: {pts:?}")
    })?;
    let last = pts.last().unwrap().1;
    ensure(last <= 6.0, || format!("ratio {last:.3} at n=2048"))?;
    Ok(pts
        .iter()
        .map(|(n, r)| format!("{n}:{r:.2}"))
        .collect::<Vec<_>>()
        .join(" "))
}

fn accepted_pairs(
    exps: &[Experiment],
    scen: &BTreeMap<String, Scenario>,
) -> Vec<(String, Program, Program, CostPoly)> {
    let mut out = Vec::new();
    for s in scen.values() {
        let Some(pstar) = &s.pstar else { continue };
        if let ProofSource::Scripted(entries) = &s.config.proof_source {
            for en in entries {
                if let Verdict::Accepted { p, t, .. } = check_certificate(&en.bits, pstar).verdict {
                    out.push((s.name.clone(), pstar.clone(), p, t));
                }
            }
        }
    }
    for e in exps {
        let pstar = scen[&e.report.scenario].pstar.clone().unwrap();
        for (_, t) in &e.traces {
            for r in t.iter() {
                if let Event::CertAccepted { p, t, .. } = &r.event {
                    out.push((
                        e.report.scenario.clone(),
                        pstar.clone(),
                        Program::from_hex(p).unwrap(),
                        CostPoly::new(t.clone()),
                    ));
                }
            }
        }
    }
    out.sort_by_key(|(n, _, p, t)| (n.clone(), p.to_hex(), t.coeffs().to_vec()));
    out.dedup_by_key(|(n, _, p, t)| (n.clone(), p.to_hex(), t.coeffs().to_vec()));
    out
}

fn c9_soundness(exps: &[Experiment], scen: &BTreeMap<String, Scenario>) -> Verdicts {
    let inputs = all_inputs(6);
    let pairs = accepted_pairs(exps, scen);
    for (name, pstar, p, t) in &pairs {
        for lenient in [false, true] {
            for x in &inputs {
                let want = oracle_run(pstar, x, lenient, 1 << 24);
                let got = oracle_run(p, x, lenient, 1 << 24);
                ensure(got.same_result(&want), || {
                    format!("{name}: {} differs from p* on {x:?}", p.to_asm())
                })?;
                if let Outcome::Halted { steps, .. } = got {
                    ensure(t.eval(x.len() as u64) >= steps.into(), || {
                        format!("{name}: bound {:?} below {steps} on {x:?}", t.coeffs())
                    })?;
                }
            }
        }
    }
    ensure(!pairs.is_empty(), || "no accepted certificates".into())?;
    let applied = rule_sweep(4, 6)?;
    ensure(applied.len() == CATALOG.len(), || {
        format!("rules never exercised: {applied:?}")
    })?;
    Ok(format!(
        "{} accepted certificates sound on {} inputs; {} rewrites over {} rules sound",
        pairs.len(),
        inputs.len(),
        applied.values().sum::<usize>(),
        applied.len()
    ))
}

fn read_tree(dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>, root: &Path) {
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            read_tree(&p, out, root);
        } else {
            out.insert(
                p.strip_prefix(root).unwrap().to_path_buf(),
                std::fs::read(&p).unwrap(),
            );
        }
    }
}

fn c10_determinism() -> Verdicts {
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let st = Command::new(env!("CARGO_BIN_EXE_speedup"))
            .arg("run")
            .arg(scenarios_dir())
            .arg("--out")
            .arg(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(st.status.success(), || {
            String::from_utf8_lossy(&st.stdout).into_owned()
        })?;
        let mut files = BTreeMap::new();
        read_tree(dir.path(), &mut files, dir.path());
        trees.push(files);
    }
    let traces = trees[0]
        .keys()
        .filter(|p| p.to_string_lossy().ends_with(".jsonl"))
        .count();
    ensure(trees[0] == trees[1], || {
        let diff: Vec<_> = trees[0]
            .iter()
            .filter(|(k, v)| trees[1].get(*k) != Some(v))
            .map(|(k, _)| k.display().to_string())
            .collect();
        format!("differing files: {diff:?}")
    })?;
    Ok(format!(
        "{} files ({traces} traces) byte-identical across two runs",
        trees[0].len()
    ))
}

fn main() -> ExitCode {
    let all = corpus();
    let scen: BTreeMap<String, Scenario> =
        all.iter().map(|s| (s.name.clone(), s.clone())).collect();
    let with_pstar: Vec<Scenario> = all.iter().filter(|s| s.pstar.is_some()).cloned().collect();
    let t0 = Instant::now();
    let exps = run_all(&with_pstar, &RunOptions::default());
    let corpus_time = t0.elapsed();

    let criteria: Vec<Criterion> = vec![
        (
            "correctness invariance",
            Box::new(|| c1_correctness(&exps, &scen)),
        ),
        ("theorem bound", Box::new(|| c2_theorem(&exps, &scen))),
        ("case-analysis bound", Box::new(|| c3_cases(&exps, &scen))),
        ("C-alone doubling bound", Box::new(c4_c_alone)),
        (
            "Kraft and 1:1:8 schedule",
            Box::new(|| c5_kraft_and_ratio(&exps, &scen)),
        ),
        ("Levin factor", Box::new(|| c6_levin(&scen))),
        ("K'' oracle equivalence", Box::new(c7_kpp)),
        ("asymptotic ratio", Box::new(|| c8_ratio(&exps, &scen))),
        (
            "proof-system soundness",
            Box::new(|| c9_soundness(&exps, &scen)),
        ),
        ("determinism", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let mut secs = t.elapsed().as_secs_f64();
        if i == 0 {
            secs += corpus_time.as_secs_f64();
        }
        match r {
            Ok(msg) => println!("PASS criterion {}: {name} ({secs:.1}s) - {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({secs:.1}s) - {msg}", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
