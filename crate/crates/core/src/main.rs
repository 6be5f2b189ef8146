use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use speedup::codec::Bits;
use speedup::harness::scenario::{KppSpec, LevinSpec, DEFAULT_KPP_EFFORT, DEFAULT_VERIFY_BUDGET};
use speedup::harness::{
    emit_plot_data, evaluate_trace, load_scenario, resolve_program, run_all, run_kpp, run_levin,
    write_experiment, RunOptions, Scenario, BUILTINS,
};
use speedup::kcomplexity::trajectory_csv;
use speedup::levin::{records_jsonl, InversionProblem, LevinConfig};
use speedup::mstar::{SchedulerMode, Trace};

#[derive(Parser)]
#[command(name = "speedup", version, about = "Proof-driven speed-up simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Round,
    Cycles,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run scenario files (or every *.toml in a directory).
    Run {
        scenarios: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, env = "SPEEDUP_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Recompute a run's verdicts from its trace.
    Verify { trace: PathBuf, scenario: PathBuf },
    /// Levin search for the scenario's [levin] problem, or for --g/--x.
    Levin {
        scenario: Option<PathBuf>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        verify_budget: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, env = "SPEEDUP_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Upper estimate of the shortest provably equivalent program.
    Kpp {
        scenario: PathBuf,
        #[arg(long)]
        effort: Option<u64>,
        #[arg(long, env = "SPEEDUP_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Ratio and t_fast CSV series from a directory of traces.
    Plot {
        trace_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List builtin programs.
    Builtins,
}

type Res<T> = Result<T, String>;

fn scenario_paths(args: &[PathBuf]) -> Res<Vec<PathBuf>> {
    let mut out = Vec::new();
    for a in args {
        if a.is_dir() {
            let mut v: Vec<PathBuf> = std::fs::read_dir(a)
                .map_err(|e| format!("{}: {e}", a.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "toml"))
                .collect();
            v.sort();
            out.extend(v);
        } else {
            out.push(a.clone());
        }
    }
    if out.is_empty() {
        return Err("no scenario files given".into());
    }
    Ok(out)
}

fn load(p: &Path) -> Res<Scenario> {
    load_scenario(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn write(path: &Path, text: &str) -> Res<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d).map_err(|e| format!("{}: {e}", d.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn levin_and_write(name: &str, spec: &LevinSpec, out: &Path) -> Res<bool> {
    let (rep, records) = run_levin(name, spec);
    let dir = out.join(name);
    write(&dir.join("levin.trace.jsonl"), &records_jsonl(&records))?;
    write(&dir.join("levin.json"), &json(&rep))?;
    println!(
        "{} {name} levin: y={} l(p)={} ticks={} allowance={}",
        verdict(rep.pass),
        rep.y.as_deref().unwrap_or("-"),
        rep.l_p.map_or("-".into(), |l| l.to_string()),
        rep.total_ticks,
        rep.allowance.as_deref().unwrap_or("-"),
    );
    Ok(rep.pass)
}

fn cmd_run(paths: &[PathBuf], mode: Option<Mode>, budget: Option<u64>, out: &Path) -> Res<bool> {
    let scenarios = scenario_paths(paths)?
        .iter()
        .map(|p| load(p))
        .collect::<Res<Vec<_>>>()?;
    let opts = RunOptions {
        mode: mode.map(|m| match m {
            Mode::Round => SchedulerMode::Round,
            Mode::Cycles => SchedulerMode::Cycles,
        }),
        budget,
    };
    let with_pstar: Vec<Scenario> = scenarios
        .iter()
        .filter(|s| s.pstar.is_some())
        .cloned()
        .collect();
    let mut all = true;
    for e in run_all(&with_pstar, &opts) {
        write_experiment(&e, out).map_err(|err| err.to_string())?;
        let r = &e.report;
        let cases: Vec<String> = r
            .runs
            .iter()
            .map(|x| x.case.map_or("-".into(), |c| c.to_string()))
            .collect();
        println!(
            "{} {} ({} inputs, cases [{}])",
            verdict(r.pass),
            r.scenario,
            r.runs.len(),
            cases.join(",")
        );
        for run in r.runs.iter().filter(|x| !x.pass) {
            for c in run.checks.iter().filter(|c| !c.pass) {
                println!("    {}: {} {}", run.trace_file, c.name, c.detail);
            }
        }
        all &= r.pass;
    }
    for s in &scenarios {
        if let Some(l) = &s.levin {
            all &= levin_and_write(&s.name, l, out)?;
        }
    }
    Ok(all)
}

fn cmd_verify(trace: &Path, scenario: &Path) -> Res<bool> {
    let s = load(scenario)?;
    let f = std::fs::File::open(trace).map_err(|e| format!("{}: {e}", trace.display()))?;
    let t = Trace::read_jsonl(std::io::BufReader::new(f))
        .map_err(|e| format!("{}: {e}", trace.display()))?;
    let name = trace
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let r = evaluate_trace(&s, &name, &t);
    print!("{}", json(&r));
    Ok(r.pass)
}

struct LevinArgs {
    scenario: Option<PathBuf>,
    g: Option<String>,
    x: Option<String>,
    verify_budget: Option<u64>,
    budget: Option<u64>,
}

fn cmd_levin(a: LevinArgs, out: &Path) -> Res<bool> {
    let (name, mut spec) = match &a.scenario {
        Some(p) => {
            let s = load(p)?;
            let spec = s
                .levin
                .ok_or_else(|| format!("{}: no [levin] section", p.display()))?;
            (s.name, spec)
        }
        None => {
            let (Some(g), Some(x)) = (&a.g, &a.x) else {
                return Err("give a scenario or both --g and --x".into());
            };
            let spec = LevinSpec {
                problem: InversionProblem {
                    g: resolve_program(g)?,
                    x: Bits::parse(x).map_err(|e| e.to_string())?,
                    verify_budget: DEFAULT_VERIFY_BUDGET,
                },
                config: LevinConfig::default(),
                planted: None,
            };
            ("levin".to_string(), spec)
        }
    };
    if let Some(g) = &a.g {
        spec.problem.g = resolve_program(g)?;
    }
    if let Some(x) = &a.x {
        spec.problem.x = Bits::parse(x).map_err(|e| e.to_string())?;
    }
    if let Some(v) = a.verify_budget {
        spec.problem.verify_budget = v;
    }
    if let Some(b) = a.budget {
        spec.config.global_budget = b;
    }
    levin_and_write(&name, &spec, out)
}

fn cmd_kpp(scenario: &Path, effort: Option<u64>, out: &Path) -> Res<bool> {
    let s = load(scenario)?;
    let pstar = s
        .pstar
        .as_ref()
        .ok_or_else(|| format!("{}: no pstar", scenario.display()))?;
    let mut spec = s.kpp.clone().unwrap_or(KppSpec {
        effort: DEFAULT_KPP_EFFORT,
        max_deriv: 2,
    });
    if let Some(e) = effort {
        spec.effort = e;
    }
    let r = run_kpp(&s.name, pstar, &spec);
    let dir = out.join(&s.name);
    write(&dir.join("kpp.csv"), &trajectory_csv(&r.trajectory))?;
    write(&dir.join("kpp.json"), &json(&r))?;
    print!("{}", trajectory_csv(&r.trajectory));
    println!(
        "{} {}: estimate {} bits after {} candidates (witness {})",
        verdict(r.pass),
        s.name,
        r.estimate.current_min_bits,
        r.estimate.certificates_examined,
        r.estimate.witness
    );
    Ok(r.pass)
}

fn cmd_plot(dir: &Path, out: Option<PathBuf>) -> Res<bool> {
    let d = emit_plot_data(dir).map_err(|e| e.to_string())?;
    let out = out.unwrap_or_else(|| dir.to_path_buf());
    write(&out.join("ratio.csv"), &d.ratio_csv)?;
    write(&out.join("t_fast.csv"), &d.t_fast_csv)?;
    print!("{}", d.ratio_csv);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run {
            scenarios,
            mode,
            budget,
            out,
        } => cmd_run(&scenarios, mode, budget, &out),
        Cmd::Verify { trace, scenario } => cmd_verify(&trace, &scenario),
        Cmd::Levin {
            scenario,
            g,
            x,
            verify_budget,
            budget,
            out,
        } => cmd_levin(
            LevinArgs {
                scenario,
                g,
                x,
                verify_budget,
                budget,
            },
            &out,
        ),
        Cmd::Kpp {
            scenario,
            effort,
            out,
        } => cmd_kpp(&scenario, effort, &out),
        Cmd::Plot { trace_dir, out } => cmd_plot(&trace_dir, out),
        Cmd::Builtins => {
            for (name, _) in BUILTINS {
                let p = resolve_program(name).expect("builtins resolve");
                println!("{name:16} {:>4} bits  {}", p.length_bits(), p.to_asm());
            }
            println!("{:16} NOP x (N-1); HALT", "delay:N");
            Ok(true)
        }
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
