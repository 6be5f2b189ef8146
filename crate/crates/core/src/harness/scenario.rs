//! Scenario files: TOML documents naming `p*`, its inputs, the proof source
//! and scheduling options, plus optional reference, inversion and K″
//! sections. Loading validates everything and normalizes programs and
//! certificates to canonical lowercase `<bitlen>:<hex>` form.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::builtins::resolve_program;
use crate::codec::{Bits, ShareMode};
use crate::levin::{InversionProblem, LevinConfig};
use crate::mstar::{Case, MConfig, ProofSource, Reference, SchedulerMode, ScriptedEntry};
use crate::proofsys::{check_certificate, Certificate, CostPoly, RewriteStep, Rule, Verdict};
use crate::vm::{Program, ReadMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid scenario: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    ScenarioInvalid(Vec<Diagnostic>),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    #[default]
    Accept,
    Reject,
}

/// A certificate, either serialized or spelled out as program, bound and
/// derivation steps (`rule@pos` or `rule@pos:reg`).
#[derive(Debug, Clone, Default, Deserialize)]
pub struct CertFile {
    pub certificate: Option<String>,
    pub program: Option<String>,
    pub bound: Option<Vec<u64>>,
    pub derivation: Option<Vec<String>>,
}

// `deny_unknown_fields` does not combine with `flatten`.
#[derive(Debug, Clone, Deserialize)]
pub struct EntryFile {
    pub index: u64,
    #[serde(default)]
    pub expect: Expect,
    #[serde(flatten)]
    pub cert: CertFile,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofSourceFile {
    pub kind: String,
    #[serde(default)]
    pub entries: Vec<EntryFile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Ones,
    Zeros,
    Alternating,
    Seeded,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsFile {
    #[serde(default)]
    pub explicit: Vec<String>,
    pub pattern: Option<Pattern>,
    #[serde(default)]
    pub sizes: Vec<u64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceFile {
    pub p: String,
    pub t: Vec<u64>,
    pub proof_len: Option<u64>,
    pub expect_case: Option<Case>,
    /// Required when the proof source enumerates rather than scripts.
    pub certificate: Option<String>,
    pub derivation: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevinFile {
    pub g: String,
    pub x: String,
    pub verify_budget: Option<u64>,
    pub global_budget: Option<u64>,
    pub max_len: Option<usize>,
    pub planted: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KppFile {
    pub effort: Option<u64>,
    pub max_deriv: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub description: Option<String>,
    pub pstar: Option<String>,
    #[serde(default)]
    pub inputs: InputsFile,
    pub proof_source: Option<ProofSourceFile>,
    pub scheduler: Option<SchedulerMode>,
    pub share_mode: Option<ShareMode>,
    pub read_mode: Option<ReadMode>,
    pub persistent_a: Option<bool>,
    pub global_budget: Option<u64>,
    pub reference: Option<ReferenceFile>,
    pub levin: Option<LevinFile>,
    pub kpp: Option<KppFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioReference {
    pub reference: Reference,
    pub expect_case: Option<Case>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevinSpec {
    pub problem: InversionProblem,
    pub config: LevinConfig,
    pub planted: Option<Program>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KppSpec {
    pub effort: u64,
    pub max_deriv: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub pstar: Option<Program>,
    pub inputs: Vec<Bits>,
    pub config: MConfig,
    /// Scripted entries expected to be rejected (adversarial candidates).
    pub expected_rejections: Vec<u64>,
    pub persistent_a: bool,
    pub reference: Option<ScenarioReference>,
    pub levin: Option<LevinSpec>,
    pub kpp: Option<KppSpec>,
}

pub const DEFAULT_GLOBAL_BUDGET: u64 = 100_000_000;
pub const DEFAULT_VERIFY_BUDGET: u64 = 1_000;
pub const DEFAULT_KPP_EFFORT: u64 = 1 << 20;

struct Diags(Vec<Diagnostic>);

impl Diags {
    fn push(&mut self, field: impl Into<String>, message: impl fmt::Display) {
        self.0.push(Diagnostic {
            field: field.into(),
            message: message.to_string(),
        });
    }

    fn program(&mut self, field: &str, spec: &str) -> Option<Program> {
        resolve_program(spec).map_err(|e| self.push(field, e)).ok()
    }
}

pub fn parse_step(s: &str) -> Result<RewriteStep, String> {
    let (rule, rest) = s
        .trim()
        .split_once('@')
        .ok_or_else(|| format!("step `{s}` is not rule@pos"))?;
    let rule: Rule = serde_json::from_value(serde_json::Value::String(rule.trim().into()))
        .map_err(|_| format!("unknown rule `{rule}`"))?;
    let (pos, reg) = match rest.split_once(':') {
        Some((p, r)) => (p, Some(r)),
        None => (rest, None),
    };
    let pos: u64 = pos
        .trim()
        .parse()
        .map_err(|_| format!("bad position in `{s}`"))?;
    let params = match reg {
        Some(r) => vec![r
            .trim()
            .trim_start_matches(['R', 'r'])
            .parse::<u8>()
            .map_err(|_| format!("bad register in `{s}`"))?],
        None => Vec::new(),
    };
    Ok(RewriteStep { rule, pos, params })
}

/// The serialized form of a certificate description.
fn cert_bits(d: &mut Diags, field: &str, c: &CertFile) -> Option<Bits> {
    if let Some(hex) = &c.certificate {
        if c.program.is_some() || c.bound.is_some() || c.derivation.is_some() {
            d.push(
                field,
                "give either `certificate` or program/bound/derivation",
            );
            return None;
        }
        return Bits::from_hex(&hex.to_lowercase())
            .map_err(|e| d.push(field, e))
            .ok();
    }
    let (Some(p), Some(t)) = (&c.program, &c.bound) else {
        d.push(field, "needs `certificate` or both `program` and `bound`");
        return None;
    };
    let p = d.program(&format!("{field}.program"), p)?;
    let steps = c
        .derivation
        .iter()
        .flatten()
        .map(|s| parse_step(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| d.push(format!("{field}.derivation"), e))
        .ok()?;
    Some(Certificate::new(p, CostPoly::new(t.clone()), steps).encode())
}

fn gen_inputs(d: &mut Diags, f: &InputsFile) -> Vec<Bits> {
    let mut out = Vec::new();
    for (i, s) in f.explicit.iter().enumerate() {
        match Bits::parse(s) {
            Ok(b) => out.push(b),
            Err(e) => d.push(format!("inputs.explicit[{i}]"), e),
        }
    }
    match (f.pattern, f.sizes.is_empty()) {
        (Some(pat), false) => {
            for &n in &f.sizes {
                let mut rng = ChaCha8Rng::seed_from_u64(f.seed ^ n);
                let bits = (0..n)
                    .map(|i| match pat {
                        Pattern::Ones => true,
                        Pattern::Zeros => false,
                        Pattern::Alternating => i % 2 == 0,
                        Pattern::Seeded => rng.gen(),
                    })
                    .collect();
                out.push(Bits::from_bools(bits));
            }
        }
        (None, false) => d.push("inputs.sizes", "sizes given without a pattern"),
        (Some(_), true) => d.push("inputs.pattern", "pattern given without sizes"),
        (None, true) => {}
    }
    out
}

pub fn parse_scenario(text: &str, default_name: &str) -> Result<Scenario, ScenarioError> {
    let f: ScenarioFile = toml::from_str(text)?;
    validate(f, default_name)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse_scenario(&text, &stem)
}

fn validate(f: ScenarioFile, default_name: &str) -> Result<Scenario, ScenarioError> {
    let mut d = Diags(Vec::new());
    let pstar = f.pstar.as_deref().and_then(|s| d.program("pstar", s));
    let inputs = gen_inputs(&mut d, &f.inputs);
    if f.pstar.is_some() && inputs.is_empty() {
        d.push("inputs", "at least one input is required");
    }
    if f.pstar.is_none() && f.levin.is_none() {
        d.push(
            "pstar",
            "required unless the scenario only has a [levin] section",
        );
    }

    // Proof source; accepted scripted entries double as reference witnesses.
    let mut accepted: Vec<(Program, CostPoly, u64)> = Vec::new();
    let mut expected_rejections = Vec::new();
    let source_kind = f
        .proof_source
        .as_ref()
        .map_or("enumerate", |s| s.kind.as_str())
        .to_string();
    let proof_source = match (source_kind.as_str(), &f.proof_source) {
        ("empty", Some(s)) | ("enumerate", Some(s)) if !s.entries.is_empty() => {
            d.push(
                "proof_source.entries",
                "entries are only allowed for kind = \"scripted\"",
            );
            ProofSource::Empty
        }
        ("empty", _) => ProofSource::Empty,
        ("enumerate", _) => ProofSource::Enumerate,
        ("scripted", Some(s)) => {
            let mut entries = Vec::new();
            for (i, e) in s.entries.iter().enumerate() {
                let field = format!("proof_source.entries[{i}]");
                if entries.iter().any(|x: &ScriptedEntry| x.index == e.index) {
                    d.push(&field, format!("duplicate index {}", e.index));
                }
                let Some(bits) = cert_bits(&mut d, &field, &e.cert) else {
                    continue;
                };
                if let Some(p) = &pstar {
                    let verdict = check_certificate(&bits, p).verdict;
                    match (e.expect, verdict) {
                        (Expect::Accept, Verdict::Accepted { p, t }) => {
                            accepted.push((p, t, bits.len() as u64))
                        }
                        (Expect::Accept, Verdict::Invalid(r)) => {
                            d.push(&field, format!("certificate rejected by the checker: {r}"))
                        }
                        (Expect::Reject, Verdict::Accepted { .. }) => d.push(
                            &field,
                            "marked expect = \"reject\" but the checker accepts it",
                        ),
                        (Expect::Reject, Verdict::Invalid(_)) => expected_rejections.push(e.index),
                    }
                }
                entries.push(ScriptedEntry {
                    index: e.index,
                    bits,
                });
            }
            entries.sort_by_key(|e| e.index);
            ProofSource::Scripted(entries)
        }
        (k, _) => {
            d.push(
                "proof_source.kind",
                format!("unknown kind `{k}` (empty | enumerate | scripted)"),
            );
            ProofSource::Empty
        }
    };

    let reference = f.reference.as_ref().and_then(|r| {
        let p = d.program("reference.p", &r.p)?;
        let t = CostPoly::new(r.t.clone());
        if t.coeffs() != r.t.as_slice() {
            d.push(
                "reference.t",
                "coefficients must be canonical (no trailing zeros)",
            );
        }
        let witness_len = match &proof_source {
            ProofSource::Scripted(_) => accepted
                .iter()
                .find(|(ap, at, _)| *ap == p && *at == t)
                .map(|a| a.2),
            ProofSource::Enumerate => {
                let c = CertFile {
                    certificate: r.certificate.clone(),
                    program: r.certificate.is_none().then(|| r.p.clone()),
                    bound: r.certificate.is_none().then(|| r.t.clone()),
                    derivation: r.derivation.clone(),
                };
                let bits = cert_bits(&mut d, "reference", &c)?;
                match pstar
                    .as_ref()
                    .map(|ps| check_certificate(&bits, ps).verdict)
                {
                    Some(Verdict::Accepted { p: cp, t: ct }) if cp == p && ct == t => {
                        Some(bits.len() as u64)
                    }
                    _ => None,
                }
            }
            ProofSource::Empty => None,
        };
        let Some(len) = witness_len else {
            d.push(
                "reference",
                "reference (p', t') does not appear in the proof source",
            );
            return None;
        };
        if let Some(pl) = r.proof_len {
            if pl != len {
                d.push(
                    "reference.proof_len",
                    format!("declared {pl}, but the certificate is {len} bits"),
                );
            }
        }
        Some(ScenarioReference {
            reference: Reference {
                p,
                t,
                proof_len: len,
            },
            expect_case: r.expect_case,
        })
    });

    let scheduler = f.scheduler.unwrap_or_default();
    let persistent_a = f.persistent_a.unwrap_or(false);
    if persistent_a && scheduler == SchedulerMode::Cycles {
        d.push(
            "persistent_a",
            "persistent process A is only defined for round scheduling",
        );
    }
    let read_mode = f.read_mode.unwrap_or_default();

    let levin = f.levin.as_ref().and_then(|l| {
        let g = d.program("levin.g", &l.g)?;
        let x = Bits::parse(&l.x).map_err(|e| d.push("levin.x", e)).ok()?;
        let planted = match &l.planted {
            Some(s) => Some(d.program("levin.planted", s)?),
            None => None,
        };
        let defaults = LevinConfig::default();
        Some(LevinSpec {
            problem: InversionProblem {
                g,
                x,
                verify_budget: l.verify_budget.unwrap_or(DEFAULT_VERIFY_BUDGET),
            },
            config: LevinConfig {
                global_budget: l.global_budget.unwrap_or(defaults.global_budget),
                read_mode,
                max_len: l.max_len.unwrap_or(defaults.max_len),
            },
            planted,
        })
    });

    let kpp = f.kpp.as_ref().map(|k| KppSpec {
        effort: k.effort.unwrap_or(DEFAULT_KPP_EFFORT),
        max_deriv: k.max_deriv.unwrap_or(2),
    });
    if kpp.is_some() && pstar.is_none() {
        d.push("kpp", "needs `pstar`");
    }

    if !d.0.is_empty() {
        return Err(ScenarioError::ScenarioInvalid(d.0));
    }
    Ok(Scenario {
        name: f.name.unwrap_or_else(|| default_name.to_string()),
        description: f.description.unwrap_or_default(),
        pstar,
        inputs,
        config: MConfig {
            scheduler,
            share_mode: f.share_mode.unwrap_or_default(),
            read_mode,
            proof_source,
            global_budget: f.global_budget.unwrap_or(DEFAULT_GLOBAL_BUDGET),
        },
        expected_rejections,
        persistent_a,
        reference,
        levin,
        kpp,
    })
}
