//! Upper approximation of K″(p*), the length of the shortest program
//! provably equivalent to `p*`, plus the constant-overhead wrapper that
//! turns any such program into a runner `M_{p'}`.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{length_lex_index, Bits};
use crate::mstar::{run_mstar, MConfig, MRun, MStarError, Reference};
use crate::proofsys::{
    apply_rewrite, check_certificate, cost_bound, enumerate_candidate, Certificate, RewriteStep,
    Rule, Verdict, CATALOG,
};
use crate::vm::{Program, NUM_REGS};

/// Modeled size of the runner around the inner program, in bits.
pub const DEFAULT_C_M: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KppEstimate {
    pub current_min_bits: u64,
    pub witness: Program,
    /// Serialized certificate for `witness`; `None` only when `p*` itself
    /// has no certifiable bound and nothing shorter has been found.
    pub witness_certificate: Option<Bits>,
    pub certificates_examined: u64,
}

/// Incremental enumerator; `kpp_estimate` is `new` followed by `advance`.
#[derive(Debug, Clone)]
pub struct KppSearch {
    pstar: Program,
    est: KppEstimate,
}

impl KppSearch {
    pub fn new(pstar: &Program) -> Self {
        let cert = Certificate::reflexive(pstar).ok().map(|c| c.encode());
        KppSearch {
            pstar: pstar.clone(),
            est: KppEstimate {
                current_min_bits: pstar.length_bits() as u64,
                witness: pstar.clone(),
                witness_certificate: cert,
                certificates_examined: 0,
            },
        }
    }

    pub fn estimate(&self) -> &KppEstimate {
        &self.est
    }

    /// Examines `n` more candidates; returns true if the minimum dropped.
    pub fn advance(&mut self, n: u64) -> bool {
        let mut improved = false;
        for _ in 0..n {
            let bits = enumerate_candidate(self.est.certificates_examined);
            self.est.certificates_examined += 1;
            if let Verdict::Accepted { p, .. } = check_certificate(&bits, &self.pstar).verdict {
                let l = p.length_bits() as u64;
                if l < self.est.current_min_bits {
                    self.est.current_min_bits = l;
                    self.est.witness = p;
                    self.est.witness_certificate = Some(bits);
                    improved = true;
                }
            }
        }
        improved
    }
}

pub fn kpp_estimate(pstar: &Program, effort: u64) -> KppEstimate {
    let mut s = KppSearch::new(pstar);
    s.advance(effort);
    s.est
}

/// `(effort, current_min_bits)` at effort 0, after every improvement and
/// at the final effort.
pub fn kpp_trajectory(pstar: &Program, effort: u64) -> (KppEstimate, Vec<(u64, u64)>) {
    let mut s = KppSearch::new(pstar);
    let mut points = vec![(0, s.est.current_min_bits)];
    for _ in 0..effort {
        if s.advance(1) {
            points.push((s.est.certificates_examined, s.est.current_min_bits));
        }
    }
    if points.last().map(|p| p.0) != Some(effort) {
        points.push((effort, s.est.current_min_bits));
    }
    (s.est, points)
}

pub fn trajectory_csv(points: &[(u64, u64)]) -> String {
    let mut s = String::from("effort,current_min_bits\n");
    for (e, b) in points {
        s.push_str(&format!("{e},{b}\n"));
    }
    s
}

/// Every single catalog step applicable to `p`, in (rule, pos, param) order.
pub fn rewrite_successors(p: &Program) -> Vec<(RewriteStep, Program)> {
    let mut out = Vec::new();
    for rule in CATALOG {
        for pos in 0..=p.len() as u64 {
            let steps: Vec<RewriteStep> = if rule == Rule::NopToMovSelf {
                (0..NUM_REGS)
                    .map(|r| RewriteStep::with_reg(rule, pos, r))
                    .collect()
            } else {
                vec![RewriteStep::new(rule, pos)]
            };
            for step in steps {
                if let Ok(q) = apply_rewrite(p, &step) {
                    out.push((step, q));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteWitness {
    pub program: Program,
    pub derivation: Vec<RewriteStep>,
    /// Certificate with the exact computed bound; `None` if `program` is
    /// `p*` and `p*` is not certifiable.
    pub certificate: Option<Bits>,
}

impl BruteWitness {
    pub fn len_bits(&self) -> u64 {
        self.program.length_bits() as u64
    }

    /// Length-lex index of the certificate in the enumeration.
    pub fn certificate_index(&self) -> Option<u64> {
        self.certificate.as_ref().and_then(length_lex_index)
    }
}

/// Breadth-first search over the rewrite graph to depth `max_deriv`; the
/// shortest certifiable program reached, first in BFS order on ties.
pub fn brute_kpp_witness(pstar: &Program, max_deriv: usize) -> BruteWitness {
    let mut best = BruteWitness {
        program: pstar.clone(),
        derivation: Vec::new(),
        certificate: Certificate::reflexive(pstar).ok().map(|c| c.encode()),
    };
    let mut seen = HashSet::from([pstar.clone()]);
    let mut queue = VecDeque::from([(pstar.clone(), Vec::<RewriteStep>::new())]);
    while let Some((p, path)) = queue.pop_front() {
        if path.len() >= max_deriv {
            continue;
        }
        for (step, q) in rewrite_successors(&p) {
            if !seen.insert(q.clone()) {
                continue;
            }
            let mut qpath = path.clone();
            qpath.push(step);
            if q.length_bits() < best.program.length_bits() {
                if let Ok(t) = cost_bound(&q) {
                    let cert = Certificate::new(q.clone(), t, qpath.clone()).encode();
                    best = BruteWitness {
                        program: q.clone(),
                        derivation: qpath.clone(),
                        certificate: Some(cert),
                    };
                }
            }
            queue.push_back((q, qpath));
        }
    }
    best
}

pub fn brute_kpp(pstar: &Program, max_deriv: usize) -> u64 {
    brute_kpp_witness(pstar, max_deriv).len_bits()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WrapError {
    #[error("certificate does not establish p' as provably equivalent to p*: {0}")]
    NotEquivalent(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WrapConfig {
    pub pstar: Program,
    /// Certificate rewriting `pstar` into the program being wrapped.
    pub certificate: Bits,
    pub c_m: u64,
}

/// `p~ = M_{p'}`: the runner specialised to `p'`, with its size modeled as
/// `l(p') + c_M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MWrapped {
    pub inner: Program,
    pub modeled_length_bits: u64,
    pub c_m: u64,
}

impl MWrapped {
    pub fn run(&self, x: &Bits, cfg: &MConfig) -> Result<MRun, MStarError> {
        run_mstar(&self.inner, x, cfg)
    }

    /// The inner program's own reflexive reference, for bound checks on the
    /// wrapped runner's traces.
    pub fn inner_reference(&self) -> Option<(Reference, Certificate)> {
        let cert = Certificate::reflexive(&self.inner).ok()?;
        Some((
            Reference {
                p: self.inner.clone(),
                t: cert.t.clone(),
                proof_len: cert.total_len_bits() as u64,
            },
            cert,
        ))
    }
}

pub fn build_mwrap(pprime: &Program, cfg: &WrapConfig) -> Result<MWrapped, WrapError> {
    match check_certificate(&cfg.certificate, &cfg.pstar).verdict {
        Verdict::Accepted { p, .. } if p == *pprime => Ok(MWrapped {
            inner: pprime.clone(),
            modeled_length_bits: pprime.length_bits() as u64 + cfg.c_m,
            c_m: cfg.c_m,
        }),
        Verdict::Accepted { .. } => Err(WrapError::NotEquivalent(
            "certificate proves a different program".into(),
        )),
        Verdict::Invalid(r) => Err(WrapError::NotEquivalent(r.to_string())),
    }
}
