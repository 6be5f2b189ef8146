//! Certificates: a claimed program `p`, a claimed bound `t` and a rewrite
//! derivation from `p*` to `p`.
//!
//! Serialization: `code(p) ‖ code(t) ‖ gamma(k + 1) ‖ step_1 … step_k`. The
//! candidate must be consumed exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::analysis::{cost_bound_with_work, NotCertifiable};
use super::costpoly::CostPoly;
use super::rewrite::{apply_rewrite_counted, RewriteError, RewriteStep, StepDecodeError};
use crate::codec::{length_lex, BitReader, Bits};
use crate::vm::{Program, ProgramError};

/// Checker work units granted per squared certificate bit. The checker
/// gives up (rejects) once its work would exceed `KAPPA * max(l, 1)^2`, so
/// every candidate is settled within that many units.
pub const KAPPA: u64 = 1;

/// Work budget for a candidate of `len_bits` bits.
pub fn work_limit(len_bits: usize) -> u64 {
    let l = len_bits.max(1) as u64;
    KAPPA.saturating_mul(l.saturating_mul(l))
}

/// The `i`-th candidate proof: all bitstrings in length-lexicographic order.
pub fn enumerate_candidate(i: u64) -> Bits {
    length_lex(i)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: Program,
    pub t: CostPoly,
    pub derivation: Vec<RewriteStep>,
}

impl Certificate {
    pub fn new(p: Program, t: CostPoly, derivation: Vec<RewriteStep>) -> Self {
        Certificate { p, t, derivation }
    }

    /// `p*` itself with its own computed bound and an empty derivation.
    pub fn reflexive(pstar: &Program) -> Result<Certificate, NotCertifiable> {
        let t = cost_bound_with_work(pstar).0?;
        Ok(Certificate::new(pstar.clone(), t, Vec::new()))
    }

    pub fn encode(&self) -> Bits {
        let mut b = self.p.encoding().clone();
        self.t.encode_into(&mut b);
        b.push_gamma0(self.derivation.len() as u64);
        for s in &self.derivation {
            s.encode_into(&mut b);
        }
        b
    }

    /// `l(proof)`.
    pub fn total_len_bits(&self) -> usize {
        self.encode().len()
    }

    /// Parses a serialized certificate; syntax only, no semantic checks.
    pub fn parse(bits: &Bits) -> Result<Certificate, Rejection> {
        let (p, used) = Program::decode_prefix(bits.as_slice()).map_err(Rejection::Program)?;
        let mut rd = BitReader::from_slice(&bits.as_slice()[used..]);
        let t = CostPoly::decode_from(&mut rd)
            .map_err(|e| Rejection::Syntax(e.to_string()))?
            .ok_or_else(|| Rejection::Syntax("non-canonical bound".into()))?;
        let k = rd
            .read_gamma0()
            .map_err(|e| Rejection::Syntax(e.to_string()))?;
        // Each step takes at least five bits.
        if k > (rd.remaining() / 5) as u64 {
            return Err(Rejection::Syntax("derivation longer than input".into()));
        }
        let derivation = (0..k)
            .map(|_| RewriteStep::decode_from(&mut rd))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| match e {
                StepDecodeError::UnknownRule(id) => Rejection::UnknownRule(id),
                StepDecodeError::Read(e) => Rejection::Syntax(e.to_string()),
            })?;
        if rd.remaining() != 0 {
            return Err(Rejection::TrailingBits(rd.remaining()));
        }
        Ok(Certificate { p, t, derivation })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    #[error("program field: {0}")]
    Program(#[serde(with = "as_string")] ProgramError),
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("rule id {0} outside the catalog")]
    UnknownRule(u8),
    #[error("{0} trailing bits")]
    TrailingBits(usize),
    #[error("step {index}: {error}")]
    Rewrite {
        index: usize,
        #[serde(with = "as_string")]
        error: RewriteError,
    },
    #[error("derivation does not end at the claimed program")]
    WrongTarget,
    #[error("claimed program is not certifiable: {0}")]
    NotCertifiable(#[serde(with = "as_string")] NotCertifiable),
    #[error("claimed bound does not dominate the computed one")]
    NotDominated,
    #[error("checker work limit exceeded")]
    WorkLimit,
}

mod as_string {
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D: Deserializer<'de>>(_: D) -> Result<T, D::Error> {
        Err(serde::de::Error::custom("rejections are write-only"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accepted { p: Program, t: CostPoly },
    Invalid(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// Work units spent: bits parsed, instructions written by rewrites,
    /// abstract instruction visits and coefficient comparisons.
    pub work: u64,
    pub len_bits: usize,
}

struct Meter {
    used: u64,
    limit: u64,
}

impl Meter {
    fn charge(&mut self, units: u64) -> Result<(), Rejection> {
        self.used = self.used.saturating_add(units);
        if self.used > self.limit {
            Err(Rejection::WorkLimit)
        } else {
            Ok(())
        }
    }
}

/// Checks a candidate against `pstar`. Accepts iff the candidate parses,
/// its derivation rewrites `pstar` into the claimed program, the program
/// is jump-free with a computable bound, and the claimed bound dominates it.
pub fn check_certificate(bits: &Bits, pstar: &Program) -> CheckReport {
    let mut meter = Meter {
        used: 0,
        limit: work_limit(bits.len()),
    };
    let verdict = match check_inner(bits, pstar, &mut meter) {
        Ok((p, t)) => Verdict::Accepted { p, t },
        Err(r) => Verdict::Invalid(r),
    };
    CheckReport {
        verdict,
        work: meter.used.min(meter.limit),
        len_bits: bits.len(),
    }
}

fn check_inner(
    bits: &Bits,
    pstar: &Program,
    meter: &mut Meter,
) -> Result<(Program, CostPoly), Rejection> {
    let cert = Certificate::parse(bits);
    meter.charge(bits.len() as u64)?;
    let cert = cert?;
    let mut cur = pstar.clone();
    meter.charge(cur.len() as u64)?;
    for (index, step) in cert.derivation.iter().enumerate() {
        let (next, written) = apply_rewrite_counted(&cur, step)
            .map_err(|error| Rejection::Rewrite { index, error })?;
        meter.charge(written.max(1))?;
        cur = next;
    }
    meter.charge(cur.len() as u64)?;
    if cur != cert.p {
        return Err(Rejection::WrongTarget);
    }
    let (bound, work) = cost_bound_with_work(&cert.p);
    meter.charge(work)?;
    let bound = bound.map_err(Rejection::NotCertifiable)?;
    meter.charge(cert.t.coeffs().len().max(bound.coeffs().len()) as u64)?;
    if !cert.t.dominates(&bound) {
        return Err(Rejection::NotDominated);
    }
    Ok((cert.p, cert.t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proofsys::rewrite::Rule;

    fn prog(s: &str) -> Program {
        Program::parse_asm(s).unwrap()
    }

    #[test]
    fn reflexive_certificate_is_accepted() {
        let pstar = prog("LOOPSTART R0; READ R1; WRITE R1; LOOPEND; HALT");
        let c = Certificate::reflexive(&pstar).unwrap();
        let r = check_certificate(&c.encode(), &pstar);
        assert_eq!(
            r.verdict,
            Verdict::Accepted {
                p: pstar.clone(),
                t: CostPoly::new(vec![2, 4])
            }
        );
        assert!(r.work <= work_limit(r.len_bits));
    }

    #[test]
    fn nop_elimination_certificate() {
        let pstar = prog("NOP; WRITE R0; HALT");
        let p = prog("WRITE R0; HALT");
        let c = Certificate::new(
            p.clone(),
            CostPoly::constant(2),
            vec![RewriteStep::new(Rule::NopDelete, 0)],
        );
        let bits = c.encode();
        assert_eq!(Certificate::parse(&bits).unwrap(), c);
        assert!(check_certificate(&bits, &pstar).verdict.is_accepted());
        // A bound that is too small is refused.
        let weak = Certificate::new(p, CostPoly::constant(1), c.derivation.clone());
        assert_eq!(
            check_certificate(&weak.encode(), &pstar).verdict,
            Verdict::Invalid(Rejection::NotDominated)
        );
    }

    #[test]
    fn busy_loop_collapses_to_halt_in_33_bits() {
        let pstar = prog("LOOPSTART R0; LOOPSTART R0; NOP; LOOPEND; LOOPEND; HALT");
        let c = Certificate::new(
            prog("HALT"),
            CostPoly::constant(1),
            vec![
                RewriteStep::new(Rule::NopDelete, 2),
                RewriteStep::new(Rule::DeleteEmptyLoop, 1),
                RewriteStep::new(Rule::DeleteEmptyLoop, 0),
            ],
        );
        assert_eq!(c.total_len_bits(), 33);
        assert!(check_certificate(&c.encode(), &pstar).verdict.is_accepted());
    }

    #[test]
    fn garbage_and_bad_rules_are_invalid() {
        let pstar = prog("HALT");
        let empty = enumerate_candidate(0);
        assert!(empty.is_empty());
        assert!(!check_certificate(&empty, &pstar).verdict.is_accepted());
        let mut b = prog("HALT").encoding().clone();
        CostPoly::constant(1).encode_into(&mut b);
        b.push_gamma0(1);
        b.push_uint(15, 4);
        b.push_gamma0(0);
        assert_eq!(
            check_certificate(&b, &pstar).verdict,
            Verdict::Invalid(Rejection::UnknownRule(15))
        );
        assert_eq!(work_limit(0), 1);
    }

    #[test]
    fn enumerator_reproduces_certificates_at_their_index() {
        let pstar = prog("NOP; HALT");
        let c = Certificate::new(
            prog("HALT"),
            CostPoly::constant(1),
            vec![RewriteStep::new(Rule::NopDelete, 0)],
        );
        let bits = c.encode();
        let i = crate::codec::length_lex_index(&bits).unwrap();
        assert_eq!(enumerate_candidate(i), bits);
        assert!(check_certificate(&enumerate_candidate(i), &pstar)
            .verdict
            .is_accepted());
    }
}
