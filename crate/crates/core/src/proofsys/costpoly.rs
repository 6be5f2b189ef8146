//! Polynomial step bounds in the input length `n`.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::codec::{BitReader, Bits, ReadError};
use crate::vm::{Instruction, Program};

/// `c_0 + c_1 n + ... + c_d n^d`, stored without trailing zero coefficients
/// (the zero polynomial is `[0]`).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct CostPoly {
    coeffs: Vec<u64>,
}

impl TryFrom<Vec<u64>> for CostPoly {
    type Error = &'static str;

    fn try_from(v: Vec<u64>) -> Result<Self, Self::Error> {
        if v.is_empty() {
            return Err("a cost polynomial needs at least one coefficient");
        }
        Ok(CostPoly::new(v))
    }
}

impl From<CostPoly> for Vec<u64> {
    fn from(p: CostPoly) -> Self {
        p.coeffs
    }
}

impl CostPoly {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        CostPoly { coeffs }
    }

    pub fn constant(c: u64) -> Self {
        CostPoly { coeffs: vec![c] }
    }

    /// The polynomial `n`.
    pub fn n() -> Self {
        CostPoly { coeffs: vec![0, 1] }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn eval(&self, n: u64) -> BigUint {
        let n = BigUint::from(n);
        self.coeffs
            .iter()
            .rev()
            .fold(BigUint::from(0u8), |acc, &c| acc * &n + c)
    }

    /// Coefficient-wise `self >= other`.
    pub fn dominates(&self, other: &CostPoly) -> bool {
        (0..self.coeffs.len().max(other.coeffs.len())).all(|i| self.coeff(i) >= other.coeff(i))
    }

    pub fn checked_add(&self, o: &CostPoly) -> Option<CostPoly> {
        let len = self.coeffs.len().max(o.coeffs.len());
        (0..len)
            .map(|i| self.coeff(i).checked_add(o.coeff(i)))
            .collect::<Option<Vec<_>>>()
            .map(CostPoly::new)
    }

    pub fn checked_mul(&self, o: &CostPoly) -> Option<CostPoly> {
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].checked_add(a.checked_mul(b)?)?;
            }
        }
        Some(CostPoly::new(out))
    }

    /// Coefficient-wise maximum, an upper bound of both.
    pub fn join(&self, o: &CostPoly) -> CostPoly {
        let len = self.coeffs.len().max(o.coeffs.len());
        CostPoly::new((0..len).map(|i| self.coeff(i).max(o.coeff(i))).collect())
    }

    /// Compact self-delimiting code: gamma(d + 1), then gamma(c_i + 1) for
    /// `i = 0..=d`. Its length is `l(t)`.
    pub fn encode(&self) -> Bits {
        let mut b = Bits::new();
        self.encode_into(&mut b);
        b
    }

    pub fn encode_into(&self, b: &mut Bits) {
        b.push_gamma(self.coeffs.len() as u128);
        for &c in &self.coeffs {
            b.push_gamma0(c);
        }
    }

    pub fn bit_len(&self) -> usize {
        self.encode().len()
    }

    /// Reads a code written by [`CostPoly::encode_into`]. Codes with a
    /// trailing zero coefficient are not canonical and are rejected, so
    /// every polynomial has exactly one code.
    pub fn decode_from(rd: &mut BitReader<'_>) -> Result<Option<CostPoly>, ReadError> {
        let len = rd.read_gamma()?;
        if len > rd.remaining() as u64 {
            return Err(ReadError::Eof);
        }
        let mut coeffs = Vec::with_capacity(len as usize);
        for _ in 0..len {
            coeffs.push(rd.read_gamma0()?);
        }
        if coeffs.len() > 1 && coeffs.last() == Some(&0) {
            return Ok(None);
        }
        Ok(Some(CostPoly { coeffs }))
    }

    /// Horner evaluator: leaves `t(R0)` in R1 and halts after `3d + 2`
    /// steps.
    pub fn evaluator_program(&self) -> Program {
        let d = self.degree();
        let mut ins = vec![Instruction::LoadI(1, self.coeffs[d])];
        for i in (0..d).rev() {
            ins.push(Instruction::Mul(1, 0));
            ins.push(Instruction::LoadI(2, self.coeffs[i]));
            ins.push(Instruction::Add(1, 2));
        }
        ins.push(Instruction::Halt);
        Program::new(ins).expect("evaluator is well formed")
    }

    /// Steps the evaluator takes on any input: `time_t(x)`.
    pub fn evaluator_steps(&self) -> u64 {
        3 * self.degree() as u64 + 2
    }
}

impl fmt::Display for CostPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("{c}n"),
                _ => format!("{c}n^{i}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

impl fmt::Debug for CostPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CostPoly{:?}", self.coeffs)
    }
}
