//! Instruction set and the self-delimiting program code.
//!
//! Bit layout (most significant bit first):
//!
//! | field        | code                          |
//! |--------------|-------------------------------|
//! | program      | gamma(count >= 1), then `count` instructions |
//! | opcode       | 4 bits, values 0..=12         |
//! | register     | 3 bits                        |
//! | immediate    | gamma(v + 1)                  |
//! | jump target  | gamma(index + 1), absolute    |
//!
//! | op | mnemonic  | operands  |
//! |----|-----------|-----------|
//! | 0  | HALT      |           |
//! | 1  | NOP       |           |
//! | 2  | LOADI     | r, imm    |
//! | 3  | MOV       | r, r      |
//! | 4  | ADD       | r, r      |
//! | 5  | SUB       | r, r      |
//! | 6  | MUL       | r, r      |
//! | 7  | JZ        | r, target |
//! | 8  | JMP       | target    |
//! | 9  | READ      | r         |
//! | 10 | WRITE     | r         |
//! | 11 | LOOPSTART | r         |
//! | 12 | LOOPEND   |           |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::codec::bits::gamma0_len;
use crate::codec::{BitReader, Bits, ReadError};

pub const NUM_REGS: u8 = 8;
/// Register set by a lenient READ past the end of input.
pub const EOF_REG: u8 = 7;
/// Largest immediate or jump target the code can carry.
pub const MAX_IMMEDIATE: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Instruction {
    Halt,
    Nop,
    LoadI(u8, u64),
    Mov(u8, u8),
    Add(u8, u8),
    Sub(u8, u8),
    Mul(u8, u8),
    Jz(u8, u64),
    Jmp(u64),
    Read(u8),
    Write(u8),
    LoopStart(u8),
    LoopEnd,
}

impl Instruction {
    pub fn opcode(&self) -> u8 {
        use Instruction::*;
        match self {
            Halt => 0,
            Nop => 1,
            LoadI(..) => 2,
            Mov(..) => 3,
            Add(..) => 4,
            Sub(..) => 5,
            Mul(..) => 6,
            Jz(..) => 7,
            Jmp(_) => 8,
            Read(_) => 9,
            Write(_) => 10,
            LoopStart(_) => 11,
            LoopEnd => 12,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        MNEMONICS[self.opcode() as usize]
    }

    /// Register operands, in operand order.
    pub fn registers(&self) -> Vec<u8> {
        use Instruction::*;
        match *self {
            Halt | Nop | Jmp(_) | LoopEnd => vec![],
            LoadI(r, _) | Jz(r, _) | Read(r) | Write(r) | LoopStart(r) => vec![r],
            Mov(a, b) | Add(a, b) | Sub(a, b) | Mul(a, b) => vec![a, b],
        }
    }

    /// `(registers, naturals)` operand counts.
    pub fn arity(&self) -> (usize, usize) {
        ARITY[self.opcode() as usize]
    }

    pub fn is_jump(&self) -> bool {
        matches!(self, Instruction::Jz(..) | Instruction::Jmp(_))
    }

    /// Encoded width in bits.
    pub fn bit_len(&self) -> usize {
        use Instruction::*;
        4 + match *self {
            Halt | Nop | LoopEnd => 0,
            LoadI(_, v) | Jz(_, v) => 3 + gamma0_len(v),
            Jmp(v) => gamma0_len(v),
            Mov(..) | Add(..) | Sub(..) | Mul(..) => 6,
            Read(_) | Write(_) | LoopStart(_) => 3,
        }
    }

    fn check(&self) -> Result<(), ProgramError> {
        for r in self.registers() {
            if r >= NUM_REGS {
                return Err(ProgramError::BadRegister(r));
            }
        }
        match *self {
            Instruction::LoadI(_, v) | Instruction::Jz(_, v) | Instruction::Jmp(v)
                if v > MAX_IMMEDIATE =>
            {
                Err(ProgramError::ImmediateTooLarge(v))
            }
            _ => Ok(()),
        }
    }

    pub fn encode_into(&self, out: &mut Bits) {
        use Instruction::*;
        out.push_uint(self.opcode() as u128, 4);
        match *self {
            Halt | Nop | LoopEnd => {}
            LoadI(r, v) | Jz(r, v) => {
                out.push_uint(r as u128, 3);
                out.push_gamma0(v);
            }
            Jmp(v) => out.push_gamma0(v),
            Mov(a, b) | Add(a, b) | Sub(a, b) | Mul(a, b) => {
                out.push_uint(a as u128, 3);
                out.push_uint(b as u128, 3);
            }
            Read(r) | Write(r) | LoopStart(r) => out.push_uint(r as u128, 3),
        }
    }

    pub fn decode_from(rd: &mut BitReader<'_>) -> Result<Instruction, ProgramError> {
        use Instruction::*;
        let at = rd.position();
        let op = rd.read_uint(4).map_err(rerr)? as u8;
        let reg = |rd: &mut BitReader<'_>| rd.read_uint(3).map(|r| r as u8).map_err(rerr);
        let nat = |rd: &mut BitReader<'_>| rd.read_gamma0().map_err(rerr);
        Ok(match op {
            0 => Halt,
            1 => Nop,
            2 => {
                let r = reg(rd)?;
                LoadI(r, nat(rd)?)
            }
            3..=6 => {
                let a = reg(rd)?;
                let b = reg(rd)?;
                match op {
                    3 => Mov(a, b),
                    4 => Add(a, b),
                    5 => Sub(a, b),
                    _ => Mul(a, b),
                }
            }
            7 => {
                let r = reg(rd)?;
                Jz(r, nat(rd)?)
            }
            8 => Jmp(nat(rd)?),
            9 => Read(reg(rd)?),
            10 => Write(reg(rd)?),
            11 => LoopStart(reg(rd)?),
            12 => LoopEnd,
            _ => return Err(ProgramError::BadOpcode { at, opcode: op }),
        })
    }
}

fn rerr(e: ReadError) -> ProgramError {
    match e {
        ReadError::Eof => ProgramError::Truncated,
        ReadError::Overflow => ProgramError::ImmediateTooLarge(u64::MAX),
    }
}

const MNEMONICS: [&str; 13] = [
    "HALT",
    "NOP",
    "LOADI",
    "MOV",
    "ADD",
    "SUB",
    "MUL",
    "JZ",
    "JMP",
    "READ",
    "WRITE",
    "LOOPSTART",
    "LOOPEND",
];

const ARITY: [(usize, usize); 13] = [
    (0, 0),
    (0, 0),
    (1, 1),
    (2, 0),
    (2, 0),
    (2, 0),
    (2, 0),
    (1, 1),
    (0, 1),
    (1, 0),
    (1, 0),
    (1, 0),
    (0, 0),
];

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Instruction::*;
        let m = self.mnemonic();
        match *self {
            Halt | Nop | LoopEnd => f.write_str(m),
            LoadI(r, v) | Jz(r, v) => write!(f, "{m} R{r}, {v}"),
            Jmp(v) => write!(f, "{m} {v}"),
            Mov(a, b) | Add(a, b) | Sub(a, b) | Mul(a, b) => write!(f, "{m} R{a}, R{b}"),
            Read(r) | Write(r) | LoopStart(r) => write!(f, "{m} R{r}"),
        }
    }
}

impl FromStr for Instruction {
    type Err = ProgramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ProgramError::Syntax(s.trim().to_string());
        let s = s.trim();
        let (m, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let ops: Vec<&str> = rest
            .split(',')
            .map(str::trim)
            .filter(|o| !o.is_empty())
            .collect();
        let op = MNEMONICS
            .iter()
            .position(|n| n.eq_ignore_ascii_case(m))
            .ok_or_else(bad)?;
        let (nr, nn) = ARITY[op];
        if ops.len() != nr + nn {
            return Err(bad());
        }
        let mut regs = Vec::new();
        for o in &ops[..nr] {
            let r = o
                .strip_prefix(['R', 'r'])
                .and_then(|d| d.parse::<u8>().ok())
                .ok_or_else(bad)?;
            regs.push(r);
        }
        let nat = match ops.get(nr) {
            Some(o) => Some(o.parse::<u64>().map_err(|_| bad())?),
            None => None,
        };
        use Instruction::*;
        let ins = match op {
            0 => Halt,
            1 => Nop,
            2 => LoadI(regs[0], nat.unwrap()),
            3 => Mov(regs[0], regs[1]),
            4 => Add(regs[0], regs[1]),
            5 => Sub(regs[0], regs[1]),
            6 => Mul(regs[0], regs[1]),
            7 => Jz(regs[0], nat.unwrap()),
            8 => Jmp(nat.unwrap()),
            9 => Read(regs[0]),
            10 => Write(regs[0]),
            11 => LoopStart(regs[0]),
            _ => LoopEnd,
        };
        ins.check()?;
        Ok(ins)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("malformed program: bad opcode {opcode} at bit {at}")]
    BadOpcode { at: usize, opcode: u8 },
    #[error("malformed program: truncated encoding")]
    Truncated,
    #[error("malformed program: unbalanced LOOPSTART/LOOPEND")]
    UnbalancedLoops,
    #[error("malformed program: {trailing} trailing bits after a {consumed}-bit program")]
    TrailingBits { consumed: usize, trailing: usize },
    #[error("malformed program: no instructions")]
    Empty,
    #[error("register R{0} does not exist")]
    BadRegister(u8),
    #[error("immediate {0} is not encodable")]
    ImmediateTooLarge(u64),
    #[error("cannot parse instruction `{0}`")]
    Syntax(String),
    #[error("bad program hex: {0}")]
    Hex(String),
}

/// A decoded program together with its encoding.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Program {
    instructions: Vec<Instruction>,
    encoding: Bits,
    /// For each loop delimiter, the index of its partner.
    partner: Vec<u32>,
}

fn match_loops(ins: &[Instruction]) -> Result<Vec<u32>, ProgramError> {
    let mut partner = vec![0u32; ins.len()];
    let mut open = Vec::new();
    for (i, instr) in ins.iter().enumerate() {
        match instr {
            Instruction::LoopStart(_) => open.push(i),
            Instruction::LoopEnd => {
                let s = open.pop().ok_or(ProgramError::UnbalancedLoops)?;
                partner[s] = i as u32;
                partner[i] = s as u32;
            }
            _ => {}
        }
    }
    if open.is_empty() {
        Ok(partner)
    } else {
        Err(ProgramError::UnbalancedLoops)
    }
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Result<Program, ProgramError> {
        if instructions.is_empty() {
            return Err(ProgramError::Empty);
        }
        for i in &instructions {
            i.check()?;
        }
        let partner = match_loops(&instructions)?;
        let mut encoding = Bits::new();
        encoding.push_gamma(instructions.len() as u128);
        for i in &instructions {
            i.encode_into(&mut encoding);
        }
        Ok(Program {
            instructions,
            encoding,
            partner,
        })
    }

    /// Decodes a program from the front of `bits`, returning it with the
    /// number of bits consumed.
    pub fn decode_prefix(bits: &[bool]) -> Result<(Program, usize), ProgramError> {
        let mut rd = BitReader::from_slice(bits);
        let count = rd.read_gamma().map_err(rerr)?;
        // Every instruction takes at least four bits; reject before allocating.
        if count > (rd.remaining() / 4) as u64 {
            return Err(ProgramError::Truncated);
        }
        let mut instructions = Vec::with_capacity(count as usize);
        for _ in 0..count {
            instructions.push(Instruction::decode_from(&mut rd)?);
        }
        let consumed = rd.position();
        let partner = match_loops(&instructions)?;
        let encoding = Bits::from_bools(bits[..consumed].to_vec());
        Ok((
            Program {
                instructions,
                encoding,
                partner,
            },
            consumed,
        ))
    }

    /// Decodes a program that must span all of `bits`.
    pub fn decode(bits: &Bits) -> Result<Program, ProgramError> {
        let (p, consumed) = Program::decode_prefix(bits.as_slice())?;
        if consumed != bits.len() {
            return Err(ProgramError::TrailingBits {
                consumed,
                trailing: bits.len() - consumed,
            });
        }
        Ok(p)
    }

    pub fn from_hex(s: &str) -> Result<Program, ProgramError> {
        let bits = Bits::from_hex(s).map_err(|e| ProgramError::Hex(e.to_string()))?;
        Program::decode(&bits)
    }

    /// Parses `;`- or newline-separated assembly.
    pub fn parse_asm(src: &str) -> Result<Program, ProgramError> {
        let ins = src
            .split([';', '\n'])
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Program::new(ins)
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn encoding(&self) -> &Bits {
        &self.encoding
    }

    /// `l(p)`.
    pub fn length_bits(&self) -> usize {
        self.encoding.len()
    }

    pub fn to_hex(&self) -> String {
        self.encoding.to_hex()
    }

    pub fn has_jumps(&self) -> bool {
        self.instructions.iter().any(Instruction::is_jump)
    }

    /// Index of the LOOPEND matching the LOOPSTART at `i`, or vice versa.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i] as usize
    }

    pub fn to_asm(&self) -> String {
        self.instructions
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.to_asm())
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Program{self}")
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Program::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// All valid program encodings of exactly `len` bits, in lexicographic
/// order.
pub fn valid_encodings_of_length(len: usize) -> Vec<Bits> {
    let mut out = Vec::new();
    let mut count = 1u128;
    while gamma_width(count) + 4 * count as usize <= len {
        let mut prefix = Bits::new();
        prefix.push_gamma(count);
        fill(&mut prefix, len, count as usize, 0, &mut out);
        count += 1;
    }
    out.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
    out
}

fn gamma_width(m: u128) -> usize {
    2 * (127 - m.leading_zeros() as usize) + 1
}

/// Naturals whose gamma0 code is exactly `w` bits wide.
fn nats_of_width(w: usize) -> std::ops::RangeInclusive<u64> {
    if w.is_multiple_of(2) || w > 127 {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    let k = (w - 1) / 2;
    if k >= 64 {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    let lo = (1u64 << k) - 1;
    let hi = if k == 63 {
        MAX_IMMEDIATE
    } else {
        (1u64 << (k + 1)) - 2
    };
    lo..=hi
}

fn fill(cur: &mut Bits, len: usize, left: usize, depth: usize, out: &mut Vec<Bits>) {
    let room = len - cur.len();
    if left == 0 {
        if room == 0 && depth == 0 {
            out.push(cur.clone());
        }
        return;
    }
    // Remaining instructions need at least four bits each, and every open
    // loop still needs a LOOPEND.
    if room < 4 * left || depth > left {
        return;
    }
    let spare = room - 4 * (left - 1);
    let mut try_push = |ins: Instruction, cur: &mut Bits, depth: usize| {
        let mark = cur.len();
        ins.encode_into(cur);
        fill(cur, len, left - 1, depth, out);
        cur.truncate(mark);
    };
    for ins in [Instruction::Halt, Instruction::Nop] {
        try_push(ins, cur, depth);
    }
    if depth > 0 {
        try_push(Instruction::LoopEnd, cur, depth - 1);
    }
    if spare >= 7 {
        for r in 0..NUM_REGS {
            try_push(Instruction::Read(r), cur, depth);
            try_push(Instruction::Write(r), cur, depth);
            try_push(Instruction::LoopStart(r), cur, depth + 1);
        }
    }
    if spare >= 10 {
        for a in 0..NUM_REGS {
            for b in 0..NUM_REGS {
                for ins in [
                    Instruction::Mov(a, b),
                    Instruction::Add(a, b),
                    Instruction::Sub(a, b),
                    Instruction::Mul(a, b),
                ] {
                    try_push(ins, cur, depth);
                }
            }
        }
    }
    let mut w = 1;
    while 4 + w <= spare {
        for v in nats_of_width(w) {
            try_push(Instruction::Jmp(v), cur, depth);
        }
        w += 2;
    }
    let mut w = 1;
    while 7 + w <= spare {
        for r in 0..NUM_REGS {
            for v in nats_of_width(w) {
                try_push(Instruction::LoadI(r, v), cur, depth);
                try_push(Instruction::Jz(r, v), cur, depth);
            }
        }
        w += 2;
    }
}
