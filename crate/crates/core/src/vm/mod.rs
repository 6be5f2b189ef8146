//! A small register machine with uniform unit cost: 13 opcodes, eight
//! unbounded-natural registers, a read-once input tape and an append-only
//! output tape. Every executed instruction costs exactly one step.

pub mod machine;
pub mod nat;
pub mod program;

pub use machine::{
    ExecOutcome, FaultReason, LoopFrame, MachineState, ReadMode, Status, Vm, VmError, VM_VERSION,
};
pub use nat::Nat;
pub use program::{
    valid_encodings_of_length, Instruction, Program, ProgramError, EOF_REG, MAX_IMMEDIATE, NUM_REGS,
};

/// Convenience wrapper around [`Program::decode`] / [`Program::decode_prefix`].
pub fn decode_program(bits: &crate::codec::Bits, strict: bool) -> Result<Program, ProgramError> {
    if strict {
        Program::decode(bits)
    } else {
        Program::decode_prefix(bits.as_slice()).map(|(p, _)| p)
    }
}

pub fn encode_program(p: &Program) -> crate::codec::Bits {
    p.encoding().clone()
}
