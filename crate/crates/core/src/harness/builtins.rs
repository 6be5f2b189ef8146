//! Named programs referenced from scenario files.

use crate::vm::{Instruction, Program};

/// `(name, assembly)` for every fixed builtin.
pub const BUILTINS: &[(&str, &str)] = &[
    ("halt", "HALT"),
    // Echoes the input; also the identity `g` for inversion problems.
    (
        "copy_input",
        "LOOPSTART R0; READ R1; WRITE R1; LOOPEND; HALT",
    ),
    ("identity", "LOOPSTART R0; READ R1; WRITE R1; LOOPEND; HALT"),
    // n^2 + O(n) idle steps, no output; rewrites to HALT.
    (
        "busy2",
        "LOOPSTART R0; LOOPSTART R0; NOP; LOOPEND; LOOPEND; HALT",
    ),
    // Writes every input bit 16 times: 48n^2 + 69n + 2 steps.
    (
        "slow_scan",
        "LOOPSTART R0; READ R1; LOADI R2, 16; LOOPSTART R2; LOOPSTART R0; NOP; LOOPEND; \
         WRITE R1; LOOPEND; LOOPEND; HALT",
    ),
    // Same output in 53n + 2 steps.
    (
        "fast_scan",
        "LOOPSTART R0; READ R1; LOADI R2, 16; LOOPSTART R2; WRITE R1; LOOPEND; LOOPEND; HALT",
    ),
    // Writes `[n > 0]`; the shortest preimage finder for one-bit targets.
    ("levin_planted", "WRITE R0; HALT"),
    ("const0", "WRITE R1; HALT"),
    // OR of the input bits.
    (
        "or_bits",
        "LOOPSTART R0; READ R1; ADD R2, R1; LOOPEND; WRITE R2; HALT",
    ),
    // Every input bit twice.
    (
        "double",
        "LOOPSTART R0; READ R1; WRITE R1; WRITE R1; LOOPEND; HALT",
    ),
];

/// `NOP^(tau-1); HALT`: halts in exactly `tau` steps.
pub fn delay(tau: u64) -> Program {
    let mut ins = vec![Instruction::Nop; tau.saturating_sub(1) as usize];
    ins.push(Instruction::Halt);
    Program::new(ins).expect("straight-line code is well formed")
}

pub fn builtin(name: &str) -> Option<Program> {
    if let Some(tau) = name.strip_prefix("delay:") {
        return tau.parse().ok().filter(|&t| t >= 1).map(delay);
    }
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, asm)| Program::parse_asm(asm).expect("builtins assemble"))
}

/// Resolves a program reference: a builtin name, `delay:N`, `asm:<src>`
/// or the `<bitlen>:<hex>` encoding.
pub fn resolve_program(spec: &str) -> Result<Program, String> {
    let spec = spec.trim();
    if let Some(p) = builtin(spec) {
        return Ok(p);
    }
    if let Some(src) = spec.strip_prefix("asm:") {
        return Program::parse_asm(src).map_err(|e| e.to_string());
    }
    if spec.contains(':') && !spec.starts_with("delay:") {
        return Program::from_hex(&spec.to_lowercase()).map_err(|e| e.to_string());
    }
    Err(format!("unknown builtin `{spec}`"))
}
