use serde::{Deserialize, Serialize};

use crate::codec::{Bits, ShareMode};
use crate::vm::ReadMode;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerMode {
    /// Fixed 10-tick rounds: one A tick, one B tick, eight C ticks.
    #[default]
    Round,
    /// Cycles of doubling length; A and B restart from scratch each cycle,
    /// C keeps its period ladder.
    Cycles,
}

/// A certificate injected at a fixed enumeration index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedEntry {
    pub index: u64,
    pub bits: Bits,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "entries")]
pub enum ProofSource {
    /// A idles; the pool stays empty.
    #[default]
    Empty,
    /// Every bitstring in length-lexicographic order.
    Enumerate,
    /// Length-lexicographic enumeration, except that the listed indices
    /// yield the given candidates instead.
    Scripted(Vec<ScriptedEntry>),
}

impl ProofSource {
    pub fn kind(&self) -> &'static str {
        match self {
            ProofSource::Empty => "empty",
            ProofSource::Enumerate => "enumerate",
            ProofSource::Scripted(_) => "scripted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MConfig {
    pub scheduler: SchedulerMode,
    pub share_mode: ShareMode,
    pub read_mode: ReadMode,
    pub proof_source: ProofSource,
    /// Total ticks (all processes) before the run gives up.
    pub global_budget: u64,
}

impl Default for MConfig {
    fn default() -> Self {
        MConfig {
            scheduler: SchedulerMode::Round,
            share_mode: ShareMode::Fixed,
            read_mode: ReadMode::Strict,
            proof_source: ProofSource::Empty,
            global_budget: 100_000_000,
        }
    }
}
