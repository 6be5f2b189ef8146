//! `M_{p*}`: proof search (A), Kraft-weighted bound evaluation (B) and
//! doubling-period execution (C) on a deterministic 1:1:8 tick schedule,
//! with bound verification and termination-case classification.

pub mod bound;
pub mod config;
pub mod sim;
pub mod trace;

pub use bound::{classify_termination, verify_bound, BoundError, BoundReport, Case, Reference};
pub use config::{MConfig, ProofSource, SchedulerMode, ScriptedEntry};
pub use sim::{
    run_mstar, run_mstar_cycles, run_mstar_persistent, AState, AcceptedCert, MRun, MStarError,
};
pub use trace::{Event, Proc, Trace, TraceRecord, INF};
