//! Tick-exact event log, written as one JSON object per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::codec::LedgerRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Proc {
    A,
    B,
    C,
    M,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Header {
        pstar: String,
        x: String,
        n: u64,
        kappa: u64,
        scheduler: String,
        share_mode: String,
        read_mode: String,
        proof_source: String,
    },
    CycleStart {
        cycle: u32,
        length: u64,
    },
    CertAccepted {
        index: u64,
        len_bits: u64,
        work: u64,
        p: String,
        t: Vec<u64>,
        a_ticks: u64,
    },
    /// Only logged for scripted candidates; rejected garbage is not traced.
    CertRejected {
        index: u64,
        len_bits: u64,
        reason: String,
    },
    PoolAdd {
        entry: u64,
        p: String,
        t: Vec<u64>,
        exponent: u32,
        row: LedgerRow<String>,
        kraft_total: String,
    },
    KraftSkip {
        p: String,
        t: Vec<u64>,
        exponent: u32,
        reason: String,
    },
    TBoundComputed {
        entry: u64,
        value: String,
        steps: u64,
        t_fast: String,
    },
    BoundDead {
        entry: u64,
        reason: String,
    },
    FastUpdate {
        entry: u64,
        t_fast: String,
        p_fast: String,
    },
    PeriodStart {
        k: u64,
        program: String,
    },
    Halt {
        output: String,
        k: u64,
        steps_in_period: u64,
    },
    Abort {
        aborted: Proc,
    },
    BudgetExhausted {
        budget: u64,
    },
    Summary {
        steps_a: u64,
        steps_b: u64,
        steps_c: u64,
        total: u64,
        ledger: Vec<LedgerRow<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    pub process: Proc,
    #[serde(flatten)]
    pub event: Event,
}

/// Infinity sentinel for `t_fast`.
pub const INF: &str = "inf";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, tick: u64, process: Proc, event: Event) {
        self.records.push(TraceRecord {
            tick,
            process,
            event,
        });
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&serde_json::to_string(r).expect("records serialize"));
            s.push('\n');
        }
        s
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_jsonl().as_bytes())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Trace, serde_json::Error> {
        let mut records = Vec::new();
        for line in r.lines() {
            let line = line.map_err(serde_json::Error::io)?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line)?);
        }
        Ok(Trace { records })
    }

    pub fn iter(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter()
    }

    pub fn header(&self) -> Option<&Event> {
        self.records
            .iter()
            .map(|r| &r.event)
            .find(|e| matches!(e, Event::Header { .. }))
    }

    /// Input the trace was recorded on.
    pub fn input(&self) -> Option<&str> {
        match self.header()? {
            Event::Header { x, .. } => Some(x),
            _ => None,
        }
    }

    /// `(tick, output)` of the halt, if the run finished.
    pub fn halt(&self) -> Option<(u64, &str, u64)> {
        self.records.iter().find_map(|r| match &r.event {
            Event::Halt { output, k, .. } => Some((r.tick, output.as_str(), *k)),
            _ => None,
        })
    }

    /// `time_M(x)`: the tick at which C printed.
    pub fn time_m(&self) -> Option<u64> {
        self.halt().map(|(t, _, _)| t)
    }

    pub fn summary(&self) -> Option<(u64, u64, u64, u64)> {
        self.records.iter().rev().find_map(|r| match r.event {
            Event::Summary {
                steps_a,
                steps_b,
                steps_c,
                total,
                ..
            } => Some((steps_a, steps_b, steps_c, total)),
            _ => None,
        })
    }

    /// `(tick, k)` of every C period start.
    pub fn periods(&self) -> Vec<(u64, u64)> {
        self.records
            .iter()
            .filter_map(|r| match r.event {
                Event::PeriodStart { k, .. } => Some((r.tick, k)),
                _ => None,
            })
            .collect()
    }

    /// `(tick, t_fast)` at the start and after every update.
    pub fn t_fast_series(&self) -> Vec<(u64, String)> {
        let mut out = vec![(0, INF.to_string())];
        for r in &self.records {
            if let Event::FastUpdate { t_fast, .. } = &r.event {
                out.push((r.tick, t_fast.clone()));
            }
        }
        out
    }
}
