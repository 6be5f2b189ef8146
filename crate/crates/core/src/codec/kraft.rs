//! Kraft-inequality bookkeeping for pools of prefix-coded entries.
//!
//! Every entry owns the fixed share `2^{-exponent}`. Shares never rescale
//! when the pool grows; capacity left over by the entries stays idle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dyadic::Dyadic;

/// Share exponent: `l(p) + l(t)` for pool entries, `l(p)` for Levin
/// candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ShareExponent(u32);

impl ShareExponent {
    /// Exponents must be at least one; a zero exponent would claim the whole
    /// budget for a single empty code.
    pub fn new(value: u32) -> Option<Self> {
        (value >= 1).then_some(ShareExponent(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn share(self) -> Dyadic {
        Dyadic::pow2_neg(self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KraftError {
    #[error("adding 2^-{exponent} would push the Kraft sum {total} above 1")]
    KraftViolation { exponent: u32, total: String },
    #[error("entry {0} is already in the ledger")]
    DuplicateEntry(String),
}

/// One dumped ledger row, as written into traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRow<Id> {
    pub id: Id,
    pub exponent: u32,
    pub share: String,
}

/// Insertion-ordered ledger of share exponents with an exact running total.
#[derive(Debug, Clone)]
pub struct KraftLedger<Id: Ord + Clone> {
    order: Vec<Id>,
    entries: BTreeMap<Id, ShareExponent>,
    total: Dyadic,
}

impl<Id: Ord + Clone + std::fmt::Debug> Default for KraftLedger<Id> {
    fn default() -> Self {
        Self::new()
    }
}

impl<Id: Ord + Clone + std::fmt::Debug> KraftLedger<Id> {
    pub fn new() -> Self {
        KraftLedger {
            order: Vec::new(),
            entries: BTreeMap::new(),
            total: Dyadic::zero(),
        }
    }

    pub fn total(&self) -> &Dyadic {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, id: &Id) -> bool {
        self.entries.contains_key(id)
    }

    pub fn exponent(&self, id: &Id) -> Option<ShareExponent> {
        self.entries.get(id).copied()
    }

    /// Adds an entry. The ledger is left unchanged on error.
    pub fn kraft_add(&mut self, id: Id, exponent: ShareExponent) -> Result<(), KraftError> {
        if self.entries.contains_key(&id) {
            return Err(KraftError::DuplicateEntry(format!("{id:?}")));
        }
        let total = self.total.add(&exponent.share());
        if total > Dyadic::one() {
            return Err(KraftError::KraftViolation {
                exponent: exponent.value(),
                total: self.total.to_string(),
            });
        }
        self.total = total;
        self.order.push(id.clone());
        self.entries.insert(id, exponent);
        Ok(())
    }

    /// Fixed per-entry shares in insertion order.
    pub fn assign_shares(&self) -> Vec<(Id, Dyadic)> {
        self.order
            .iter()
            .map(|id| (id.clone(), self.entries[id].share()))
            .collect()
    }

    /// Unassigned capacity `1 - total`.
    pub fn idle(&self) -> Dyadic {
        Dyadic::one().sub(&self.total)
    }

    /// Recomputes the total from scratch, for cross-checking the running sum.
    pub fn recompute_total(&self) -> Dyadic {
        self.entries
            .values()
            .fold(Dyadic::zero(), |acc, e| acc.add(&e.share()))
    }

    pub fn rows(&self) -> Vec<LedgerRow<Id>> {
        self.order
            .iter()
            .map(|id| LedgerRow {
                id: id.clone(),
                exponent: self.entries[id].value(),
                share: self.entries[id].share().to_string(),
            })
            .collect()
    }
}
