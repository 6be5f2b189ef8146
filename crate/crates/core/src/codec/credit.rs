//! Exact-credit deficit scheduler over dyadic shares.
//!
//! Every registered entry accrues `2^{-exponent}` credit per tick. On each
//! tick the entry with the largest credit `>= 1` is granted one unit of work
//! and pays one credit; ties go to the earliest registered entry. Credits are
//! never materialized as fractions: an entry's credit after tick `T` is
//! `(T - key) / 2^exponent` with `key = origin + executed * 2^exponent`, and
//! within one exponent the order by `(key, seq)` does not change over time,
//! so each exponent class is a sorted set and only the class heads compete.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::dyadic::Dyadic;
use super::kraft::ShareExponent;

/// What happens to capacity no entry is entitled to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareMode {
    /// Unused capacity stays idle.
    #[default]
    Fixed,
    /// Unused capacity goes round-robin to registered entries, without
    /// touching their credit.
    WorkConserving,
}

/// A granted unit of work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grant<Id> {
    Credit(Id),
    Slack(Id),
}

impl<Id: Copy> Grant<Id> {
    pub fn id(&self) -> Id {
        match *self {
            Grant::Credit(id) | Grant::Slack(id) => id,
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    exponent: u32,
    origin: u64,
    executed: u64,
    seq: u64,
}

impl Slot {
    fn key(&self) -> u128 {
        let step = pow2(self.exponent).unwrap_or(u128::MAX);
        (self.origin as u128).saturating_add((self.executed as u128).saturating_mul(step))
    }
}

fn pow2(e: u32) -> Option<u128> {
    1u128.checked_shl(e)
}

#[derive(Debug, Clone)]
pub struct CreditScheduler<Id> {
    now: u64,
    mode: ShareMode,
    slots: HashMap<Id, Slot>,
    by_seq: BTreeMap<u64, Id>,
    classes: BTreeMap<u32, BTreeSet<(u128, u64)>>,
    next_seq: u64,
    rr_last: Option<u64>,
}

impl<Id: Copy + Eq + Hash> CreditScheduler<Id> {
    pub fn new(mode: ShareMode) -> Self {
        CreditScheduler {
            now: 0,
            mode,
            slots: HashMap::new(),
            by_seq: BTreeMap::new(),
            classes: BTreeMap::new(),
            next_seq: 0,
            rr_last: None,
        }
    }

    /// Ticks elapsed so far.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn mode(&self) -> ShareMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Registers an entry that starts accruing on the next tick.
    pub fn add(&mut self, id: Id, exponent: ShareExponent) {
        let now = self.now;
        self.add_with_origin(id, exponent, now);
    }

    /// Registers an entry whose credit is accounted as if it had been present
    /// since `origin` (`origin <= now`).
    pub fn add_with_origin(&mut self, id: Id, exponent: ShareExponent, origin: u64) {
        assert!(!self.slots.contains_key(&id), "entry registered twice");
        debug_assert!(origin <= self.now);
        let slot = Slot {
            exponent: exponent.value(),
            origin,
            executed: 0,
            seq: self.next_seq,
        };
        self.next_seq += 1;
        self.classes
            .entry(slot.exponent)
            .or_default()
            .insert((slot.key(), slot.seq));
        self.by_seq.insert(slot.seq, id);
        self.slots.insert(id, slot);
    }

    pub fn remove(&mut self, id: Id) -> bool {
        let Some(slot) = self.slots.remove(&id) else {
            return false;
        };
        if let Some(class) = self.classes.get_mut(&slot.exponent) {
            class.remove(&(slot.key(), slot.seq));
            if class.is_empty() {
                self.classes.remove(&slot.exponent);
            }
        }
        self.by_seq.remove(&slot.seq);
        true
    }

    pub fn contains(&self, id: Id) -> bool {
        self.slots.contains_key(&id)
    }

    /// Units of credit-paid work granted to `id`.
    pub fn executed(&self, id: Id) -> Option<u64> {
        self.slots.get(&id).map(|s| s.executed)
    }

    /// Current exact credit of `id`.
    pub fn credit(&self, id: Id) -> Option<Dyadic> {
        let s = self.slots.get(&id)?;
        let accrued = Dyadic::new(BigUint::from(self.now - s.origin), s.exponent);
        Some(accrued.sub(&Dyadic::new(BigUint::from(s.executed), 0)))
    }

    /// The earliest tick at which some entry becomes eligible, if any can.
    pub fn next_eligible_tick(&self) -> Option<u64> {
        self.classes
            .iter()
            .filter_map(|(&e, class)| {
                let &(key, _) = class.first()?;
                let t = key.checked_add(pow2(e)?)?;
                u64::try_from(t).ok()
            })
            .min()
    }

    /// Jumps the clock forward over idle ticks.
    pub fn skip_to(&mut self, ticks: u64) {
        debug_assert!(ticks >= self.now);
        self.now = ticks;
    }

    fn best_eligible(&self) -> Option<(u32, u128, u64)> {
        let t = self.now as u128;
        let mut best: Option<(u32, u128, u64)> = None;
        for (&e, class) in &self.classes {
            let Some(&(key, seq)) = class.first() else {
                continue;
            };
            let Some(step) = pow2(e) else { continue };
            if key.saturating_add(step) > t {
                continue;
            }
            best = match best {
                None => Some((e, key, seq)),
                Some((be, bkey, bseq)) => {
                    // credit = (t - key) / 2^e; compare by cross-multiplication.
                    let lhs = (t - key) << be;
                    let rhs = (t - bkey) << e;
                    if lhs > rhs || (lhs == rhs && seq < bseq) {
                        Some((e, key, seq))
                    } else {
                        Some((be, bkey, bseq))
                    }
                }
            };
        }
        best
    }

    /// Advances one tick and returns the entry granted this tick's unit.
    pub fn tick(&mut self) -> Option<Grant<Id>> {
        self.now += 1;
        if let Some((e, key, seq)) = self.best_eligible() {
            let id = self.by_seq[&seq];
            let class = self.classes.get_mut(&e).expect("class exists");
            class.remove(&(key, seq));
            let slot = self.slots.get_mut(&id).expect("slot exists");
            slot.executed += 1;
            class.insert((slot.key(), seq));
            return Some(Grant::Credit(id));
        }
        if self.mode == ShareMode::WorkConserving && !self.by_seq.is_empty() {
            let next = match self.rr_last {
                Some(last) => self
                    .by_seq
                    .range(last + 1..)
                    .next()
                    .or_else(|| self.by_seq.iter().next()),
                None => self.by_seq.iter().next(),
            };
            let (&seq, &id) = next.expect("non-empty");
            self.rr_last = Some(seq);
            return Some(Grant::Slack(id));
        }
        None
    }
}
