//! Unbounded naturals with a machine-word fast path.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Nat {
    Small(u64),
    Big(Box<BigUint>),
}

impl Nat {
    pub const ZERO: Nat = Nat::Small(0);

    fn from_big(b: BigUint) -> Nat {
        match b.to_u64() {
            Some(v) => Nat::Small(v),
            None => Nat::Big(Box::new(b)),
        }
    }

    fn to_big(&self) -> BigUint {
        match self {
            Nat::Small(v) => BigUint::from(*v),
            Nat::Big(b) => (**b).clone(),
        }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        matches!(self, Nat::Small(0))
    }

    /// Value clamped to `u64::MAX`.
    #[inline]
    pub fn saturating_u64(&self) -> u64 {
        match self {
            Nat::Small(v) => *v,
            Nat::Big(_) => u64::MAX,
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        self.to_big()
    }

    #[inline]
    pub fn add(&self, o: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, o) {
            if let Some(v) = a.checked_add(*b) {
                return Nat::Small(v);
            }
        }
        Nat::from_big(self.to_big() + o.to_big())
    }

    #[inline]
    pub fn saturating_sub(&self, o: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, o) {
            return Nat::Small(a.saturating_sub(*b));
        }
        let (a, b) = (self.to_big(), o.to_big());
        if a <= b {
            Nat::ZERO
        } else {
            Nat::from_big(a - b)
        }
    }

    #[inline]
    pub fn mul(&self, o: &Nat) -> Nat {
        if let (Nat::Small(a), Nat::Small(b)) = (self, o) {
            if let Some(v) = a.checked_mul(*b) {
                return Nat::Small(v);
            }
        }
        let p = self.to_big() * o.to_big();
        if p.is_zero() {
            Nat::ZERO
        } else {
            Nat::from_big(p)
        }
    }

    /// Canonical big-endian bytes, used for state digests.
    pub fn to_bytes_be(&self) -> Vec<u8> {
        self.to_big().to_bytes_be()
    }
}

impl From<u64> for Nat {
    fn from(v: u64) -> Self {
        Nat::Small(v)
    }
}

impl From<BigUint> for Nat {
    fn from(b: BigUint) -> Self {
        Nat::from_big(b)
    }
}

impl Default for Nat {
    fn default() -> Self {
        Nat::ZERO
    }
}

impl PartialOrd for Nat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Nat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Nat::Small(a), Nat::Small(b)) => a.cmp(b),
            (Nat::Small(_), Nat::Big(_)) => Ordering::Less,
            (Nat::Big(_), Nat::Small(_)) => Ordering::Greater,
            (Nat::Big(a), Nat::Big(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nat::Small(v) => write!(f, "{v}"),
            Nat::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
