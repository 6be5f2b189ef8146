//! Prefix-free codes, exact Kraft accounting and the credit scheduler that
//! turns dyadic shares into per-tick grants.

pub mod bits;
pub mod credit;
pub mod dyadic;
pub mod kraft;

pub use bits::{length_lex, length_lex_index, BitReader, Bits, BitsError, ReadError};
pub use credit::{CreditScheduler, Grant, ShareMode};
pub use dyadic::Dyadic;
pub use kraft::{KraftError, KraftLedger, LedgerRow, ShareExponent};
