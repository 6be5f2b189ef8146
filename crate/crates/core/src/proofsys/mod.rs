//! The proof layer: certificates that a program is equivalent to `p*` and
//! runs within a polynomial bound, checked by replaying a rewrite derivation
//! and re-running a static cost analysis.

pub mod analysis;
pub mod certificate;
pub mod costpoly;
pub mod rewrite;

pub use analysis::{cost_bound, cost_bound_with_work, NotCertifiable};
pub use certificate::{
    check_certificate, enumerate_candidate, work_limit, Certificate, CheckReport, Rejection,
    Verdict, KAPPA,
};
pub use costpoly::CostPoly;
pub use rewrite::{apply_rewrite, independent, RewriteError, RewriteStep, Rule, CATALOG};

/// Coefficient-wise domination of bounds.
pub fn dominates(t: &CostPoly, c: &CostPoly) -> bool {
    t.dominates(c)
}
