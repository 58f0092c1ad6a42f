//! Provability score, non-degeneracy checks and Lean export.
//!
//! The decision procedure is sound and deliberately incomplete. Atoms are
//! canonicalized; every truth assignment that falsifies the statement is
//! refuted by a linear span argument, a forced equality, or an exact rational
//! simplex run with integer splits on negated atoms. Nonlinear monomials are
//! treated as fresh nonnegative unknowns. Structural facts always available:
//! nonnegativity, rank-nullity, `w1 = h2` and ranks bounded by both matrix
//! dimensions.

mod checks;
mod lean;
mod lp;
mod premises;
mod prove;

pub use checks::{
    canonical_key, noisy_rho, nondegeneracy, nondegeneracy_with, Degeneracy, NondegeneracyChecks,
    Verdict,
};
pub use lean::{export_lean, lean_file_name, lean_hash};
pub use lp::{feasibility, Farkas, LinearSystem, LpOutcome};
pub use premises::{Premise, PremiseGroup, PremiseSet};
pub use prove::{
    prove, BranchCertificate, Certificate, ProofOutcome, Refutation, DEFAULT_BUDGET, SEARCH_BOUND,
};

/// Score needed for termination with the exact prover.
pub const THRESHOLD: f64 = 1.0;
/// Score needed for termination with noisy provability.
pub const NOISY_THRESHOLD: f64 = 0.5;
pub const NOISY_SIGMA: f64 = 0.25;
