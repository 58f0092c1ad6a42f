//! Lean 4 source for a statement under a premise set.
//!
//! | feature | Lean term |
//! |---|---|
//! | `r1`, `r2` | `finrank R (LinearMap.range Di)` |
//! | `n1`, `n2` | `finrank R (LinearMap.ker Di)` |
//! | `h1` | `finrank R V0` |
//! | `w1`, `h2` | `finrank R V1` |
//! | `w2` | `finrank R V2` |
//!
//! Every dimension is cast to `ℤ`; `+ - ×` become `+ - *`, `and` becomes
//! `∧`, `=>` becomes `→` and `not` becomes `¬`.

use alloc::format;
use alloc::string::String;

use super::premises::PremiseSet;
use crate::features::Feature;
use crate::rng;
use crate::statements::{ArithOp, Statement, Term};

const HEADER: &str = "import Mathlib

open Module

";

fn feature(f: Feature) -> &'static str {
    match f {
        Feature::R1 => "(finrank R (LinearMap.range D1) : ℤ)",
        Feature::R2 => "(finrank R (LinearMap.range D2) : ℤ)",
        Feature::N1 => "(finrank R (LinearMap.ker D1) : ℤ)",
        Feature::N2 => "(finrank R (LinearMap.ker D2) : ℤ)",
        Feature::H1 => "(finrank R V0 : ℤ)",
        Feature::W1 | Feature::H2 => "(finrank R V1 : ℤ)",
        Feature::W2 => "(finrank R V2 : ℤ)",
    }
}

fn term(t: &Term) -> String {
    match t {
        Term::Var(f) => String::from(feature(*f)),
        Term::Const(c) => format!("({c} : ℤ)"),
        Term::Bin(op, a, b) => {
            let sym = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
            };
            format!("({} {sym} {})", term(a), term(b))
        }
    }
}

fn prop(s: &Statement) -> String {
    match s {
        Statement::Eq(a, b) => format!("{} = {}", term(a), term(b)),
        Statement::Not(a) => format!("¬({})", prop(a)),
        Statement::And(a, b) => format!("({}) ∧ ({})", prop(a), prop(b)),
        Statement::Implies(a, b) => format!("({}) → ({})", prop(a), prop(b)),
    }
}

/// Hex digest naming the theorem and its file.
pub fn lean_hash(s: &Statement, p: &PremiseSet) -> String {
    let mut text = s.to_prefix();
    for st in p.statements() {
        text.push('|');
        text.push_str(&st.to_prefix());
    }
    format!("{:016x}", rng::derive(rng::tag(&text), text.len() as u64))
}

/// Relative path of the exported file, `lean/stmt_<hash>.lean`.
pub fn lean_file_name(s: &Statement, p: &PremiseSet) -> String {
    format!("lean/stmt_{}.lean", lean_hash(s, p))
}

pub fn export_lean(s: &Statement, p: &PremiseSet) -> String {
    let mut out = String::from(HEADER);
    out.push_str(&format!("-- {}\n", s.to_prefix()));
    out.push_str(&format!("theorem stmt_{} {{R : Type*}} [DivisionRing R]\n", lean_hash(s, p)));
    for v in ["V0", "V1", "V2"] {
        out.push_str(&format!(
            "    {{{v} : Type*}} [AddCommGroup {v}] [Module R {v}] [FiniteDimensional R {v}]\n"
        ));
    }
    out.push_str("    (D1 : V1 →ₗ[R] V0) (D2 : V2 →ₗ[R] V1)\n");
    for (i, st) in p.statements().iter().enumerate() {
        out.push_str(&format!("    (p{} : {})\n", i + 1, prop(st)));
    }
    out.push_str(&format!("    : {} := by\n", prop(s)));
    out.push_str("  first\n  | grind\n  | (intros; ring_nf at *; omega)\n");
    out
}
