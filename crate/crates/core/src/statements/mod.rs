//! The statement language: typed expression trees over the eight features.
//!
//! Text form is prefix notation:
//!
//! ```text
//! stmt := "(" "=" term term ")"
//!       | "(" ("and" | "∧") stmt stmt ")"
//!       | "(" ("=>" | "->" | "⟹") stmt stmt ")"
//!       | "(" ("not" | "¬") stmt ")"
//! term := feature | integer
//!       | "(" ("+" | "-" | "−" | "*" | "×") term term ")"
//! feature := "r1" | "r2" | "n1" | "n2" | "h1" | "w1" | "h2" | "w2"
//! integer := ["-"] digit+
//! ```
//!
//! Printing always uses the ASCII spellings.

mod canonical;
mod concepts;
mod parse;

pub use canonical::{canonicalize, AtomicFormula, CanonicalForm, Monomial, Polynomial};
pub use concepts::{detect_concepts, detect_concepts_with, ConceptFlags, ConceptMode, Concept};
pub use parse::parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use num_bigint::BigInt;

use crate::features::{Feature, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub const ALL: [ArithOp; 3] = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul];

    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

/// Arithmetic node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Feature),
    Const(i64),
    Bin(ArithOp, Box<Term>, Box<Term>),
}

/// Boolean node; a whole statement is one of these.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Eq(Term, Term),
    And(Box<Statement>, Box<Statement>),
    Implies(Box<Statement>, Box<Statement>),
    Not(Box<Statement>),
}

impl Term {
    pub fn bin(op: ArithOp, a: Term, b: Term) -> Term {
        Term::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn eval_i128(&self, x: &FeatureVector) -> Option<i128> {
        match self {
            Term::Var(f) => Some(x.get(*f) as i128),
            Term::Const(c) => Some(*c as i128),
            Term::Bin(op, a, b) => {
                let (a, b) = (a.eval_i128(x)?, b.eval_i128(x)?);
                match op {
                    ArithOp::Add => a.checked_add(b),
                    ArithOp::Sub => a.checked_sub(b),
                    ArithOp::Mul => a.checked_mul(b),
                }
            }
        }
    }

    fn eval_big(&self, x: &FeatureVector) -> BigInt {
        match self {
            Term::Var(f) => BigInt::from(x.get(*f)),
            Term::Const(c) => BigInt::from(*c),
            Term::Bin(op, a, b) => {
                let (a, b) = (a.eval_big(x), b.eval_big(x));
                match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                }
            }
        }
    }

    /// Exact value on a feature vector.
    pub fn value(&self, x: &FeatureVector) -> BigInt {
        match self.eval_i128(x) {
            Some(v) => BigInt::from(v),
            None => self.eval_big(x),
        }
    }

    pub fn features(&self, out: &mut Vec<Feature>) {
        match self {
            Term::Var(f) => out.push(*f),
            Term::Const(_) => {}
            Term::Bin(_, a, b) => {
                a.features(out);
                b.features(out);
            }
        }
    }

    fn write_prefix(&self, out: &mut String) {
        match self {
            Term::Var(f) => out.push_str(f.name()),
            Term::Const(c) => {
                let _ = write!(out, "{c}");
            }
            Term::Bin(op, a, b) => {
                out.push('(');
                out.push_str(op.symbol());
                out.push(' ');
                a.write_prefix(out);
                out.push(' ');
                b.write_prefix(out);
                out.push(')');
            }
        }
    }

    fn write_infix(&self, out: &mut String, parent: u8, right: bool) {
        match self {
            Term::Var(f) => out.push_str(f.name()),
            Term::Const(c) => {
                let _ = write!(out, "{c}");
            }
            Term::Bin(op, a, b) => {
                let prec = if *op == ArithOp::Mul { 2 } else { 1 };
                let paren = prec < parent || (prec == parent && right && *op != ArithOp::Mul);
                if paren {
                    out.push('(');
                }
                a.write_infix(out, prec, false);
                let _ = write!(out, " {} ", op.symbol());
                b.write_infix(out, prec, true);
                if paren {
                    out.push(')');
                }
            }
        }
    }
}

impl Statement {
    pub fn eq(a: Term, b: Term) -> Statement {
        Statement::Eq(a, b)
    }

    pub fn and(a: Statement, b: Statement) -> Statement {
        Statement::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Statement, b: Statement) -> Statement {
        Statement::Implies(Box::new(a), Box::new(b))
    }

    pub fn not(a: Statement) -> Statement {
        Statement::Not(Box::new(a))
    }

    /// Node count including leaves.
    pub fn tree_size(&self) -> usize {
        match self {
            Statement::Eq(a, b) => 1 + a.size() + b.size(),
            Statement::And(a, b) | Statement::Implies(a, b) => 1 + a.tree_size() + b.tree_size(),
            Statement::Not(a) => 1 + a.tree_size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Statement::Eq(a, b) => 1 + a.depth().max(b.depth()),
            Statement::And(a, b) | Statement::Implies(a, b) => 1 + a.depth().max(b.depth()),
            Statement::Not(a) => 1 + a.depth(),
        }
    }

    pub fn evaluate(&self, x: &FeatureVector) -> bool {
        match self {
            Statement::Eq(a, b) => match (a.eval_i128(x), b.eval_i128(x)) {
                (Some(p), Some(q)) => p == q,
                _ => a.eval_big(x) == b.eval_big(x),
            },
            Statement::And(a, b) => a.evaluate(x) && b.evaluate(x),
            Statement::Implies(a, b) => !a.evaluate(x) || b.evaluate(x),
            Statement::Not(a) => !a.evaluate(x),
        }
    }

    /// Equality nodes in left-to-right order.
    pub fn atoms(&self) -> Vec<&Statement> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Statement>) {
        match self {
            Statement::Eq(..) => out.push(self),
            Statement::And(a, b) | Statement::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Statement::Not(a) => a.collect_atoms(out),
        }
    }

    /// Maximal atoms with their canonical forms attached.
    pub fn atomic_formulae(&self) -> Vec<AtomicFormula> {
        self.atoms()
            .into_iter()
            .map(|s| match s {
                Statement::Eq(a, b) => AtomicFormula::new(a.clone(), b.clone()),
                _ => unreachable!("atoms are equalities"),
            })
            .collect()
    }

    /// Counts occurrences of `not` directly under another `not`.
    pub fn nested_not_count(&self) -> usize {
        match self {
            Statement::Eq(..) => 0,
            Statement::And(a, b) | Statement::Implies(a, b) => {
                a.nested_not_count() + b.nested_not_count()
            }
            Statement::Not(a) => {
                usize::from(matches!(**a, Statement::Not(_))) + a.nested_not_count()
            }
        }
    }

    pub fn features(&self) -> Vec<Feature> {
        let mut out = Vec::new();
        for atom in self.atoms() {
            if let Statement::Eq(a, b) = atom {
                a.features(&mut out);
                b.features(&mut out);
            }
        }
        out
    }

    pub fn to_prefix(&self) -> String {
        let mut s = String::new();
        self.write_prefix(&mut s);
        s
    }

    fn write_prefix(&self, out: &mut String) {
        let (head, kids): (&str, [Option<&Statement>; 2]) = match self {
            Statement::Eq(a, b) => {
                out.push_str("(= ");
                a.write_prefix(out);
                out.push(' ');
                b.write_prefix(out);
                out.push(')');
                return;
            }
            Statement::And(a, b) => ("and", [Some(a), Some(b)]),
            Statement::Implies(a, b) => ("=>", [Some(a), Some(b)]),
            Statement::Not(a) => ("not", [Some(a), None]),
        };
        out.push('(');
        out.push_str(head);
        for k in kids.into_iter().flatten() {
            out.push(' ');
            k.write_prefix(out);
        }
        out.push(')');
    }

    /// Conventional infix rendering for reports, e.g. `h1 - w1 + w2 = 2`.
    pub fn to_infix(&self) -> String {
        let mut s = String::new();
        self.write_infix(&mut s, 0);
        s
    }

    fn write_infix(&self, out: &mut String, parent: u8) {
        // precedence: => 1, and 2, not 3
        match self {
            Statement::Eq(a, b) => {
                a.write_infix(out, 0, false);
                out.push_str(" = ");
                b.write_infix(out, 0, false);
            }
            Statement::Not(a) => {
                if let Statement::Eq(x, y) = &**a {
                    x.write_infix(out, 0, false);
                    out.push_str(" != ");
                    y.write_infix(out, 0, false);
                } else {
                    out.push_str("not (");
                    a.write_infix(out, 0);
                    out.push(')');
                }
            }
            Statement::And(a, b) | Statement::Implies(a, b) => {
                let (prec, sym) = match self {
                    Statement::And(..) => (2, " and "),
                    _ => (1, " => "),
                };
                let paren = prec <= parent;
                if paren {
                    out.push('(');
                }
                a.write_infix(out, prec);
                out.push_str(sym);
                b.write_infix(out, prec);
                if paren {
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_prefix(&mut s);
        f.write_str(&s)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_prefix())
    }
}

impl core::str::FromStr for Statement {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Evaluates a statement on a feature vector.
pub fn evaluate(s: &Statement, x: &FeatureVector) -> bool {
    s.evaluate(x)
}

impl serde::Serialize for Statement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_prefix())
    }
}

impl<'de> serde::Deserialize<'de> for Statement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
