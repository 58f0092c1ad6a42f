use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write as _};

use super::{ArithOp, Statement, Term};
use crate::features::{Coord, FeatureVector};

/// Product of coordinates, stored as exponents over the seven merged
/// coordinates (`w1` and `h2` both map to `E`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(pub [u8; Coord::COUNT]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; Coord::COUNT]);

    pub fn var(c: Coord) -> Monomial {
        let mut e = [0; Coord::COUNT];
        e[c.index()] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut e = [0; Coord::COUNT];
        for (i, slot) in e.iter_mut().enumerate() {
            *slot = self.0[i].checked_add(other.0[i])?;
        }
        Some(Monomial(e))
    }

    fn class(&self) -> u32 {
        match self.degree() {
            0 => u32::MAX,
            d => d,
        }
    }

    pub fn value(&self, x: &FeatureVector) -> Option<i128> {
        let mut acc: i128 = 1;
        for c in Coord::ALL {
            for _ in 0..self.0[c.index()] {
                acc = acc.checked_mul(x.coord(c) as i128)?;
            }
        }
        Some(acc)
    }

    fn write(&self, out: &mut String) {
        let mut first = true;
        for c in Coord::ALL {
            for _ in 0..self.0[c.index()] {
                if !first {
                    out.push('*');
                }
                out.push_str(c.feature().name());
                first = false;
            }
        }
    }
}

/// Linear monomials first in coordinate order, then higher degrees, the
/// constant last.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.class()
            .cmp(&other.class())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse integer polynomial; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Polynomial(pub BTreeMap<Monomial, i128>);

impl Polynomial {
    fn constant(c: i128) -> Polynomial {
        let mut m = BTreeMap::new();
        if c != 0 {
            m.insert(Monomial::ONE, c);
        }
        Polynomial(m)
    }

    fn add_scaled(&self, other: &Polynomial, k: i128) -> Option<Polynomial> {
        let mut out = self.0.clone();
        for (m, &c) in &other.0 {
            let slot = out.entry(*m).or_insert(0);
            *slot = slot.checked_add(c.checked_mul(k)?)?;
            if *slot == 0 {
                out.remove(m);
            }
        }
        Some(Polynomial(out))
    }

    fn mul(&self, other: &Polynomial) -> Option<Polynomial> {
        let mut out: BTreeMap<Monomial, i128> = BTreeMap::new();
        for (ma, &ca) in &self.0 {
            for (mb, &cb) in &other.0 {
                let m = ma.mul(mb)?;
                let slot = out.entry(m).or_insert(0);
                *slot = slot.checked_add(ca.checked_mul(cb)?)?;
            }
        }
        out.retain(|_, c| *c != 0);
        Some(Polynomial(out))
    }

    pub fn from_term(t: &Term) -> Option<Polynomial> {
        match t {
            Term::Var(f) => {
                let mut m = BTreeMap::new();
                m.insert(Monomial::var(f.coord()), 1);
                Some(Polynomial(m))
            }
            Term::Const(c) => Some(Polynomial::constant(*c as i128)),
            Term::Bin(op, a, b) => {
                let (a, b) = (Polynomial::from_term(a)?, Polynomial::from_term(b)?);
                match op {
                    ArithOp::Add => a.add_scaled(&b, 1),
                    ArithOp::Sub => a.add_scaled(&b, -1),
                    ArithOp::Mul => a.mul(&b),
                }
            }
        }
    }

    pub fn value(&self, x: &FeatureVector) -> Option<i128> {
        self.0.iter().try_fold(0i128, |acc, (m, &c)| acc.checked_add(c.checked_mul(m.value(x)?)?))
    }

    pub fn is_linear(&self) -> bool {
        self.0.keys().all(|m| m.degree() <= 1)
    }
}

/// Normal form of an equality `lhs = rhs`, read as `p = 0`.
///
/// `Poly` keeps `lhs - rhs` divided by the gcd of its non-constant
/// coefficients, with the first coefficient (in [`Monomial`] order) positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonicalForm {
    Tautology,
    Contradiction,
    Poly(Polynomial),
    /// Coefficients left the `i128` range; keyed by the raw text instead.
    Overflow(String),
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i128
}

impl CanonicalForm {
    fn from_difference(p: Polynomial) -> CanonicalForm {
        let constant = p.0.get(&Monomial::ONE).copied().unwrap_or(0);
        let g = p
            .0
            .iter()
            .filter(|(m, _)| m.degree() > 0)
            .fold(0, |g, (_, &c)| gcd(g, c));
        if g == 0 {
            return if constant == 0 {
                CanonicalForm::Tautology
            } else {
                CanonicalForm::Contradiction
            };
        }
        if constant % g != 0 {
            return CanonicalForm::Contradiction;
        }
        let lead = *p.0.values().next().expect("nonconstant part is nonempty");
        let k = if lead < 0 { -g } else { g };
        CanonicalForm::Poly(Polynomial(p.0.into_iter().map(|(m, c)| (m, c / k)).collect()))
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, CanonicalForm::Tautology | CanonicalForm::Contradiction)
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            CanonicalForm::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.polynomial().is_some_and(Polynomial::is_linear)
    }

    /// Coefficients of the degree-one part.
    pub fn linear(&self) -> [i128; Coord::COUNT] {
        let mut out = [0; Coord::COUNT];
        if let Some(p) = self.polynomial() {
            for c in Coord::ALL {
                out[c.index()] = p.0.get(&Monomial::var(c)).copied().unwrap_or(0);
            }
        }
        out
    }

    /// Constant term of `p` in `p = 0`.
    pub fn constant(&self) -> i128 {
        self.polynomial()
            .and_then(|p| p.0.get(&Monomial::ONE).copied())
            .unwrap_or(0)
    }

    /// Monomials of degree two or more.
    pub fn nonlinear(&self) -> Vec<(Monomial, i128)> {
        self.polynomial()
            .map(|p| p.0.iter().filter(|(m, _)| m.degree() > 1).map(|(m, c)| (*m, *c)).collect())
            .unwrap_or_default()
    }

    /// Truth value on a feature vector, `None` only on `i128` overflow.
    pub fn evaluate(&self, x: &FeatureVector) -> Option<bool> {
        match self {
            CanonicalForm::Tautology => Some(true),
            CanonicalForm::Contradiction => Some(false),
            CanonicalForm::Poly(p) => p.value(x).map(|v| v == 0),
            CanonicalForm::Overflow(_) => None,
        }
    }

    /// An equality statement with this canonical form.
    pub fn to_statement(&self) -> Option<Statement> {
        let p = match self {
            CanonicalForm::Tautology => return Some(Statement::eq(Term::Const(0), Term::Const(0))),
            CanonicalForm::Contradiction => {
                return Some(Statement::eq(Term::Const(0), Term::Const(1)))
            }
            CanonicalForm::Overflow(_) => return None,
            CanonicalForm::Poly(p) => p,
        };
        let mut lhs: Option<Term> = None;
        for (m, &c) in p.0.iter().filter(|(m, _)| m.degree() > 0) {
            let mut factors = Coord::ALL
                .into_iter()
                .flat_map(|k| core::iter::repeat_n(Term::Var(k.feature()), m.0[k.index()] as usize));
            let first = factors.next().expect("degree > 0");
            let mono = factors.fold(first, |acc, f| Term::bin(ArithOp::Mul, acc, f));
            let mag = i64::try_from(c.unsigned_abs()).ok()?;
            let scaled = if mag == 1 { mono } else { Term::bin(ArithOp::Mul, Term::Const(mag), mono) };
            lhs = Some(match lhs {
                None if c < 0 => Term::bin(ArithOp::Sub, Term::Const(0), scaled),
                None => scaled,
                Some(acc) if c < 0 => Term::bin(ArithOp::Sub, acc, scaled),
                Some(acc) => Term::bin(ArithOp::Add, acc, scaled),
            });
        }
        let rhs = i64::try_from(-self.constant()).ok()?;
        Some(Statement::eq(lhs?, Term::Const(rhs)))
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self {
            CanonicalForm::Tautology => return f.write_str("true"),
            CanonicalForm::Contradiction => return f.write_str("false"),
            CanonicalForm::Overflow(raw) => return write!(f, "overflow {raw}"),
            CanonicalForm::Poly(p) => p,
        };
        let mut s = String::new();
        for (m, &c) in p.0.iter().filter(|(m, _)| m.degree() > 0) {
            if s.is_empty() {
                if c < 0 {
                    s.push('-');
                }
            } else {
                s.push_str(if c < 0 { " - " } else { " + " });
            }
            if c.unsigned_abs() != 1 {
                let _ = write!(s, "{}*", c.unsigned_abs());
            }
            m.write(&mut s);
        }
        write!(f, "{s} = {}", -self.constant())
    }
}

/// An equality node with its canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomicFormula {
    pub lhs: Term,
    pub rhs: Term,
    pub canonical: CanonicalForm,
}

impl AtomicFormula {
    pub fn new(lhs: Term, rhs: Term) -> AtomicFormula {
        let canonical = canonicalize_terms(&lhs, &rhs);
        AtomicFormula { lhs, rhs, canonical }
    }

    pub fn from_statement(s: &Statement) -> Option<AtomicFormula> {
        match s {
            Statement::Eq(a, b) => Some(AtomicFormula::new(a.clone(), b.clone())),
            _ => None,
        }
    }

    pub fn statement(&self) -> Statement {
        Statement::eq(self.lhs.clone(), self.rhs.clone())
    }

    /// Degree-one part of `lhs - rhs` before any normalization, so atoms that
    /// normalize to `false` over the integers keep their direction.
    pub fn raw_linear(&self) -> [i128; Coord::COUNT] {
        let mut out = [0; Coord::COUNT];
        let diff = Polynomial::from_term(&self.lhs)
            .zip(Polynomial::from_term(&self.rhs))
            .and_then(|(a, b)| a.add_scaled(&b, -1));
        if let Some(p) = diff {
            for c in Coord::ALL {
                out[c.index()] = p.0.get(&Monomial::var(c)).copied().unwrap_or(0);
            }
        }
        out
    }
}

impl fmt::Display for AtomicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(= {} {})", self.lhs, self.rhs)
    }
}

fn canonicalize_terms(lhs: &Term, rhs: &Term) -> CanonicalForm {
    let diff = Polynomial::from_term(lhs)
        .zip(Polynomial::from_term(rhs))
        .and_then(|(a, b)| a.add_scaled(&b, -1));
    match diff {
        Some(p) => CanonicalForm::from_difference(p),
        None => CanonicalForm::Overflow(alloc::format!("(= {lhs} {rhs})")),
    }
}

/// Canonical form of an atomic formula.
pub fn canonicalize(a: &AtomicFormula) -> CanonicalForm {
    canonicalize_terms(&a.lhs, &a.rhs)
}
