//! Random generation and variation of arithmetic trees.

use alloc::boxed::Box;
use rand::Rng as _;

use crate::features::Feature;
use crate::rng::Rng;
use crate::statements::{ArithOp, Term};

pub(crate) struct Shape {
    pub const_range: i64,
}

impl Shape {
    pub fn leaf(&self, rng: &mut Rng) -> Term {
        if self.const_range == 0 || rng.random_bool(0.7) {
            Term::Var(Feature::ALL[rng.random_range(0..Feature::ALL.len())])
        } else {
            Term::Const(rng.random_range(-self.const_range..=self.const_range))
        }
    }

    pub fn op(&self, rng: &mut Rng) -> ArithOp {
        ArithOp::ALL[rng.random_range(0..3)]
    }

    /// Grow method: each node below the depth limit is a leaf with
    /// probability one half.
    pub fn grow(&self, rng: &mut Rng, depth: usize) -> Term {
        if depth <= 1 || rng.random_bool(0.5) {
            self.leaf(rng)
        } else {
            Term::bin(self.op(rng), self.grow(rng, depth - 1), self.grow(rng, depth - 1))
        }
    }
}

/// Pre-order node `i` of `t`.
pub(crate) fn subtree(t: &Term, i: usize) -> &Term {
    let mut i = i;
    let mut cur = t;
    loop {
        if i == 0 {
            return cur;
        }
        match cur {
            Term::Bin(_, a, b) => {
                let left = a.size();
                if i <= left {
                    i -= 1;
                    cur = a;
                } else {
                    i -= 1 + left;
                    cur = b;
                }
            }
            _ => unreachable!("index within tree size"),
        }
    }
}

/// Copy of `t` with pre-order node `i` replaced by `new`.
pub(crate) fn replace(t: &Term, i: usize, new: Term) -> Term {
    if i == 0 {
        return new;
    }
    match t {
        Term::Bin(op, a, b) => {
            let left = a.size();
            if i <= left {
                Term::Bin(*op, Box::new(replace(a, i - 1, new)), b.clone())
            } else {
                Term::Bin(*op, a.clone(), Box::new(replace(b, i - 1 - left, new)))
            }
        }
        _ => unreachable!("index within tree size"),
    }
}

/// Changes the label of one node, keeping its arity.
pub(crate) fn point_mutate(t: &Term, i: usize, shape: &Shape, rng: &mut Rng) -> Term {
    let node = match subtree(t, i) {
        Term::Bin(_, a, b) => Term::Bin(shape.op(rng), a.clone(), b.clone()),
        _ => shape.leaf(rng),
    };
    replace(t, i, node)
}

/// Shifts one constant by ±1 within range; `None` if `t` has no constant.
pub(crate) fn perturb_constant(t: &Term, shape: &Shape, rng: &mut Rng) -> Option<Term> {
    let consts: alloc::vec::Vec<usize> = (0..t.size())
        .filter(|&i| matches!(subtree(t, i), Term::Const(_)))
        .collect();
    if consts.is_empty() {
        return None;
    }
    let i = consts[rng.random_range(0..consts.len())];
    let Term::Const(c) = subtree(t, i) else { unreachable!() };
    let step = if rng.random_bool(0.5) { 1 } else { -1 };
    let v = (c + step).clamp(-shape.const_range, shape.const_range);
    Some(replace(t, i, Term::Const(v)))
}
