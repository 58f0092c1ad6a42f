//! Small exact linear algebra over the rationals.
//!
//! Used by the concept detector and the prover; matrices here have a handful of
//! rows and columns, so dense row reduction over big rationals is plenty.

use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(v: i128) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Reduced row echelon form in place; returns the pivot column of each nonzero row.
pub fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let (top, rest) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in top.iter_mut().zip(rest.iter()) {
                    *x = &*x - &factor * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Q>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// Solves `sum_j x_j * columns[j] = target`. Returns one solution if any exists.
pub fn solve_combination(columns: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let n = columns.len();
    let dim = target.len();
    let mut aug: Vec<Vec<Q>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Q> = columns.iter().map(|c| c[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Q::zero(); n];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = aug[row][n].clone();
    }
    Some(x)
}

/// Basis of `{x : sum_j x_j * columns[j] = 0}`.
pub fn kernel(columns: &[Vec<Q>], dim: usize) -> Vec<Vec<Q>> {
    let n = columns.len();
    let mut m: Vec<Vec<Q>> = (0..dim)
        .map(|i| columns.iter().map(|c| c[i].clone()).collect())
        .collect();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); n];
        v[free] = Q::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn is_integer(x: &Q) -> bool {
    x.is_integer()
}

pub fn abs_is_one(x: &Q) -> bool {
    x.abs().is_one()
}
