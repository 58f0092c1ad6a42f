//! Exact Phase-I simplex over the rationals with Farkas certificates.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::{One, Signed, Zero};

use crate::linalg::Q;

/// Rows `a · x (= | ≤) b` over variables `x ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearSystem {
    pub n_vars: usize,
    pub equalities: Vec<(Vec<Q>, Q)>,
    pub inequalities: Vec<(Vec<Q>, Q)>,
}

/// Multipliers proving a [`LinearSystem`] has no nonnegative solution:
/// `y_eq` free, `y_le ≥ 0`, with `y·A ≥ 0` componentwise and `y·b < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Farkas {
    pub y_eq: Vec<Q>,
    pub y_le: Vec<Q>,
}

pub enum LpOutcome {
    Feasible(Vec<Q>),
    Infeasible(Farkas),
    /// Pivot budget ran out.
    Exhausted,
}

impl Farkas {
    pub fn verify(&self, sys: &LinearSystem) -> bool {
        if self.y_eq.len() != sys.equalities.len() || self.y_le.len() != sys.inequalities.len() {
            return false;
        }
        if self.y_le.iter().any(Signed::is_negative) {
            return false;
        }
        let mut comb = vec![Q::zero(); sys.n_vars];
        let mut rhs = Q::zero();
        let rows = sys.equalities.iter().zip(&self.y_eq).chain(sys.inequalities.iter().zip(&self.y_le));
        for ((a, b), y) in rows {
            for (c, v) in comb.iter_mut().zip(a) {
                *c += y * v;
            }
            rhs += y * b;
        }
        // y·A x = y·b with x ≥ 0 and (y·A) ≥ 0 forces y·b ≥ 0; inequality rows
        // only loosen this since y_le ≥ 0.
        comb.iter().all(|c| !c.is_negative()) && rhs.is_negative()
    }
}

/// Decides feasibility of `sys` with at most `max_pivots` pivots (Bland's rule).
pub fn feasibility(sys: &LinearSystem, max_pivots: u64, pivots: &mut u64) -> LpOutcome {
    let n = sys.n_vars;
    let n_eq = sys.equalities.len();
    let n_le = sys.inequalities.len();
    let m = n_eq + n_le;
    // columns: x (n), slacks (n_le), artificials (m), rhs
    let width = n + n_le + m + 1;
    let rhs_col = width - 1;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    let mut sign = Vec::with_capacity(m);
    for (i, (a, b)) in sys.equalities.iter().chain(&sys.inequalities).enumerate() {
        let mut row = vec![Q::zero(); width];
        row[..n].clone_from_slice(a);
        if i >= n_eq {
            row[n + i - n_eq] = Q::one();
        }
        row[rhs_col] = b.clone();
        let s = if b.is_negative() { -Q::one() } else { Q::one() };
        for x in row.iter_mut() {
            *x = &*x * &s;
        }
        row[n + n_le + i] = Q::one();
        sign.push(s);
        t.push(row);
    }
    // objective row: reduced costs of minimizing the artificial sum
    let mut obj = vec![Q::zero(); width];
    for j in n + n_le..n + n_le + m {
        obj[j] = Q::one();
    }
    for row in &t {
        for (o, x) in obj.iter_mut().zip(row) {
            *o -= x;
        }
    }
    for j in n + n_le..n + n_le + m {
        obj[j] = Q::zero();
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + n_le + i).collect();
    loop {
        let Some(enter) = (0..rhs_col).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Q)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[enter].is_positive() {
                let ratio = &row[rhs_col] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // unbounded cannot happen in phase I (objective bounded below by 0)
            break;
        };
        if *pivots >= max_pivots {
            return LpOutcome::Exhausted;
        }
        *pivots += 1;
        let inv = t[r][enter].recip();
        for x in t[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (x, p) in obj.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        basis[r] = enter;
    }
    // objective value is -obj[rhs]
    if obj[rhs_col].is_zero() {
        let mut x = vec![Q::zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = t[i][rhs_col].clone();
            }
        }
        return LpOutcome::Feasible(x);
    }
    // duals of the sign-adjusted rows are 1 - (reduced cost of artificial);
    // flip back to the original rows and negate to get the certificate.
    let y: Vec<Q> = (0..m)
        .map(|i| -((Q::one() - &obj[n + n_le + i]) * &sign[i]))
        .collect();
    let cert = Farkas { y_eq: y[..n_eq].to_vec(), y_le: y[n_eq..].to_vec() };
    debug_assert!(cert.verify(sys), "phase-I certificate failed verification");
    LpOutcome::Infeasible(cert)
}
