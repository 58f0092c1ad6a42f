use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::Zero;

use super::SparseMatrix;

/// Rank over the rationals.
///
/// Runs a fraction-free sparse column reduction (pivot on the lowest nonzero
/// row, content divided out after every step) in checked `i64`; on overflow
/// it restarts with dense Bareiss elimination over big integers.
pub fn exact_rank(m: &SparseMatrix) -> usize {
    sparse_rank(m).unwrap_or_else(|| bareiss_rank(&m.to_dense()))
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sparse_rank(m: &SparseMatrix) -> Option<usize> {
    let mut pivots: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    for col in m.columns() {
        let mut v = col.clone();
        while let Some(&(low, val)) = v.last() {
            let Some(p) = pivots.get(&low) else {
                pivots.insert(low, v);
                break;
            };
            let pv = p.last().expect("pivot column is nonempty").1;
            v = combine(&v, pv, p, val)?;
        }
    }
    Some(pivots.len())
}

/// `pv * v - val * p` with the content removed; the lowest entry cancels.
fn combine(v: &[(usize, i64)], pv: i64, p: &[(usize, i64)], val: i64) -> Option<Vec<(usize, i64)>> {
    let g = gcd(pv, val);
    let (a, b) = (pv / g, val / g);
    let mut out = Vec::with_capacity(v.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < p.len() {
        let (row, x) = match (v.get(i), p.get(j)) {
            (Some(&(ri, vi)), Some(&(rj, pj))) if ri == rj => {
                i += 1;
                j += 1;
                (ri, a.checked_mul(vi)?.checked_sub(b.checked_mul(pj)?)?)
            }
            (Some(&(ri, vi)), Some(&(rj, _))) if ri < rj => {
                i += 1;
                (ri, a.checked_mul(vi)?)
            }
            (Some(&(ri, vi)), None) => {
                i += 1;
                (ri, a.checked_mul(vi)?)
            }
            (_, Some(&(rj, pj))) => {
                j += 1;
                (rj, b.checked_mul(pj)?.checked_neg()?)
            }
            (None, None) => unreachable!(),
        };
        if x != 0 {
            out.push((row, x));
        }
    }
    let content = out.iter().fold(0, |g, e| gcd(g, e.1));
    if content > 1 {
        for e in &mut out {
            e.1 /= content;
        }
    }
    Some(out)
}

/// Dense fraction-free Gaussian elimination over arbitrary-precision integers.
pub fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let n_rows = a.len();
    let n_cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = BigInt::from(1);
    for c in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(p) = (rank..n_rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..n_rows {
            for j in c + 1..n_cols {
                let x = &a[rank][c] * &a[i][j] - &a[i][c] * &a[rank][j];
                a[i][j] = x / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}
