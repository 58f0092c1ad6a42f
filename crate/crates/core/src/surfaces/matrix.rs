use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::TriangulatedSurface;

/// Column-major sparse integer matrix; each column lists `(row, value)` with
/// rows strictly increasing and values nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, columns: vec![Vec::new(); cols] }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, i64)]) -> Self {
        let mut m = SparseMatrix::zeros(rows, cols);
        for &(r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            let col = &mut m.columns[c];
            match col.binary_search_by_key(&r, |e| e.0) {
                Ok(k) => col[k].1 += v,
                Err(k) => col.insert(k, (r, v)),
            }
        }
        for col in &mut m.columns {
            col.retain(|e| e.1 != 0);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut trips = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    trips.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(n_rows, n_cols, &trips)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[(usize, i64)] {
        &self.columns[c]
    }

    pub fn columns(&self) -> &[Vec<(usize, i64)>] {
        &self.columns
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        let col = &self.columns[c];
        col.binary_search_by_key(&r, |e| e.0).map_or(0, |k| col[k].1)
    }

    /// `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, i64)> {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            d[r][c] = v;
        }
        d
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut trips = Vec::new();
        for (c, col) in other.columns.iter().enumerate() {
            let mut acc = vec![0i64; self.rows];
            for &(k, v) in col {
                for &(r, w) in &self.columns[k] {
                    acc[r] += v * w;
                }
            }
            trips.extend(acc.iter().enumerate().filter(|e| *e.1 != 0).map(|(r, &v)| (r, c, v)));
        }
        SparseMatrix::from_triplets(self.rows, other.cols, &trips)
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }
}

/// The two oriented boundary maps of a surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMatrices {
    /// `V × E`.
    pub d1: SparseMatrix,
    /// `E × F`.
    pub d2: SparseMatrix,
}

/// Edge `(u, v)` with `u < v` maps to `v - u`; triangle `(a, b, c)` maps to
/// `[a,b] + [b,c] + [c,a]` with each oriented edge rewritten low to high.
pub fn boundary_matrices(surface: &TriangulatedSurface) -> BoundaryMatrices {
    let v = surface.vertex_count();
    let edges = surface.edges();
    let tris = surface.triangles();
    let mut t1 = Vec::with_capacity(2 * edges.len());
    for (j, e) in edges.iter().enumerate() {
        t1.push((e[0] as usize, j, -1));
        t1.push((e[1] as usize, j, 1));
    }
    let mut t2 = Vec::with_capacity(3 * tris.len());
    for (j, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (x, y) = (t[k], t[(k + 1) % 3]);
            let row = surface.edge_index(x, y).expect("triangle edge is in the edge list");
            t2.push((row, j, if x < y { 1 } else { -1 }));
        }
    }
    BoundaryMatrices {
        d1: SparseMatrix::from_triplets(v, edges.len(), &t1),
        d2: SparseMatrix::from_triplets(edges.len(), tris.len(), &t2),
    }
}
