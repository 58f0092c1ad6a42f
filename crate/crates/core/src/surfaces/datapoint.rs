use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{boundary_matrices, exact_rank, SurfaceKind, TriangulatedSurface};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Ground-truth homology of a datapoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub b0: i64,
    pub b1: i64,
    pub b2: i64,
    pub chi: i64,
    pub kind: SurfaceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Datapoint {
    pub features: FeatureVector,
    pub labels: Labels,
}

impl Datapoint {
    pub fn v(&self) -> i64 {
        self.features.coord(crate::Coord::V)
    }

    pub fn e(&self) -> i64 {
        self.features.coord(crate::Coord::E)
    }

    pub fn f(&self) -> i64 {
        self.features.coord(crate::Coord::F)
    }
}

pub fn make_datapoint(surface: &TriangulatedSurface) -> Result<Datapoint> {
    let m = boundary_matrices(surface);
    let v = m.d1.rows() as i64;
    let e = m.d1.cols() as i64;
    let f = m.d2.cols() as i64;
    let r1 = exact_rank(&m.d1) as i64;
    let r2 = exact_rank(&m.d2) as i64;
    let features = FeatureVector::from_dims(v, e, f, r1, r2);
    let (b0, b1, b2) = (features.b0(), features.b1(), features.b2());
    let chi = v - e + f;
    if chi != b0 - b1 + b2 {
        return Err(Error::Consistency(format!(
            "V - E + F = {chi} but b0 - b1 + b2 = {}",
            b0 - b1 + b2
        )));
    }
    if !features.is_structurally_feasible() {
        return Err(Error::Consistency(format!("infeasible features {:?}", features.0)));
    }
    Ok(Datapoint { features, labels: Labels { b0, b1, b2, chi, kind: surface.kind() } })
}

/// Connected components of the 1-skeleton.
pub fn count_components(surface: &TriangulatedSurface) -> usize {
    let n = surface.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for e in surface.edges() {
        let (a, b) = (find(&mut parent, e[0] as usize), find(&mut parent, e[1] as usize));
        if a != b {
            parent[a] = b;
            count -= 1;
        }
    }
    count
}
