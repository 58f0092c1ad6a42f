//! Closed triangulated surfaces and their homology ground truth.

mod datapoint;
mod generate;
mod matrix;
mod rank;

pub use datapoint::{count_components, make_datapoint, Datapoint, Labels};
pub use generate::{disjoint_union, generate_grid_surface, generate_surface};
pub use matrix::{boundary_matrices, BoundaryMatrices, SparseMatrix};
pub use rank::{bareiss_rank, exact_rank};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SurfaceKind {
    Sphere,
    Torus,
    KleinBottle,
    DisjointUnion,
}

impl SurfaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Torus => "torus",
            SurfaceKind::KleinBottle => "klein_bottle",
            SurfaceKind::DisjointUnion => "disjoint_union",
        }
    }

    pub fn min_size(self) -> usize {
        match self {
            SurfaceKind::Sphere => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One connected piece of a surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: SurfaceKind,
    pub orientable: bool,
    /// Genus for orientable pieces; informational only.
    pub genus: Option<u32>,
    /// Whether the stored triangle orders form a coherent orientation.
    pub coherent: bool,
    pub vertex_start: usize,
    pub vertex_count: usize,
}

/// A closed surface given combinatorially.
///
/// Edges are stored as `[low, high]` sorted lexicographically; triangles keep
/// the vertex order they were generated with, which carries their orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulatedSurface {
    kind: SurfaceKind,
    vertex_count: usize,
    edges: Vec<[u32; 2]>,
    triangles: Vec<[u32; 3]>,
    components: Vec<Component>,
}

impl TriangulatedSurface {
    /// Builds and validates a surface from its oriented triangles.
    pub fn from_triangles(
        kind: SurfaceKind,
        vertex_count: usize,
        triangles: Vec<[u32; 3]>,
        components: Vec<Component>,
    ) -> Result<Self> {
        let mut edge_set = BTreeSet::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edge_set.insert([a.min(b), a.max(b)]);
            }
        }
        let surface = TriangulatedSurface {
            kind,
            vertex_count,
            edges: edge_set.into_iter().collect(),
            triangles,
            components,
        };
        surface.validate()?;
        Ok(surface)
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn edge_index(&self, a: u32, b: u32) -> Option<usize> {
        self.edges.binary_search(&[a.min(b), a.max(b)]).ok()
    }

    /// Checks the closed-surface invariants; generators call this before
    /// returning so an invalid complex never escapes.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::Generation(msg));
        let n = self.vertex_count as u32;
        let mut seen = BTreeSet::new();
        for t in &self.triangles {
            if t.iter().any(|&v| v >= n) {
                return bad(format!("triangle {t:?} has a vertex out of range"));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return bad(format!("triangle {t:?} is degenerate"));
            }
            let mut key = *t;
            key.sort_unstable();
            if !seen.insert(key) {
                return bad(format!("duplicate triangle {key:?}"));
            }
        }
        // every edge in exactly two triangles
        let mut incidence: BTreeMap<[u32; 2], Vec<(usize, bool)>> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                incidence.entry([a.min(b), a.max(b)]).or_default().push((ti, a < b));
            }
        }
        for (e, tris) in &incidence {
            if tris.len() != 2 {
                return bad(format!("edge {e:?} lies in {} triangles", tris.len()));
            }
        }
        if 3 * self.triangles.len() != 2 * self.edges.len() {
            return bad(format!("3F != 2E ({} vs {})", self.triangles.len(), self.edges.len()));
        }
        // vertex links are single cycles
        let mut link: Vec<Vec<[u32; 2]>> = alloc::vec![Vec::new(); self.vertex_count];
        for t in &self.triangles {
            for k in 0..3 {
                link[t[k] as usize].push([t[(k + 1) % 3], t[(k + 2) % 3]]);
            }
        }
        for (v, edges) in link.iter().enumerate() {
            if edges.len() < 3 {
                return bad(format!("vertex {v} has link of length {}", edges.len()));
            }
            if !is_single_cycle(edges) {
                return bad(format!("link of vertex {v} is not a single cycle"));
            }
        }
        // coherence claims
        let mut covered = 0;
        for c in &self.components {
            covered += c.vertex_count;
            if !c.coherent {
                continue;
            }
            let range = c.vertex_start as u32..(c.vertex_start + c.vertex_count) as u32;
            for (e, tris) in &incidence {
                if range.contains(&e[0]) && tris[0].1 == tris[1].1 {
                    return bad(format!("edge {e:?} breaks the claimed coherent orientation"));
                }
            }
        }
        if covered != self.vertex_count {
            return bad(format!(
                "components cover {covered} of {} vertices",
                self.vertex_count
            ));
        }
        Ok(())
    }
}

fn is_single_cycle(edges: &[[u32; 2]]) -> bool {
    let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &[a, b] in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.len() != edges.len() || adj.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = edges[0][0];
    let (mut prev, mut cur) = (start, adj[&start][0]);
    let mut steps = 1;
    while cur != start {
        let nb = &adj[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
        steps += 1;
        if steps > edges.len() {
            return false;
        }
    }
    steps == edges.len()
}
