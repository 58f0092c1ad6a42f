use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::{Component, SurfaceKind, TriangulatedSurface};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// Generates a random closed surface of the given kind.
///
/// `size` is the number of sample points for a sphere and the side of the
/// square grid for a torus or Klein bottle.
pub fn generate_surface(kind: SurfaceKind, size: usize, seed: u64) -> Result<TriangulatedSurface> {
    match kind {
        SurfaceKind::Sphere => sphere(size, seed),
        SurfaceKind::Torus | SurfaceKind::KleinBottle => generate_grid_surface(kind, size, size, seed),
        SurfaceKind::DisjointUnion => Err(Error::param(
            "disjoint unions are built with disjoint_union, not generate_surface",
        )),
    }
}

/// Torus or Klein bottle on a `rows × cols` grid with random diagonals and
/// random validity-preserving edge flips.
pub fn generate_grid_surface(
    kind: SurfaceKind,
    rows: usize,
    cols: usize,
    seed: u64,
) -> Result<TriangulatedSurface> {
    let klein = match kind {
        SurfaceKind::Torus => false,
        SurfaceKind::KleinBottle => true,
        _ => return Err(Error::param(format!("{kind} is not a grid surface"))),
    };
    if rows < 3 || cols < 3 {
        return Err(Error::param(format!("grid {rows}x{cols} is below the 3x3 minimum")));
    }
    let mut rng = rng::stream(seed, kind.name());
    let mut triangles = grid_triangles(rows, cols, klein, &mut rng);
    let flips = rows * cols;
    for _ in 0..flips {
        try_random_flip(&mut triangles, &mut rng);
    }
    let n = rows * cols;
    let component = Component {
        kind,
        orientable: !klein,
        genus: (!klein).then_some(1),
        coherent: !klein,
        vertex_start: 0,
        vertex_count: n,
    };
    TriangulatedSurface::from_triangles(kind, n, triangles, vec![component])
}

fn grid_triangles(rows: usize, cols: usize, klein: bool, rng: &mut Rng) -> Vec<[u32; 3]> {
    // Crossing the seam j = cols lands on column 0 with the row reflected for
    // the Klein bottle.
    let vid = |i: usize, j: usize| -> u32 {
        let i = i % rows;
        if j == cols {
            let i = if klein { (rows - i) % rows } else { i };
            (i * cols) as u32
        } else {
            (i * cols + j) as u32
        }
    };
    let mut out = Vec::with_capacity(2 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let a = vid(i, j);
            let b = vid(i, j + 1);
            let c = vid(i + 1, j + 1);
            let d = vid(i + 1, j);
            if rng.random::<bool>() {
                out.push([a, b, c]);
                out.push([a, c, d]);
            } else {
                out.push([a, b, d]);
                out.push([b, c, d]);
            }
        }
    }
    out
}

/// Replaces the diagonal `uv` of the quad `u a v b` (formed by two triangles)
/// with `ab`. Keeps orientations and the surface valid.
fn try_random_flip(tris: &mut [[u32; 3]], rng: &mut Rng) -> bool {
    let mut incident: BTreeMap<[u32; 2], Vec<usize>> = BTreeMap::new();
    let mut degree: BTreeMap<u32, usize> = BTreeMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (x, y) = (t[k], t[(k + 1) % 3]);
            incident.entry([x.min(y), x.max(y)]).or_default().push(ti);
        }
    }
    for e in incident.keys() {
        *degree.entry(e[0]).or_default() += 1;
        *degree.entry(e[1]).or_default() += 1;
    }
    let pick = rng.random_range(0..incident.len());
    let (&[u, v], ts) = incident.iter().nth(pick).expect("index in range");
    let (t0, t1) = (ts[0], ts[1]);
    if degree[&u] <= 3 || degree[&v] <= 3 {
        return false;
    }
    let opposite = |t: &[u32; 3]| *t.iter().find(|&&x| x != u && x != v).expect("triangle");
    let (a, b) = (opposite(&tris[t0]), opposite(&tris[t1]));
    if a == b || incident.contains_key(&[a.min(b), a.max(b)]) {
        return false;
    }
    let rot = |t: [u32; 3], apex: u32| -> [u32; 3] {
        let k = t.iter().position(|&x| x == apex).expect("apex");
        [t[(k + 1) % 3], t[(k + 2) % 3], t[k]]
    };
    // Read t0 as (x, y, a). The quad is x -> b -> y -> a in t0's orientation;
    // on a non-orientable seam t1 may disagree, which the surface tolerates.
    let r0 = rot(tris[t0], a);
    let (x, y) = (r0[0], r0[1]);
    tris[t0] = [a, x, b];
    tris[t1] = [b, y, a];
    true
}

fn sphere(size: usize, seed: u64) -> Result<TriangulatedSurface> {
    if size < 4 {
        return Err(Error::param(format!("sphere needs at least 4 points, got {size}")));
    }
    let mut rng = rng::stream(seed, "sphere");
    let points: Vec<[f64; 3]> = (0..size)
        .map(|_| loop {
            let p: [f64; 3] = [
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            ];
            let norm = libm::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            if norm > 1e-9 {
                break [p[0] / norm, p[1] / norm, p[2] / norm];
            }
        })
        .collect();
    let triangles = convex_hull(&points)?;
    let component = Component {
        kind: SurfaceKind::Sphere,
        orientable: true,
        genus: Some(0),
        coherent: true,
        vertex_start: 0,
        vertex_count: size,
    };
    TriangulatedSurface::from_triangles(SurfaceKind::Sphere, size, triangles, vec![component])
}

fn orient(a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
}

const HULL_EPS: f64 = 1e-12;

/// Incremental convex hull; faces are returned counter-clockwise seen from outside.
fn convex_hull(p: &[[f64; 3]]) -> Result<Vec<[u32; 3]>> {
    if orient(p[0], p[1], p[2], p[3]).abs() < HULL_EPS {
        return Err(Error::Generation("initial hull points are coplanar".into()));
    }
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (f, d) in [([0, 1, 2], 3), ([0, 1, 3], 2), ([0, 2, 3], 1), ([1, 2, 3], 0)] {
        if orient(p[f[0]], p[f[1]], p[f[2]], p[d]) > 0.0 {
            faces.push([f[0], f[2], f[1]]);
        } else {
            faces.push(f);
        }
    }
    for i in 4..p.len() {
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| orient(p[f[0]], p[f[1]], p[f[2]], p[i]) > HULL_EPS)
            .collect();
        if !visible.iter().any(|&v| v) {
            return Err(Error::Generation(format!("point {i} is not on the hull")));
        }
        let hidden_edges: BTreeSet<(usize, usize)> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .flat_map(|(f, _)| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .collect();
        let mut next = Vec::with_capacity(faces.len() + 2);
        let mut added = Vec::new();
        for (f, &v) in faces.iter().zip(&visible) {
            if !v {
                next.push(*f);
                continue;
            }
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if hidden_edges.contains(&(b, a)) {
                    added.push([a, b, i]);
                }
            }
        }
        next.extend(added);
        faces = next;
    }
    Ok(faces
        .into_iter()
        .map(|f| [f[0] as u32, f[1] as u32, f[2] as u32])
        .collect())
}

/// Disjoint union with shifted index sets; the boundary matrices of the
/// result are block-diagonal in part order.
pub fn disjoint_union(parts: &[TriangulatedSurface]) -> Result<TriangulatedSurface> {
    if parts.is_empty() {
        return Err(Error::param("disjoint union of zero parts"));
    }
    let mut triangles = Vec::new();
    let mut components = Vec::new();
    let mut offset = 0usize;
    for part in parts {
        let shift = offset as u32;
        triangles.extend(
            part.triangles()
                .iter()
                .map(|t| [t[0] + shift, t[1] + shift, t[2] + shift]),
        );
        components.extend(part.components().iter().map(|c| Component {
            vertex_start: c.vertex_start + offset,
            ..c.clone()
        }));
        offset += part.vertex_count();
    }
    TriangulatedSurface::from_triangles(SurfaceKind::DisjointUnion, offset, triangles, components)
}
