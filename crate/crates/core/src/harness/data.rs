use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prover::{PremiseGroup, PremiseSet};
use crate::rng::{self, Rng};
use crate::surfaces::{disjoint_union, generate_surface, make_datapoint, Datapoint, SurfaceKind, TriangulatedSurface};

/// The four dataset compositions with their paired premise groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DatasetId {
    D0,
    D1,
    D2,
    D3,
}

impl DatasetId {
    pub const ALL: [DatasetId; 4] = [DatasetId::D0, DatasetId::D1, DatasetId::D2, DatasetId::D3];

    pub fn name(self) -> &'static str {
        match self {
            DatasetId::D0 => "D0",
            DatasetId::D1 => "D1",
            DatasetId::D2 => "D2",
            DatasetId::D3 => "D3",
        }
    }

    /// Classes in equal numbers; unions are built from the connected classes
    /// listed before them.
    pub fn classes(self) -> &'static [SurfaceKind] {
        use SurfaceKind::*;
        match self {
            DatasetId::D0 => &[Sphere, Torus],
            DatasetId::D1 => &[Sphere, Torus, KleinBottle],
            DatasetId::D2 => &[Sphere, Torus, DisjointUnion],
            DatasetId::D3 => &[Sphere, Torus, KleinBottle, DisjointUnion],
        }
    }

    pub fn premise_groups(self) -> &'static [PremiseGroup] {
        use PremiseGroup::*;
        match self {
            DatasetId::D0 => &[P0, P1, P2],
            DatasetId::D1 => &[P0, P1],
            DatasetId::D2 | DatasetId::D3 => &[P0],
        }
    }

    pub fn premises(self) -> PremiseSet {
        PremiseSet::from_groups(self.premise_groups())
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<DatasetId> {
        DatasetId::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::config(format!("unknown dataset `{s}`")))
    }
}

/// One generated surface together with how it was made.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub kind: SurfaceKind,
    pub seed: u64,
    /// Sphere sample count or grid side; for unions, the part count.
    pub size: usize,
    pub surface: TriangulatedSurface,
    pub datapoint: Datapoint,
}

/// A normal distribution rounded and clipped to `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeRange {
    pub mean: f64,
    pub sd: f64,
    pub min: usize,
    pub max: usize,
}

impl SizeRange {
    fn sample(&self, r: &mut Rng) -> usize {
        let x: f64 = Normal::new(self.mean, self.sd).expect("validated sd").sample(r);
        (libm::round(x) as i64).clamp(self.min as i64, self.max as i64) as usize
    }

    fn validate(&self, name: &str, floor: usize) -> Result<()> {
        if !(self.sd > 0.0 && self.sd.is_finite() && self.mean.is_finite()) {
            return Err(Error::config(format!("{name}: mean and sd must be finite, sd positive")));
        }
        if self.min < floor || self.min > self.max {
            return Err(Error::config(format!("{name}: need {floor} <= min <= max")));
        }
        Ok(())
    }
}

/// Size parameters of generated surfaces: sample count for spheres, grid
/// side for tori and Klein bottles. Union parts are drawn smaller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizeModel {
    pub sphere: SizeRange,
    pub grid: SizeRange,
    pub sphere_part: SizeRange,
    pub grid_part: SizeRange,
    pub min_parts: usize,
    pub max_parts: usize,
}

impl Default for SizeModel {
    fn default() -> Self {
        SizeModel {
            sphere: SizeRange { mean: 36.0, sd: 10.0, min: 12, max: 60 },
            grid: SizeRange { mean: 8.0, sd: 2.0, min: 4, max: 12 },
            sphere_part: SizeRange { mean: 18.0, sd: 5.0, min: 8, max: 30 },
            grid_part: SizeRange { mean: 5.0, sd: 1.0, min: 3, max: 8 },
            min_parts: 2,
            max_parts: 3,
        }
    }
}

impl SizeModel {
    pub fn validate(&self) -> Result<()> {
        let sphere = SurfaceKind::Sphere.min_size();
        let grid = SurfaceKind::Torus.min_size();
        self.sphere.validate("sphere", sphere)?;
        self.grid.validate("grid", grid)?;
        self.sphere_part.validate("sphere_part", sphere)?;
        self.grid_part.validate("grid_part", grid)?;
        if self.min_parts < 2 || self.min_parts > self.max_parts {
            return Err(Error::config("unions need 2 <= min_parts <= max_parts"));
        }
        Ok(())
    }

    fn range(&self, kind: SurfaceKind, part: bool) -> &SizeRange {
        match (kind, part) {
            (SurfaceKind::Sphere, false) => &self.sphere,
            (SurfaceKind::Sphere, true) => &self.sphere_part,
            (_, false) => &self.grid,
            (_, true) => &self.grid_part,
        }
    }
}

/// Generates one surface of `kind`; union parts come from `part_kinds`.
pub fn generate_sample(kind: SurfaceKind, part_kinds: &[SurfaceKind], sizes: &SizeModel, seed: u64) -> Result<Sample> {
    sizes.validate()?;
    let mut r = rng::stream(seed, "sample-size");
    let (size, surface) = if kind == SurfaceKind::DisjointUnion {
        if part_kinds.is_empty() {
            return Err(Error::param("a union needs part kinds"));
        }
        let n = r.random_range(sizes.min_parts..=sizes.max_parts);
        let parts = (0..n)
            .map(|i| {
                let k = part_kinds[r.random_range(0..part_kinds.len())];
                generate_surface(k, sizes.range(k, true).sample(&mut r), rng::derive(seed, i as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        (n, disjoint_union(&parts)?)
    } else {
        let size = sizes.range(kind, false).sample(&mut r);
        (size, generate_surface(kind, size, seed)?)
    };
    let datapoint = make_datapoint(&surface)?;
    Ok(Sample { kind, seed, size, surface, datapoint })
}

/// `per_class` surfaces of every class of `id`, class by class. Each surface
/// has its own seed derived from `seed`, the class and its index.
pub fn generate_dataset(id: DatasetId, per_class: usize, sizes: &SizeModel, seed: u64) -> Result<Vec<Sample>> {
    if per_class == 0 {
        return Err(Error::param("per_class must be positive"));
    }
    let parts: Vec<SurfaceKind> =
        id.classes().iter().copied().filter(|&k| k != SurfaceKind::DisjointUnion).collect();
    let mut out = Vec::with_capacity(per_class * id.classes().len());
    for &kind in id.classes() {
        let class_seed = rng::derive(seed, rng::tag(kind.name()));
        for i in 0..per_class {
            out.push(generate_sample(kind, &parts, sizes, rng::derive(class_seed, i as u64))?);
        }
    }
    Ok(out)
}

pub fn datapoints(samples: &[Sample]) -> Vec<Datapoint> {
    samples.iter().map(|s| s.datapoint).collect()
}
