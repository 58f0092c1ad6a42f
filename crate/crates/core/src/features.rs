//! The eight matrix statistics every datapoint carries.

use core::fmt;
use serde::{Deserialize, Serialize};

/// A feature variable of the statement language.
///
/// `W1` and `H2` both measure the number of edges; they are kept apart in the
/// surface syntax and merged into [`Coord::E`] by every algebraic routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    R1,
    R2,
    N1,
    N2,
    H1,
    W1,
    H2,
    W2,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::R1,
        Feature::R2,
        Feature::N1,
        Feature::N2,
        Feature::H1,
        Feature::W1,
        Feature::H2,
        Feature::W2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Feature::R1 => "r1",
            Feature::R2 => "r2",
            Feature::N1 => "n1",
            Feature::N2 => "n2",
            Feature::H1 => "h1",
            Feature::W1 => "w1",
            Feature::H2 => "h2",
            Feature::W2 => "w2",
        }
    }

    pub fn from_name(s: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn coord(self) -> Coord {
        match self {
            Feature::R1 => Coord::R1,
            Feature::R2 => Coord::R2,
            Feature::N1 => Coord::N1,
            Feature::N2 => Coord::N2,
            Feature::H1 => Coord::V,
            Feature::W1 | Feature::H2 => Coord::E,
            Feature::W2 => Coord::F,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Algebraic coordinates: the features with `w1` and `h2` identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coord {
    R1,
    R2,
    N1,
    N2,
    V,
    E,
    F,
}

impl Coord {
    pub const COUNT: usize = 7;
    pub const ALL: [Coord; 7] = [
        Coord::R1,
        Coord::R2,
        Coord::N1,
        Coord::N2,
        Coord::V,
        Coord::E,
        Coord::F,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Representative feature used when printing canonical forms.
    pub fn feature(self) -> Feature {
        match self {
            Coord::R1 => Feature::R1,
            Coord::R2 => Feature::R2,
            Coord::N1 => Feature::N1,
            Coord::N2 => Feature::N2,
            Coord::V => Feature::H1,
            Coord::E => Feature::W1,
            Coord::F => Feature::W2,
        }
    }
}

/// Values of the eight features, indexed by [`Feature::index`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureVector(pub [i64; 8]);

impl FeatureVector {
    pub fn get(&self, f: Feature) -> i64 {
        self.0[f.index()]
    }

    /// Builds the vector from dimensions and ranks using rank-nullity.
    pub fn from_dims(v: i64, e: i64, f: i64, r1: i64, r2: i64) -> Self {
        FeatureVector([r1, r2, e - r1, f - r2, v, e, e, f])
    }

    pub fn coord(&self, c: Coord) -> i64 {
        self.get(c.feature())
    }

    pub fn b0(&self) -> i64 {
        self.get(Feature::H1) - self.get(Feature::R1)
    }

    pub fn b1(&self) -> i64 {
        self.get(Feature::N1) - self.get(Feature::R2)
    }

    pub fn b2(&self) -> i64 {
        self.get(Feature::N2)
    }

    pub fn chi(&self) -> i64 {
        self.get(Feature::H1) - self.get(Feature::W1) + self.get(Feature::W2)
    }

    /// Structural constraints every realizable pair of boundary matrices meets:
    /// nonnegativity, rank-nullity, ranks bounded by both dimensions, `w1 = h2`.
    pub fn is_structurally_feasible(&self) -> bool {
        let g = |f| self.get(f);
        self.0.iter().all(|&x| x >= 0)
            && g(Feature::W1) == g(Feature::H2)
            && g(Feature::R1) + g(Feature::N1) == g(Feature::W1)
            && g(Feature::R2) + g(Feature::N2) == g(Feature::W2)
            && g(Feature::R1) <= g(Feature::H1)
            && g(Feature::R2) <= g(Feature::H2)
    }
}
