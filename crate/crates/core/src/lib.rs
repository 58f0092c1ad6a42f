//! Multi-agent conjecture generation over invariants of triangulated surfaces.
//!
//! The crate is `no_std` (with `alloc`) and carries every algorithmic piece:
//!
//! * [`surfaces`]: random closed surfaces, oriented boundary matrices, exact ranks
//!   and the ground-truth Betti numbers / Euler characteristic.
//! * [`statements`]: the typed expression language over the eight matrix
//!   statistics, its text grammar, canonical atomic formulae and concept detection.
//! * [`regression`]: the two-stage genetic symbolic regression that plays the
//!   conjecturing agent's search engine.
//! * [`prover`]: a sound, budget-limited decision procedure that assigns the
//!   provability score, plus non-degeneracy checks and Lean 4 export.
//! * [`marl`]: the two-agent environment and a MADDPG trainer.
//! * [`harness`]: datasets, model ablations, metrics and cluster-bootstrap statistics.
//!
//! File formats, configuration files and the command line live in the `forge` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod features;
pub mod harness;
pub mod linalg;
pub mod marl;
pub mod prover;
pub mod regression;
pub mod rng;
pub mod statements;
pub mod surfaces;

pub use error::{Error, Result};
pub use features::{Coord, Feature, FeatureVector};
