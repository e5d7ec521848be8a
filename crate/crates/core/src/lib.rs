//! Computational geometry of dense `PG(n-1,2)`-free binary matroids.
//!
//! Points of `PG(r-1, 2)` are the nonzero `r`-bit words, with bit `i` the
//! `i`-th coordinate. A matroid is given by its ground set `E`, a
//! [`PointSet`] in a fixed ambient geometry.

pub mod ambient;
pub mod constructions;
pub mod error;
pub mod matroid;
pub mod pointset;
pub mod rational;
pub mod report;
pub mod search;
pub mod spectral;
pub mod structure;
pub mod sweep;
pub mod thresholds;

pub use ambient::{
    closure, dot, enumerate_flats, flat_points, hyperplane_of, rank_of, AmbientGeometry, Flat, GfVector, MAX_RANK,
};
pub use error::{Error, Result};
pub use matroid::{
    critical_number, critical_number_with, is_pg_free, matroid_rank, restrict_to_flat, triangle_count_naive,
    CoordinateMap, CriticalNumber, FreenessWitness,
};
pub use pointset::PointSet;
pub use rational::Rational;
pub use report::{analyze, AnalysisReport};
pub use search::SearchLimit;
pub use spectral::{triangle_count_spectral, uniformity, walsh_hadamard, Spectrum, UniformityReport};
pub use structure::{cone, find_triangle_free_flat, DescentTrace, Strategy, StructureResult};
pub use sweep::{run_sweep, run_sweep_with_workers, Check, CheckTally, SweepConfig, SweepMode, SweepOutcome};
