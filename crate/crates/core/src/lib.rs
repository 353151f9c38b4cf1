//! Euclidean TSP laboratory: heuristics, exact solvers, hardness gadgets,
//! local simulators, copy analysis and breadth-first branch-and-bound.

pub mod analysis;
pub mod bnb;
pub mod error;
pub mod exact;
pub mod gadgets;
pub mod geometry;
pub mod heuristics;
pub mod instance;
pub mod localsim;
pub mod stats;
pub mod tour;

pub use error::{Error, Result};
pub use geometry::{Domain, Matching, Point, Topology};
pub use instance::{Instance, PlantRecord};
pub use tour::{Edge, PathSeq, Tour};
pub use heuristics::{EdgeConstraints, Heuristic};
