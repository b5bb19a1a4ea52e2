//! Sparse graphical designs.
//!
//! A graphical design is a set of nodes with nonnegative weights whose
//! weighted sum reproduces the node average of a chosen family of graph
//! Laplacian eigenvectors. This crate finds such designs by solving a linear
//! program with a simplex method: its vertices are supported on at most `|J|`
//! nodes, where `J` indexes the eigenvectors averaged exactly. The remaining
//! eigenvectors are averaged approximately through the choice of cost vector.
//!
//! The pipeline is
//!
//! 1. [`graph`]: build a weighted graph and its Laplacian `L = D - A`;
//! 2. [`spectral`]: eigendecompose `L`;
//! 3. [`design`]: choose `J` and a cost vector;
//! 4. [`lp`]: solve for a basic optimal design;
//! 5. [`evaluate`]: measure integration error and error bounds.
//!
//! [`ingest`] turns geolocated events into node functions, [`pipeline`]
//! strings the steps together and [`cli`] exposes them on the command line.

pub mod cache;
pub mod cli;
pub mod design;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod lp;
pub mod pipeline;
pub mod spectral;

pub use design::{DesignProblem, IndexSet, JStrategy, Objective, SignalSet};
pub use error::{Error, Result};
pub use graph::{LaplacianMatrix, LatLon, RawEdge, WeightedGraph};
pub use lp::{GraphicalDesign, StandardFormLP};
pub use spectral::SpectralBasis;
