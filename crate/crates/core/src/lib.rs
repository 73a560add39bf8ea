//! Curvatures supported on k-simplices of finite abstract simplicial
//! complexes, with exact Gauss-Bonnet and Poincaré-Hopf checks and wave /
//! isospectral deformations of the curvature.

pub mod cli;
pub mod complex;
pub mod curvature;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod morse;
pub mod spectral;
pub mod zoo;

pub use complex::{CoverStatus, FVector, Simplex, SimplicialComplex, Vertex};
pub use error::{Error, Result};
pub use graph::Graph;
