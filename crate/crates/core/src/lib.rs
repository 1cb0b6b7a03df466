//! Hypergraph benchmark generator with power-law degrees, power-law
//! community sizes and ground-truth communities, plus modularity-based
//! evaluation.
//!
//! ```
//! use habcd::{generate, GeneratorParams};
//!
//! let mut params = GeneratorParams::standard(1000);
//! params.seed = 42;
//! let out = generate(&params).unwrap();
//! assert_eq!(out.hypergraph.n, 1000);
//! assert_eq!(out.assignment.sizes.total(), 1000);
//! ```

pub mod assignment;
pub mod cli;
pub mod config;
pub mod error;
mod fenwick;
pub mod generation;
pub mod io;
pub mod metrics;
pub mod rewiring;
pub mod sampling;

pub use assignment::{CommunityAssignment, DegreeProfile};
pub use config::{GeneratorParams, ValidationError, ValidationErrors, WeightMatrix, WeightModel};
pub use error::{Error, Result};
pub use generation::{generate, Generated, Hyperedge, Hypergraph};
pub use metrics::{graph_modularity, hypergraph_modularity, two_section, Partition, TypeWeights};
