//! Random-walk cover times estimated through the Gaussian free field, with
//! Monte Carlo and exact-arithmetic verification of the identities that link
//! local times, Gaussian fields, electrical networks and Eulerian circuits.

pub mod error;
pub mod eulerian;
pub mod experiments;
pub mod fmt;
pub mod gff;
pub mod graphs;
pub mod isomorphism;
pub mod network;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use network::{load_network, Network, TreeShape, VertexOrdering};
