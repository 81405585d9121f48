pub mod boundary;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod group;
pub mod oracle;
pub mod schreier;

pub use boundary::{EvPeriodicWord, OrbitPoint};
pub use error::{Error, Result};
pub use graph::{delta, isomorphic, BallSource, DyadicDistance, MarkedGraph};
pub use group::{Bit, Generator, GroupElement, Klein};
pub use oracle::SubgroupOracle;
pub use schreier::{coset_graph_ball, sheet_partition, GraphKind, ImplicitGraph, Sheet, Vertex};
