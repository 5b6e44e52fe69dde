//! Minor-embedding compiler for binary quadratic programs.
//!
//! A program graph, usually read from a quadratic form with `{0,1}`
//! coefficients, is mapped onto a hardware graph either directly (an
//! edge-preserving injection) or as a minor, where each program vertex
//! becomes a connected chain of hardware vertices. Minor embeddings are
//! produced by three routes: an exhaustive oracle for tiny instances, a
//! randomized shortest-path baseline, and a compilation game in which each
//! program vertex picks its own chain and pays for its size. Iterated best
//! response drives the game to a profile that is then certified as a pure
//! Nash equilibrium by enumerating unilateral deviations.

pub mod error;
pub mod game;
pub mod cmr;
pub mod compile_game;
pub mod embedding;
pub mod graph;
pub mod ising;

pub use error::{Error, Result};
pub use graph::{Graph, SteinerTree, Topology, VertexSet};
