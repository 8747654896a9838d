//! Quartet compatibility for complete and full multipartite quartet systems.
//!
//! The pipeline follows the two-phase decomposition: a *displaying* phase
//! builds an A-cut family displaying the input quartets block pair by block
//! pair, and a *laminarization* phase searches for equivalent representatives
//! forming a laminar family, which encodes the phylogenetic tree. A
//! brute-force oracle over exhaustively enumerated tree topologies backs
//! every verdict at desk scale, and a distance-matrix front end covers the
//! block-restricted-measurement use case.

pub mod bipartite;
pub mod cuts;
pub mod formats;
pub mod full_system;
pub mod gen;
pub mod ingest;
pub mod laminarize;
pub mod multipartite;
pub mod oracle;
pub mod quartet;
pub mod solver;
pub mod taxa;
pub mod tree;

pub use cuts::CutClass;
pub use quartet::{CompleteSystem, FullMultipartiteSystem, FullSystem, Quartet, QuartetKind};
pub use taxa::{Taxon, TaxonPartition, TaxonSet};
pub use tree::PhyloTree;
