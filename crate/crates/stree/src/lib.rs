//! A dynamically built, balanced hierarchical clustering index for sparse
//! high-dimensional points.
//!
//! Every node of the tree is bounded by an isotropic ball (center plus
//! radius, never a coordinate box) and carries point count, mean, and
//! spread, all maintained incrementally as points arrive. Overloaded nodes
//! split by farthest-pair seeding or exhaustive enumeration; queries prune
//! subtrees through the ball bounds and return exactly what a linear scan
//! would. A text vectorization pipeline maps documents into a
//! 1024-dimensional semantic space that feeds the same index.
//!
//! The `parallel` feature (on by default) runs batch queries, batch
//! vectorization, and exhaustive split enumeration on a rayon pool;
//! disabling it leaves sequential fallbacks with identical results.

pub mod codec;
mod error;
pub mod geometry;
mod hash;
pub mod ingest;
pub mod point;
pub mod snapshot;
pub mod stats;
pub mod tree;
pub mod vectorize;

pub use error::Error;
pub use geometry::Ball;
pub use point::{SparsePoint, SparseVector};
pub use snapshot::{load_tree, save_tree};
pub use stats::StatSummary;
pub use tree::{
    select_subnode, AuditReport, ClusterSummary, InsertReport, NodeView, QueryStats, SplitMode,
    Tree, TreeConfig, Violation,
};
pub use vectorize::Lexicon;
