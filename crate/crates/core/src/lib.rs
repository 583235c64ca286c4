//! Ordered-tree edit distance under pluggable edit costs, cost learning from
//! labeled trees, and constructive checks of which metric properties the
//! distance inherits from its costs.

pub mod costs;
pub mod error;
pub mod experiment;
pub mod gesl;
pub mod lvq;
pub mod reference;
pub mod synthetic;
pub mod ted;
pub mod trees;
pub mod verify;

pub use costs::{CostTable, EmbeddingMatrix, MetricAudit};
pub use error::{Error, Result};
pub use trees::{Alphabet, Dataset, Record, Symbol, Tree};

/// Matrix types in the public API come from this crate.
pub use nalgebra;
