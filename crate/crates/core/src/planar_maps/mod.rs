//! Random quadrangulations from labeled trees, with balls and hulls around
//! the distinguished vertex.

pub mod enumerate;
pub mod growth;
pub mod hull;
pub mod quad;
pub mod tree;

pub use hull::{hull_series, HullRow, HullSeries};
pub use quad::{schaeffer, Quadrangulation};
pub use tree::{LabeledTree, TreeVariant};
