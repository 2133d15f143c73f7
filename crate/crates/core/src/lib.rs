//! Explicitly maintained single-linkage dendrograms over dynamic weighted
//! forests.
pub mod cartesian;
pub mod dendrogram;
pub mod error;
pub mod oracle;
pub mod queries;
pub mod rc_tree;
pub mod types;
pub mod updates;
pub use cartesian::{CartesianState, End};
pub use dendrogram::DendrogramState;
pub use error::{Error, Result};
pub use queries::ThresholdParam;
pub use rc_tree::RCForest;
pub use types::*;
pub use updates::{StarMergePlan, UpdateMode};
