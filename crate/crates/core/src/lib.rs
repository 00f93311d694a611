//! Numerical laboratory for adapted complex structures on tangent bundles,
//! the two-patch twistor space built from a complexified connection, Nahm
//! flows of jet vector fields for flat connections, and the hyperkaehler form
//! triple at points of the real locus.

// Index loops mirror tensor notation; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod adapted;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod metric;
pub mod nahm;
pub mod series;
pub mod twistor;

pub use error::{Error, Result};
