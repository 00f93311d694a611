//! Jets (truncated multivariate power series) and the expression trees they
//! run through. Everything downstream that needs derivatives gets them by
//! seeding jets, never by symbolic differentiation.

mod expr;
mod jet;

pub use expr::{Expr, Scalar};
pub use jet::{compose, invert, Jet, Layout, ZERO_TERM_TOL};
