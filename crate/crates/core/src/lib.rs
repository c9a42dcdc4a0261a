//! Numerical toolkit for metrical almost periodicity.
//!
//! Functions are described by [`FunctionDescriptor`]s and measured through
//! pseudometrics, Stepanov, Weyl and Besicovitch seminorms, epsilon-period
//! scans and convolution operators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod cli;
pub mod convops;
pub mod corpus;
pub mod error;
pub mod funcspace;
pub mod gennorms;
pub mod grid;
pub mod par;
pub mod periods;
pub mod pseudometrics;
pub mod quad;
pub mod verify;

pub use error::{MetapError, Result};
pub use funcspace::{FunctionDescriptor, Window};
pub use gennorms::Gauge;
pub use pseudometrics::{MetricFamily, PseudometricSpec};
