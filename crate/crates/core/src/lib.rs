//! Inverse mean curvature flow of star-shaped hypersurfaces in S³ and the
//! functionals and inequalities evaluated along it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod balance;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod oracle;
pub mod quadrature;
pub mod surface;

pub use error::{Error, Result};
