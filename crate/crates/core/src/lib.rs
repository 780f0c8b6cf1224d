//! Positive ground states of two-component Bose–Einstein condensates by
//! Newton–Noda type iterations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bec;
pub mod error;
pub mod grid;
pub mod linsolve;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};

