//! Finite-dimensional models of quantum time: relational clocks, the
//! two-branch energy-lattice extension, decoherent histories, two-state
//! vectors and multi-time states, and fixed-point contour histories.

pub mod bauer;
pub mod error;
pub mod fpf;
pub mod histories;
pub mod linalg;
pub mod pw;
pub mod random;
pub mod tsvf;

pub use error::{Error, Result};
pub use linalg::{Operator, ProductSpace, StateVector, C64};
