//! Variable-exponent weighted Lebesgue and Morrey norms, Riesz potentials,
//! maximal operators and their commutators, Muckenhoupt-type weight
//! constants, and Hardy-type integral conditions, all on uniform grids.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exponent;
pub mod field;
pub mod grid;
pub mod hardy;
pub mod harness;
pub mod lebesgue;
pub mod morrey;
pub mod operators;
pub mod serde_ext;
pub mod weights;

pub use error::{Error, Result};
pub use exponent::{ExponentField, ExponentReport};
pub use field::ScalarField;
pub use grid::{Ball, Grid, Point, Region};
pub use lebesgue::{luxemburg_norm, modular, NormResult};
