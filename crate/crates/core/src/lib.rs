//! β-adic van der Corput and Halton sequences over Pisot numeration systems.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod halton;
pub mod interval;
pub mod monna;
pub mod numeration;
pub mod par;
pub mod qmc;
pub mod roots;

pub use error::{Error, Result};
pub use interval::Interval;
pub use numeration::{DigitString, NumerationSystem};
