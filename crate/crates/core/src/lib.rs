// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod bethe;
pub mod csma;
pub mod error;
pub mod harness;
pub mod maxent;
pub mod oracle;
pub mod topology;

pub use error::{Error, Result};
