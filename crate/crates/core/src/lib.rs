// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod heisenberg;
pub mod numkit;
pub mod pendulum;
pub mod sl2flow;
pub mod srgeom;
pub mod verify;

pub use error::{Error, Result};
