//! Signature matrix design for overloaded synchronous CDMA.
//!
//! The crate models the channel `Y = A X + N`, evaluates signature matrices
//! by capacity, bit error rate and distance-based criteria, searches for good
//! matrices with a genetic algorithm or particle swarm, and enlarges small
//! matrices with the Kronecker product for low-complexity decoding.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod enlarge;
pub mod error;
pub mod experiment;
pub mod io;
pub mod matrix;
pub mod mc;
pub mod optimize;
pub mod registry;
pub mod system;

pub use error::{Error, Result};
pub use matrix::{Alphabet, SignatureMatrix};
