//! Exact analysis of margin-based surrogate losses for a discrete task
//! loss: Bayes risks as linear programs, polytope vertex enumeration and
//! consistency verdicts with witnesses.

mod error;
mod one_based;

pub mod arith;
pub mod consistency;
pub mod corpus;
pub mod document;
pub mod loss;
pub mod polytope;
pub mod risk;
pub mod transport;

pub use error::{Error, Result};
