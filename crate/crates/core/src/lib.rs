//! Peer learning: groups of off-policy agents that train side by side in
//! separate copies of a task, exchange action advice and learn whom to trust.

// `!(x > y)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod envs;
pub mod error;
pub mod harness;
pub mod learners;
pub mod peer;
pub mod plot;
pub mod rng;
pub mod types;
pub mod zoo;

pub use error::{PeerlabError, Result};
