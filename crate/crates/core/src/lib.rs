//! Information design over noisy channels.
//!
//! A sender commits to a signaling structure about a binary state; a receiver
//! observes the message (possibly through a noisy channel) and best replies.
//! The crate computes the sender-optimal structure under unconstrained,
//! single-use and block-coded transmission, the geometry of feasible posterior
//! splits, and a Monte Carlo random-coding simulator that checks the block
//! construction empirically.

pub mod channel;
pub mod coding;
pub mod error;
pub mod mac;
pub mod persuasion;
pub mod prob;
pub mod report;
pub mod splitting;

pub use error::{Error, Result};
