//! Collective-spin witness of GHZ-type genuine multipartite entanglement.
//!
//! An ensemble of spins with half-integer total spin `K/2` is measured along
//! `K` equally spaced in-plane directions; the probability of a positive
//! outcome exceeds `1/2 [1 + 2^-K C(K-1, (K-1)/2)]` only for states that are
//! entangled across every bipartition. This crate builds the witness observable,
//! evaluates every bound exactly, cross-checks them with independent numerical
//! oracles, and simulates the measurement rounds.

pub mod classical;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod protocol;
pub mod separable;
pub mod spin;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
