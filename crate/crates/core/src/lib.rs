//! Exact and sampled analysis of random oblivious transfer protocols built
//! from stateless two-party primitives.
//!
//! Every execution of a small protocol over a finite noisy primitive is
//! enumerated with exact rational weights. The stand-alone checks live in
//! [`verifier`]; [`ucharness`] compares the real world against a simulated
//! ideal world.

pub mod engine;
pub mod extract;
pub mod funcs;
pub mod prob;
pub mod protolib;
pub mod report;
pub mod sampling;
pub mod ucharness;
pub mod value;
pub mod verifier;

pub use prob::{Dist, JointDist, Prob};
pub use value::Value;
