//! Conventional and widely linear subspace-based channel estimation for
//! single-user SIMO flat-fading BPSK links.
//!
//! The crate covers the whole chain: channel and block generation
//! ([`channel`]), principal-eigenvector estimation ([`estimators`]), phase and
//! sign ambiguity resolution ([`ambiguity`]), closed-form MSE and probability
//! predictors ([`analysis`]), and a reproducible Monte Carlo harness
//! ([`harness`]) that checks the closed forms against simulation.

pub mod ambiguity;
pub mod analysis;
pub mod channel;
pub mod estimators;
pub mod harness;
pub mod numerics;
pub mod rng;
