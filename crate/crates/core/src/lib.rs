//! Exact analysis of information flows in state-dependent channels with
//! noisy feedback.
//!
//! A [`system::SystemSpec`] describes the generative model over finite
//! alphabets. [`engine::build_joint`] enumerates every trajectory exactly,
//! and the evaluators on [`engine::JointTable`] compute causally conditioned
//! entropies, mutual informations and directed informations from it. The
//! [`engine::verify_conservation`] family checks the decomposition
//!
//! ```text
//! I(x^n -> y^n || s^n) = I(x0; y^n || s^n) + I(e^{n-1}; x0 | y^n || s^n)
//!                      + I(e^{n-1} -> y^n || s^n)
//! ```
//!
//! together with each intermediate identity behind it. [`sampler`] provides a
//! Monte Carlo cross-check and [`scenario`] generates test systems.

pub mod cli;
pub mod engine;
pub mod error;
pub mod sampler;
pub mod scenario;
pub mod system;

pub use error::{Error, Result};
