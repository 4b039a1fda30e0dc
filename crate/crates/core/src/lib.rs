//! Toolkit for state-constrained singular stochastic control problems with
//! polyhedral control cones.

pub mod cone;
pub mod domain;
pub mod error;
pub mod hjb;
pub mod lp;
pub mod network;
pub mod numfmt;
pub mod sim;

pub use error::{Error, Result};
