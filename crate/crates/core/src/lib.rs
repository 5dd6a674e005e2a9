//! Locked invasion fronts of a lattice population model with an Allee-type
//! threshold: front construction, locking regions, spectral checks and
//! direct simulation.

// `!(x < y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod farey;
pub mod front;
pub mod linear;
pub mod model;
pub mod poly;
pub mod regions;
pub mod roots;
pub mod sim;
pub mod spectral;
pub mod sweeps;

pub use error::{Error, Result};
pub use model::{LinearParams, Params, RationalSpeed};
