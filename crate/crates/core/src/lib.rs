//! Numerical simulator of a heralded, qubit-programmed operation on
//! travelling optical fields.
//!
//! The crate models the full interferometric circuit — a two-mode squeezer,
//! a weakly reflecting tap, interference with a dual-rail programme qubit,
//! and photon-number post-selection — on truncated Fock spaces, together
//! with the closed-form conditional map it realises and the first-order
//! corrections produced by detector loss.

pub mod analysis;
pub mod checks;
pub mod closed_form;
pub mod error;
pub mod fock;
pub mod gate;
mod math;
pub mod optics;
pub mod states;

pub use error::{Error, Result};
pub use fock::{FockVector, ModeLabel, ZERO_NORM_THRESHOLD};
