use thiserror::Error;

use crate::fock::ModeLabel;

/// Errors shared across the simulator.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A requested occupation exceeds the truncation cap of its mode.
    #[error("occupation {occupation} exceeds cap {cap} on mode {mode}")]
    OccupationAboveCap {
        mode: ModeLabel,
        occupation: usize,
        cap: usize,
    },

    /// An operation referenced a mode that is not part of the state.
    #[error("mode {0} is not present in this state")]
    UnknownMode(ModeLabel),

    /// A mode appeared twice where labels must be distinct.
    #[error("mode {0} appears more than once")]
    DuplicateMode(ModeLabel),

    /// Two states that must share a layout (modes and caps) do not.
    #[error("state layouts differ: {0}")]
    ModeMismatch(String),

    /// Normalisation (or a heralded result) ran into a numerically zero vector.
    #[error("state has squared norm below the zero threshold ({norm_sqr:.3e})")]
    ZeroNormState { norm_sqr: f64 },

    /// A loss channel was given an ancilla that is not in vacuum.
    #[error("loss ancilla {0} is not in vacuum")]
    LossModeNotVacuum(ModeLabel),

    /// Truncation dropped more population than the configured tolerance,
    /// or a constructor could not fit the requested state under its cap.
    #[error("truncation cap too small: {detail} (dropped {dropped:.3e}, tolerance {tolerance:.3e})")]
    CapTooSmall {
        detail: String,
        dropped: f64,
        tolerance: f64,
    },

    /// A target mean photon number has no solution in the representable range.
    #[error("no parameter solves the requested target: {0}")]
    NoSolution(String),

    /// A detection pattern is outside the domain of the requested formula.
    #[error("invalid detection pattern: {0}")]
    InvalidPattern(String),

    /// Parameter validation failed (beamsplitter coefficients, gain, qubit norm, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
