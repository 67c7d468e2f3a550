use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sequence length must be at least 1")]
    EmptySequence,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("Zadoff-Chu root {root} is degenerate for length {n}")]
    DegenerateRoot { n: usize, root: i64 },

    #[error("index {index} out of range 0..{n}")]
    IndexOutOfRange { index: i64, n: usize },

    #[error("invalid LFSR: {0}")]
    InvalidLfsr(String),

    #[error("LFSR of degree {degree} has period {period}, expected {expected} (taps are not primitive)")]
    NonPrimitive {
        degree: u32,
        period: u64,
        expected: u64,
    },

    #[error("PSK order must be at least 2, got {0}")]
    InvalidPskOrder(usize),

    #[error("invalid waveform parameters: {0}")]
    InvalidParams(String),

    #[error("upsampled length {q} is not a positive multiple of {n}")]
    InvalidUpsampling { n: usize, q: usize },

    #[error("cyclic prefix length {n_cp} exceeds symbol length {n}")]
    CpTooLong { n_cp: usize, n: usize },

    #[error("channel delay {delay} exceeds cyclic prefix length {n_cp}")]
    DelayExceedsCp { delay: usize, n_cp: usize },

    #[error("signal has zero energy")]
    ZeroEnergy,

    #[error("hypothesis grid is empty")]
    EmptyGrid,

    #[error("{trials} noise trials are too few for false-alarm probability {p_fa} (need at least {required})")]
    InsufficientTrials {
        trials: usize,
        p_fa: f64,
        required: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
