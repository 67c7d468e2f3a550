//! Chirp-convolved data transmission (CCDT) waveforms, their ambiguity
//! functions, PAPR, and Monte-Carlo timing/radar detection experiments.

pub mod ambiguity;
pub mod channel;
pub mod detection;
pub mod dft;
pub mod error;
pub mod math;
pub mod papr;
pub mod rng;
pub mod sequences;
pub mod verify;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sequences::{ComplexSeq, LfsrSpec, SeqRole};
pub use waveform::{Waveform, WaveformKind, WaveformParams};
