//! Transmit sequences: Zadoff-Chu, maximum-length (m-) sequences, DFT
//! sequences and random PSK symbols, plus the periodic autocorrelation and
//! the CAZAC predicate.

use crate::error::{Error, Result};
use crate::math::{pi_phasor, rem, root_of_unity};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use std::ops::Deref;

/// What a sequence stands for in a modulation chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqRole {
    /// Symbols `x[m]` fed to a modulator.
    Transmit,
    /// Chirp basis `g[k]`.
    Basis,
    /// Modulated time-domain signal `s[n]`.
    Signal,
}

/// A finite, cyclically indexed sequence of complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeq {
    samples: Vec<Complex64>,
    role: SeqRole,
}

impl ComplexSeq {
    pub fn new(samples: Vec<Complex64>, role: SeqRole) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { samples, role })
    }

    pub fn transmit(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, SeqRole::Transmit)
    }

    pub fn signal(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, SeqRole::Signal)
    }

    pub fn role(&self) -> SeqRole {
        self.role
    }

    pub fn with_role(mut self, role: SeqRole) -> Self {
        self.role = role;
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Sample at `index mod N`.
    #[inline]
    pub fn cyclic(&self, index: i64) -> Complex64 {
        self.samples[rem(index, self.samples.len())]
    }

    /// Largest deviation of `|x[m]|` from one.
    pub fn modulus_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.modulus_deviation() < tol
    }
}

impl Deref for ComplexSeq {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.samples
    }
}

/// Zadoff-Chu sequence of root `u`.
///
/// Odd `N` uses `e^{jπ·u·m(m+1)/N}`, even `N` uses `e^{jπ·u·m²/N}`.
pub fn zadoff_chu(n: usize, u: i64) -> Result<ComplexSeq> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if rem(u, n) == 0 {
        return Err(Error::DegenerateRoot { n, root: u });
    }
    let odd = n % 2 == 1;
    let samples = (0..n as i128)
        .map(|m| {
            let q = if odd { m * (m + 1) } else { m * m };
            pi_phasor(u as i128 * q, n as i128)
        })
        .collect();
    ComplexSeq::transmit(samples)
}

/// DFT sequence `x_k[m] = e^{j2πkm/N}`.
pub fn dft_sequence(n: usize, k: usize) -> Result<ComplexSeq> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if k >= n {
        return Err(Error::IndexOutOfRange {
            index: k as i64,
            n,
        });
    }
    let samples = (0..n as i64)
        .map(|m| root_of_unity(k as i64 * m, n))
        .collect();
    ComplexSeq::transmit(samples)
}

/// Fibonacci LFSR description.
///
/// `taps` uses the usual tap notation: `[7, 6]` is the feedback polynomial
/// `x⁷ + x⁶ + 1`. The degree must appear among the taps. The register
/// produces `y[n+p] = y[n] ⊕ ⨁_{t ∈ taps, t < p} y[n+t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    degree: u32,
    taps: Vec<u32>,
    state: Vec<bool>,
}

/// Largest supported register degree.
pub const MAX_LFSR_DEGREE: u32 = 24;

impl LfsrSpec {
    pub fn new(degree: u32, taps: Vec<u32>, state: Vec<bool>) -> Result<Self> {
        if degree == 0 || degree > MAX_LFSR_DEGREE {
            return Err(Error::InvalidLfsr(format!(
                "degree {degree} outside 1..={MAX_LFSR_DEGREE}"
            )));
        }
        if !taps.contains(&degree) {
            return Err(Error::InvalidLfsr(format!(
                "taps {taps:?} must include the degree {degree}"
            )));
        }
        if let Some(t) = taps.iter().find(|&&t| t == 0 || t > degree) {
            return Err(Error::InvalidLfsr(format!("tap {t} outside 1..={degree}")));
        }
        if state.len() != degree as usize {
            return Err(Error::InvalidLfsr(format!(
                "initial state has {} bits, expected {degree}",
                state.len()
            )));
        }
        if state.iter().all(|b| !b) {
            return Err(Error::InvalidLfsr("initial state is all zeros".into()));
        }
        let mut taps = taps;
        taps.sort_unstable();
        taps.dedup();
        Ok(Self {
            degree,
            taps,
            state,
        })
    }

    /// Register with the given taps and an all-ones seed.
    pub fn with_taps(degree: u32, taps: Vec<u32>) -> Result<Self> {
        Self::new(degree, taps, vec![true; degree as usize])
    }

    /// Default primitive polynomial for `degree` (2..=16) with an all-ones seed.
    pub fn default_for_degree(degree: u32) -> Result<Self> {
        let taps: &[u32] = match degree {
            2 => &[2, 1],
            3 => &[3, 1],
            4 => &[4, 1],
            5 => &[5, 2],
            6 => &[6, 1],
            7 => &[7, 6],
            8 => &[8, 6, 5, 4],
            9 => &[9, 4],
            10 => &[10, 3],
            11 => &[11, 2],
            12 => &[12, 6, 4, 1],
            13 => &[13, 4, 3, 1],
            14 => &[14, 5, 3, 1],
            15 => &[15, 1],
            16 => &[16, 5, 3, 2],
            _ => {
                return Err(Error::InvalidLfsr(format!(
                    "no default polynomial for degree {degree}"
                )))
            }
        };
        Self::with_taps(degree, taps.to_vec())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    /// `2^p - 1`
    pub fn period(&self) -> usize {
        (1usize << self.degree) - 1
    }

    fn step(&self, window: &mut [bool]) -> bool {
        let p = self.degree;
        let mut fb = window[0];
        for &t in self.taps.iter().filter(|&&t| t < p) {
            fb ^= window[t as usize];
        }
        let out = window[0];
        window.rotate_left(1);
        let last = window.len() - 1;
        window[last] = fb;
        out
    }

    /// Number of steps until the register state repeats, capped at `2^p`.
    pub fn measured_period(&self) -> u64 {
        let mut window = self.state.clone();
        let cap = 1u64 << self.degree;
        for steps in 1..=cap {
            self.step(&mut window);
            if window == self.state {
                return steps;
            }
        }
        cap
    }

    /// One period of the binary output, `y[0..2^p-1]`.
    pub fn bits(&self) -> Result<Vec<bool>> {
        let expected = self.period() as u64;
        let period = self.measured_period();
        if period != expected {
            return Err(Error::NonPrimitive {
                degree: self.degree,
                period,
                expected,
            });
        }
        let mut window = self.state.clone();
        Ok((0..expected).map(|_| self.step(&mut window)).collect())
    }
}

/// ±1 m-sequence with `0 → -1`, `1 → +1`.
pub fn m_sequence(spec: &LfsrSpec) -> Result<ComplexSeq> {
    let samples = spec
        .bits()?
        .into_iter()
        .map(|b| Complex64::new(if b { 1.0 } else { -1.0 }, 0.0))
        .collect();
    ComplexSeq::transmit(samples)
}

/// `N` symbols drawn independently and uniformly from the `M`-PSK
/// constellation `e^{j2πp/M}`.
pub fn random_mpsk<R: Rng + ?Sized>(n: usize, order: usize, rng: &mut R) -> Result<ComplexSeq> {
    if order < 2 {
        return Err(Error::InvalidPskOrder(order));
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let samples = (0..n)
        .map(|_| root_of_unity(rng.random_range(0..order) as i64, order))
        .collect();
    ComplexSeq::transmit(samples)
}

/// `N` unit-modulus symbols with independent phases uniform on `[0, 2π)`.
pub fn random_unit_phase<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexSeq> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let samples = (0..n)
        .map(|_| Complex64::from_polar(1.0, -2.0 * PI * rng.random::<f64>()))
        .collect();
    ComplexSeq::transmit(samples)
}

/// `(1/N)·Σ x[m]·x*[m+τ mod N]`
pub fn periodic_autocorrelation(x: &[Complex64], tau: i64) -> Complex64 {
    let n = x.len();
    let shift = rem(tau, n);
    let sum: Complex64 = (0..n).map(|m| x[m] * x[(m + shift) % n].conj()).sum();
    sum / n as f64
}

/// Constant amplitude and zero periodic autocorrelation off the peak, both
/// to within `tol`.
pub fn is_cazac(x: &[Complex64], tol: f64) -> bool {
    let ca = x.iter().all(|v| (v.norm() - 1.0).abs() < tol);
    ca && (1..x.len() as i64).all(|t| periodic_autocorrelation(x, t).norm() < tol)
}

/// A transmit sequence named in an experiment configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SequenceSpec {
    /// m-sequence from an LFSR of `degree`; default polynomial when `taps` is `None`.
    MSequence { degree: u32, taps: Option<Vec<u32>> },
    ZadoffChu { root: i64 },
    Dft { index: usize },
    /// Fresh `order`-PSK symbols for every trial.
    RandomPsk { order: usize },
}

impl SequenceSpec {
    /// Short label without commas, used in result files.
    pub fn label(&self) -> String {
        match self {
            SequenceSpec::MSequence { .. } => "mseq".into(),
            SequenceSpec::ZadoffChu { root } => format!("zc-u{root}"),
            SequenceSpec::Dft { index } => format!("dft-k{index}"),
            SequenceSpec::RandomPsk { order: 4 } => "qpsk".into(),
            SequenceSpec::RandomPsk { order } => format!("{order}psk"),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, SequenceSpec::RandomPsk { .. })
    }

    /// The sequence itself, or `None` for random families.
    pub fn fixed(&self, n: usize) -> Result<Option<ComplexSeq>> {
        let seq = match self {
            SequenceSpec::MSequence { degree, taps } => {
                let spec = match taps {
                    Some(t) => LfsrSpec::with_taps(*degree, t.clone())?,
                    None => LfsrSpec::default_for_degree(*degree)?,
                };
                let x = m_sequence(&spec)?;
                if x.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        actual: x.len(),
                    });
                }
                x
            }
            SequenceSpec::ZadoffChu { root } => zadoff_chu(n, *root)?,
            SequenceSpec::Dft { index } => dft_sequence(n, *index)?,
            SequenceSpec::RandomPsk { order } => {
                if *order < 2 {
                    return Err(Error::InvalidPskOrder(*order));
                }
                return Ok(None);
            }
        };
        Ok(Some(seq))
    }

    /// The fixed sequence, or a fresh random draw.
    pub fn realize<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ComplexSeq> {
        match self {
            SequenceSpec::RandomPsk { order } => random_mpsk(n, *order, rng),
            _ => Ok(self.fixed(n)?.expect("fixed family")),
        }
    }
}
