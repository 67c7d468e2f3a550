//! CCDT, OFDM and DFT-s-OFDM symbol synthesis.
//!
//! The chirp basis is
//! `g[k] = N^{-1/2}·e^{-j2π(αk² + βk + γ)/N}` and a CCDT symbol is the cyclic
//! convolution `s[n] = Σ_m x[m]·g[n-m]`. Equivalently `s` is the unitary
//! inverse DFT of `G[m]·X[m]`, where `G` is the unscaled DFT of `g` and `X`
//! the unitary DFT of `x`.
//!
//! `α` and `β` are stored doubled (`two_alpha`, `two_beta`) so that the
//! validity conditions `gcd(2α, N) = 1` and `αN + β ∈ ℤ` are exact integer
//! predicates.

use crate::dft::{dft, dft_unitary, idft_unitary};
use crate::error::{Error, Result};
use crate::math::{gcd, pi_phasor, rem, RootTable};
use crate::sequences::{ComplexSeq, SeqRole};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformParams {
    n: usize,
    two_alpha: i64,
    two_beta: i64,
    gamma: f64,
    n_cp: usize,
    q: usize,
}

impl WaveformParams {
    /// Parameters with no cyclic prefix and no upsampling (`Q = N`).
    pub fn new(n: usize, two_alpha: i64, two_beta: i64, gamma: f64) -> Result<Self> {
        let p = Self {
            n,
            two_alpha,
            two_beta,
            gamma,
            n_cp: 0,
            q: n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from real `α`, `β`; both must be integers or half-integers.
    pub fn from_real(n: usize, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let doubled = |v: f64, name: &str| {
            let d = 2.0 * v;
            if (d - d.round()).abs() > 1e-12 {
                Err(Error::InvalidParams(format!(
                    "{name} = {v} is not a multiple of 1/2"
                )))
            } else {
                Ok(d.round() as i64)
            }
        };
        Self::new(n, doubled(alpha, "alpha")?, doubled(beta, "beta")?, gamma)
    }

    pub fn with_cp(mut self, n_cp: usize) -> Result<Self> {
        self.n_cp = n_cp;
        self.validate()?;
        Ok(self)
    }

    pub fn with_upsampled_len(mut self, q: usize) -> Result<Self> {
        self.q = q;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidParams("N must be positive".into()));
        }
        if self.two_alpha == 0 || gcd(self.two_alpha, n as i64) != 1 {
            return Err(Error::InvalidParams(format!(
                "gcd(2α = {}, N = {n}) must be 1",
                self.two_alpha
            )));
        }
        if (self.two_alpha as i128 * n as i128 + self.two_beta as i128) % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "αN + β = ({}·{n} + {})/2 is not an integer",
                self.two_alpha, self.two_beta
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidParams("γ must be finite".into()));
        }
        if self.n_cp > n {
            return Err(Error::CpTooLong { n_cp: self.n_cp, n });
        }
        if self.q < n || self.q % n != 0 {
            return Err(Error::InvalidUpsampling { n, q: self.q });
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn two_alpha(&self) -> i64 {
        self.two_alpha
    }

    pub fn two_beta(&self) -> i64 {
        self.two_beta
    }

    pub fn alpha(&self) -> f64 {
        self.two_alpha as f64 / 2.0
    }

    pub fn beta(&self) -> f64 {
        self.two_beta as f64 / 2.0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    pub fn upsampled_len(&self) -> usize {
        self.q
    }

    /// `g[k]` for any integer `k` (the basis is `N`-periodic).
    pub fn basis_sample(&self, k: i64) -> Complex64 {
        let n = self.n as i128;
        let k = rem(k, self.n) as i128;
        // α k² + β k = (2α k² + 2β k) / 2, so the phase is π·(2αk² + 2βk)/N.
        let num = self.two_alpha as i128 * k * k + self.two_beta as i128 * k;
        let gamma_phase = Complex64::from_polar(1.0, -2.0 * PI * self.gamma / self.n as f64);
        pi_phasor(-num, n) * gamma_phase / (self.n as f64).sqrt()
    }
}

/// Chirp basis `g[0..N]`.
pub fn chirp_basis(params: &WaveformParams) -> ComplexSeq {
    let samples = (0..params.n as i64)
        .map(|k| params.basis_sample(k))
        .collect();
    ComplexSeq::new(samples, SeqRole::Basis).expect("N > 0")
}

fn check_len(x: &[Complex64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    Ok(())
}

fn signal(samples: Vec<Complex64>) -> ComplexSeq {
    ComplexSeq::new(samples, SeqRole::Signal).expect("non-empty")
}

/// CCDT by direct cyclic convolution with the chirp basis.
pub fn ccdt_modulate_time(params: &WaveformParams, x: &[Complex64]) -> Result<ComplexSeq> {
    let n = params.n;
    check_len(x, n)?;
    let g = chirp_basis(params);
    let s = (0..n)
        .map(|i| {
            x.iter()
                .enumerate()
                .map(|(m, &xm)| xm * g[(i + n - m) % n])
                .sum()
        })
        .collect();
    Ok(signal(s))
}

/// The CCDT spectrum `G[m]·X[m]` (unscaled `G`, unitary `X`).
pub fn ccdt_spectrum(params: &WaveformParams, x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x, params.n)?;
    let g = dft(&chirp_basis(params));
    let xs = dft_unitary(x);
    Ok(g.iter().zip(&xs).map(|(a, b)| a * b).collect())
}

/// CCDT through the frequency domain: DFT-s-OFDM with a chirp filter.
pub fn ccdt_modulate_freq(params: &WaveformParams, x: &[Complex64]) -> Result<ComplexSeq> {
    Ok(signal(idft_unitary(&ccdt_spectrum(params, x)?)))
}

/// OFDM: unitary inverse DFT of the symbols.
pub fn ofdm_modulate(x: &[Complex64]) -> Result<ComplexSeq> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(signal(idft_unitary(x)))
}

/// DFT-s-OFDM: the DFT precoder cancels the inverse DFT, so `s = x`.
pub fn dfts_ofdm_modulate(x: &[Complex64]) -> Result<ComplexSeq> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(signal(x.to_vec()))
}

/// Prepend the last `n_cp` samples.
pub fn add_cp(s: &[Complex64], n_cp: usize) -> Result<Vec<Complex64>> {
    if n_cp > s.len() {
        return Err(Error::CpTooLong { n_cp, n: s.len() });
    }
    let mut out = Vec::with_capacity(s.len() + n_cp);
    out.extend_from_slice(&s[s.len() - n_cp..]);
    out.extend_from_slice(s);
    Ok(out)
}

/// Drop the first `n_cp` samples.
pub fn remove_cp(r: &[Complex64], n_cp: usize) -> Result<Vec<Complex64>> {
    if n_cp > r.len() {
        return Err(Error::CpTooLong { n_cp, n: r.len() });
    }
    Ok(r[n_cp..].to_vec())
}

/// `s[n] = Q^{-1/2}·Σ_{m<N} c[m]·e^{j2πmn/Q}` for `n = 0..Q`.
///
/// The length-`N` spectrum occupies bins `0..N` of a length-`Q` inverse
/// transform; every other bin is zero.
pub fn upsample_spectrum(spectrum: &[Complex64], q: usize) -> Result<ComplexSeq> {
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if q < n || q % n != 0 {
        return Err(Error::InvalidUpsampling { n, q });
    }
    let table = RootTable::new(q);
    let scale = 1.0 / (q as f64).sqrt();
    let s = (0..q as i64)
        .map(|t| {
            spectrum
                .iter()
                .enumerate()
                .map(|(m, &c)| c * table.get(m as i64 * t))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(signal(s))
}

/// CCDT symbol upsampled to length `Q`; `Q = N` reproduces [`ccdt_modulate_freq`].
pub fn upsample(params: &WaveformParams, x: &[Complex64], q: usize) -> Result<ComplexSeq> {
    upsample_spectrum(&ccdt_spectrum(params, x)?, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WaveformKind {
    Ccdt,
    Ofdm,
    DftsOfdm,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 3] = [WaveformKind::Ofdm, WaveformKind::DftsOfdm, WaveformKind::Ccdt];

    pub fn name(&self) -> &'static str {
        match self {
            WaveformKind::Ccdt => "ccdt",
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::DftsOfdm => "dfts-ofdm",
        }
    }
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ccdt" => Ok(WaveformKind::Ccdt),
            "ofdm" => Ok(WaveformKind::Ofdm),
            "dfts-ofdm" | "dft-s-ofdm" | "dftsofdm" => Ok(WaveformKind::DftsOfdm),
            other => Err(Error::InvalidConfig(format!("unknown waveform '{other}'"))),
        }
    }
}

/// A waveform kind bound to validated parameters. OFDM and DFT-s-OFDM only
/// use `N`, the CP length and `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    kind: WaveformKind,
    params: WaveformParams,
}

impl Waveform {
    pub fn new(kind: WaveformKind, params: WaveformParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { kind, params })
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    pub fn params(&self) -> &WaveformParams {
        &self.params
    }

    pub fn modulate(&self, x: &[Complex64]) -> Result<ComplexSeq> {
        check_len(x, self.params.n)?;
        match self.kind {
            WaveformKind::Ccdt => ccdt_modulate_time(&self.params, x),
            WaveformKind::Ofdm => ofdm_modulate(x),
            WaveformKind::DftsOfdm => dfts_ofdm_modulate(x),
        }
    }

    /// Length-`N` spectrum that the upsampler zero-pads.
    pub fn spectrum(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(x, self.params.n)?;
        Ok(match self.kind {
            WaveformKind::Ccdt => ccdt_spectrum(&self.params, x)?,
            WaveformKind::Ofdm => x.to_vec(),
            WaveformKind::DftsOfdm => dft_unitary(x),
        })
    }

    pub fn modulate_upsampled(&self, x: &[Complex64], q: usize) -> Result<ComplexSeq> {
        upsample_spectrum(&self.spectrum(x)?, q)
    }
}
