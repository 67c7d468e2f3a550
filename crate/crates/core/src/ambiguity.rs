//! Periodic ambiguity functions.
//!
//! `χ(Δ,τ) = (1/N)·Σ_n s[n]·s*[n+τ mod N]·e^{j2πΔn/N}` with Doppler `Δ` in
//! subcarrier units and delay `τ` in samples. The closed forms below evaluate
//! the same quantity for CCDT symbols directly from the transmit sequence.

use crate::dft::FftPlan;
use crate::error::{Error, Result};
use crate::math::{mod_inverse, pi_phasor, rem, rem_i128, RootTable};
use crate::waveform::WaveformParams;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::{self, Write};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// AF by definition at integer `(Δ, τ)`.
pub fn af_definition(s: &[Complex64], delta: i64, tau: i64) -> Complex64 {
    let n = s.len();
    let shift = rem(tau, n);
    let sum: Complex64 = (0..n)
        .map(|i| {
            let ph = pi_phasor(2 * delta as i128 * i as i128, n as i128);
            s[i] * s[(i + shift) % n].conj() * ph
        })
        .sum();
    sum / n as f64
}

/// AF by definition with a real-valued Doppler offset.
pub fn af_definition_real(s: &[Complex64], delta: f64, tau: i64) -> Complex64 {
    let n = s.len();
    let shift = rem(tau, n);
    let sum: Complex64 = (0..n)
        .map(|i| {
            let ph = Complex64::from_polar(1.0, 2.0 * PI * delta * i as f64 / n as f64);
            s[i] * s[(i + shift) % n].conj() * ph
        })
        .sum();
    sum / n as f64
}

/// AF values on a `(Δ, τ)` grid, stored row-major in Δ then τ.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    n: usize,
    deltas: Vec<f64>,
    taus: Vec<i64>,
    values: Vec<Complex64>,
}

impl AmbiguitySurface {
    pub fn new(n: usize, deltas: Vec<f64>, taus: Vec<i64>, values: Vec<Complex64>) -> Result<Self> {
        if deltas.is_empty() || taus.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if values.len() != deltas.len() * taus.len() {
            return Err(Error::LengthMismatch {
                expected: deltas.len() * taus.len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            n,
            deltas,
            taus,
            values,
        })
    }

    /// Evaluate `f(Δ, τ)` on every grid point.
    pub fn from_fn(
        n: usize,
        deltas: Vec<f64>,
        taus: Vec<i64>,
        mut f: impl FnMut(f64, i64) -> Complex64,
    ) -> Result<Self> {
        let values = deltas
            .iter()
            .flat_map(|&d| taus.iter().map(move |&t| (d, t)))
            .map(|(d, t)| f(d, t))
            .collect();
        Self::new(n, deltas, taus, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn taus(&self) -> &[i64] {
        &self.taus
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at row `i` (Doppler index) and column `j` (delay index).
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.taus.len() + j]
    }

    /// Iterate `(Δ, τ, χ)`.
    pub fn iter(&self) -> impl Iterator<Item = (f64, i64, Complex64)> + '_ {
        self.deltas.iter().enumerate().flat_map(move |(i, &d)| {
            self.taus
                .iter()
                .enumerate()
                .map(move |(j, &t)| (d, t, self.get(i, j)))
        })
    }

    pub fn max_abs_diff(&self, other: &AmbiguitySurface) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with header `delta,tau,re,im,abs`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "delta,tau,re,im,abs")?;
        for (d, t, v) in self.iter() {
            writeln!(w, "{d},{t},{},{},{}", v.re, v.im, v.norm())?;
        }
        Ok(())
    }
}

fn integer_axis(n: usize) -> Vec<i64> {
    (0..n as i64).collect()
}

/// Full `N×N` integer grid. For each delay the product sequence is taken
/// through one inverse FFT, which yields every Doppler bin at once.
pub fn af_surface(s: &[Complex64]) -> Result<AmbiguitySurface> {
    let n = s.len();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let plan = FftPlan::new(n);
    let mut values = vec![ZERO; n * n];
    let mut buf = vec![ZERO; n];
    for tau in 0..n {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = s[i] * s[(i + tau) % n].conj();
        }
        plan.inverse(&mut buf);
        for (delta, b) in buf.iter().enumerate() {
            values[delta * n + tau] = b / n as f64;
        }
    }
    let axis = integer_axis(n);
    AmbiguitySurface::new(n, axis.iter().map(|&d| d as f64).collect(), axis, values)
}

/// Grid evaluation by definition; Doppler values may be fractional.
pub fn af_grid(s: &[Complex64], deltas: &[f64], taus: &[i64]) -> Result<AmbiguitySurface> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    AmbiguitySurface::from_fn(s.len(), deltas.to_vec(), taus.to_vec(), |d, t| {
        if d.fract() == 0.0 {
            af_definition(s, d as i64, t)
        } else {
            af_definition_real(s, d, t)
        }
    })
}

/// Solution of `2α·k₀ ≡ −Δ − 2ατ (mod N)` and the derived quantities used by
/// the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormContext {
    pub k0: usize,
    pub r0: i64,
    /// Effective cyclic lag of the transmit sequence; always equals `k0`.
    pub epsilon: i64,
    /// Scale factor with `|c| = 1/N`.
    pub c: Complex64,
}

impl ClosedFormContext {
    pub fn new(params: &WaveformParams, delta: i64, tau: i64) -> Self {
        let n = params.n();
        let two_alpha = params.two_alpha() as i128;
        let inv = mod_inverse(params.two_alpha(), n).expect("gcd(2α, N) = 1") as i128;
        let (d, t) = (delta as i128, tau as i128);
        let k0 = rem_i128(inv * (-d - two_alpha * t), n as i128);
        let r0_num = two_alpha * k0 + d + two_alpha * t;
        debug_assert_eq!(r0_num % n as i128, 0);
        let r0 = (r0_num / n as i128) as i64;
        // Combined delay of the two chirp factors after the sum over n collapses.
        let d0 = -(k0 + t);
        let chirp = two_alpha * d0 * d0 + params.two_beta() as i128 * d0;
        let c = pi_phasor(-2 * d * t, n as i128) * pi_phasor(-chirp, n as i128) / n as f64;
        Self {
            k0: k0 as usize,
            r0,
            epsilon: k0 as i64,
            c,
        }
    }
}

/// CCDT AF evaluated from the transmit sequence:
/// `χ(Δ,τ) = C·Σ_m x[m+ε]·x*[m]·e^{j2πΔm/N}`.
pub fn af_ccdt_closed_form(
    params: &WaveformParams,
    x: &[Complex64],
    delta: i64,
    tau: i64,
) -> Result<Complex64> {
    let n = params.n();
    check_len(x, n)?;
    let ctx = ClosedFormContext::new(params, delta, tau);
    let sum: Complex64 = (0..n)
        .map(|m| {
            let ph = pi_phasor(2 * delta as i128 * m as i128, n as i128);
            x[(m + ctx.k0) % n] * x[m].conj() * ph
        })
        .sum();
    Ok(ctx.c * sum)
}

/// Closed-form CCDT surface on the full integer grid.
pub fn af_ccdt_surface(params: &WaveformParams, x: &[Complex64]) -> Result<AmbiguitySurface> {
    let n = params.n();
    check_len(x, n)?;
    let roots = RootTable::new(n);
    let axis = integer_axis(n);
    AmbiguitySurface::from_fn(n, axis.iter().map(|&d| d as f64).collect(), axis, |d, t| {
        let d = d as i64;
        let ctx = ClosedFormContext::new(params, d, t);
        let sum: Complex64 = (0..n)
            .map(|m| x[(m + ctx.k0) % n] * x[m].conj() * roots.get(d * m as i64))
            .sum();
        ctx.c * sum
    })
}

/// AF of the chirp basis: `(1/N)·e^{jπ(2ατ² + 2βτ)/N}·δ[2ατ + Δ mod N]`.
pub fn basis_af(params: &WaveformParams, delta: i64, tau: i64) -> Complex64 {
    let n = params.n() as i128;
    let (d, t) = (delta as i128, tau as i128);
    let two_alpha = params.two_alpha() as i128;
    if rem_i128(two_alpha * t + d, n) != 0 {
        return ZERO;
    }
    pi_phasor(two_alpha * t * t + params.two_beta() as i128 * t, n) / n as f64
}

/// `N·Σ_v χ_g(Δ,v)·χ_x(Δ,τ−v)`. Only one `v` has a nonzero basis term.
pub fn af_convolution(
    params: &WaveformParams,
    x: &[Complex64],
    delta: i64,
    tau: i64,
) -> Result<Complex64> {
    let n = params.n();
    check_len(x, n)?;
    let v = basis_delay(params, delta);
    let g = basis_af(params, delta, v);
    Ok(g * af_definition(x, delta, tau - v) * n as f64)
}

/// The unique `v` with `2αv + Δ ≡ 0 (mod N)`.
fn basis_delay(params: &WaveformParams, delta: i64) -> i64 {
    let n = params.n();
    let inv = mod_inverse(params.two_alpha(), n).expect("gcd(2α, N) = 1") as i128;
    rem_i128(-inv * delta as i128, n as i128) as i64
}

/// Subcarriers `k` of the zero-padded length-`q_len` spectrum that still
/// overlap the band after a shift by `Δ`: `k` and `k − Δ (mod Q)` both in
/// `0..N`. Returned as a contiguous range `(start, len)`.
fn band_overlap(n: usize, q_len: usize, delta: i64) -> (i64, i64) {
    if q_len == n {
        return (0, n as i64);
    }
    let d = rem(delta, q_len) as i64;
    let (n, q_len) = (n as i64, q_len as i64);
    if d < n {
        (d, n - d)
    } else if d > q_len - n {
        (0, d - q_len + n)
    } else {
        (0, 0)
    }
}

/// `Σ_{k=a}^{a+M−1} e^{j2πk·num/Q}`, with every phase reduced exactly.
fn band_kernel(start: i64, len: i64, num: i128, q_len: usize) -> Complex64 {
    let q = q_len as i128;
    if len == 0 {
        return ZERO;
    }
    if rem_i128(num, q) == 0 {
        return Complex64::new(len as f64, 0.0);
    }
    let sin_pi = |k: i128| (PI * rem_i128(k, 2 * q) as f64 / q as f64).sin();
    let (a, m) = (start as i128, len as i128);
    pi_phasor((2 * a + m - 1) * num, q) * (sin_pi(m * num) / sin_pi(num))
}

/// AF of the CCDT symbol upsampled to length `Q = qN`, through the
/// double sum `(N/Q)·Σ_v Σ_w χ_g(Δ,v)·χ_x(Δ,w)·K(v + w − τ/q)`.
///
/// `τ` counts upsampled samples and `Δ` subcarriers, so the value matches
/// [`af_definition`] applied to the length-`Q` signal. The kernel `K` sums
/// `e^{j2πky/N}` over the subcarriers that overlap after the Doppler shift;
/// when `Δ ≡ 0 (mod Q)` that is the whole band and `K` is the Dirichlet kernel.
pub fn af_upsampled(
    params: &WaveformParams,
    x: &[Complex64],
    q_len: usize,
    delta: i64,
    tau: i64,
) -> Result<Complex64> {
    let n = params.n();
    check_len(x, n)?;
    if q_len < n || q_len % n != 0 {
        return Err(Error::InvalidUpsampling { n, q: q_len });
    }
    let q = (q_len / n) as i128;
    let (start, len) = band_overlap(n, q_len, delta);
    if len == 0 {
        return Ok(ZERO);
    }
    let v = basis_delay(params, delta);
    let g = basis_af(params, delta, v);
    let sum: Complex64 = (0..n as i64)
        .map(|w| {
            // y = v + w − τ/q expressed over the denominator q: num/Q = y/N.
            let num = q * (v + w) as i128 - tau as i128;
            af_definition(x, delta, w) * band_kernel(start, len, num, q_len)
        })
        .sum();
    Ok(g * sum * (n as f64 / q_len as f64))
}

/// Dirichlet sum `Σ_{n<N} e^{j2πnp/N}` at `p = whole + frac`.
///
/// Near `p ≡ 0 (mod N)` the ratio form is 0/0 and the limit
/// `N·e^{jπ(N−1)·frac/N}` is used instead.
pub fn dirichlet(n: usize, whole: i64, frac: f64) -> Complex64 {
    let nn = n as i128;
    let reduced = rem_i128(whole as i128, 2 * nn);
    let phase = pi_phasor((nn - 1) * whole as i128, nn)
        * Complex64::from_polar(1.0, PI * (n as f64 - 1.0) * frac / n as f64);
    if reduced % nn == 0 && frac.abs() < 1e-9 {
        return Complex64::new(n as f64, 0.0)
            * Complex64::from_polar(1.0, PI * (n as f64 - 1.0) * frac / n as f64);
    }
    // sin(π(P + f)) = (−1)^P·sin(πf)
    let sign = if reduced % 2 == 0 { 1.0 } else { -1.0 };
    let num = sign * (PI * frac).sin();
    let den = (PI * (reduced as f64 + frac) / n as f64).sin();
    phase * (num / den)
}

/// CCDT AF at a real-valued Doppler offset, as a double sum over the
/// transmit sequence weighted by the Dirichlet kernel.
pub fn af_nonint(
    params: &WaveformParams,
    x: &[Complex64],
    delta: f64,
    tau: i64,
) -> Result<Complex64> {
    let n = params.n();
    check_len(x, n)?;
    let nn = n as i128;
    let two_alpha = params.two_alpha() as i128;
    let two_beta = params.two_beta() as i128;
    let t = tau as i128;
    let whole = delta.round();
    let frac = delta - whole;
    let whole = whole as i64;
    let lead = pi_phasor(two_alpha * t * t + two_beta * t, nn) / (n as f64 * n as f64);
    let mut acc = ZERO;
    for m in 0..nn {
        for k in 0..nn {
            let p = whole as i128 - two_alpha * (m - k) + two_alpha * t;
            let kernel = dirichlet(n, rem_i128(p, 2 * nn) as i64, frac);
            if kernel.norm() == 0.0 {
                continue;
            }
            let chirp = two_alpha * (k * k - m * m) + two_beta * (m - k) + 2 * two_alpha * t * m;
            acc += x[k as usize] * x[m as usize].conj() * pi_phasor(-chirp, nn) * kernel;
        }
    }
    Ok(lead * acc)
}

/// OFDM AF from the symbols: `(1/N)·Σ_m x[m−Δ]·x*[m]·e^{−j2πτm/N}`.
pub fn af_ofdm(x: &[Complex64], delta: i64, tau: i64) -> Complex64 {
    let n = x.len();
    let sum: Complex64 = (0..n)
        .map(|m| {
            let ph = pi_phasor(-2 * tau as i128 * m as i128, n as i128);
            x[rem(m as i64 - delta, n)] * x[m].conj() * ph
        })
        .sum();
    sum / n as f64
}

/// DFT-s-OFDM AF from the symbols: `(1/N)·Σ_m x[m−τ]·x*[m]·e^{j2πΔm/N}`.
///
/// Equal in modulus to the AF of the transmitted signal.
pub fn af_dfts_ofdm(x: &[Complex64], delta: i64, tau: i64) -> Complex64 {
    let n = x.len();
    let sum: Complex64 = (0..n)
        .map(|m| {
            let ph = pi_phasor(2 * delta as i128 * m as i128, n as i128);
            x[rem(m as i64 - tau, n)] * x[m].conj() * ph
        })
        .sum();
    sum / n as f64
}

/// Symbol alphabet for [`expected_af_random`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomSymbols {
    Psk(usize),
    /// Phases uniform on `[0, 2π)`.
    UniformPhase,
}

/// Sample mean of the CCDT AF over random transmit sequences at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomAfStat {
    pub delta: i64,
    pub tau: i64,
    pub mean: Complex64,
    /// Standard error of the complex mean.
    pub std_err: f64,
    pub trials: usize,
}

/// Average `χ(Δ,τ)` over `trials` independent random sequences, each drawn
/// from its own substream of `seed`.
pub fn expected_af_random(
    params: &WaveformParams,
    symbols: RandomSymbols,
    points: &[(i64, i64)],
    trials: usize,
    seed: u64,
) -> Result<Vec<RandomAfStat>> {
    use crate::rng::{domain, substream};
    use crate::sequences::{random_mpsk, random_unit_phase};
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    let n = params.n();
    let mut sum = vec![ZERO; points.len()];
    let mut sum_sq = vec![0.0; points.len()];
    for t in 0..trials {
        let mut rng = substream(seed, &[domain::RANDOM_AF, t as u64]);
        let x = match symbols {
            RandomSymbols::Psk(order) => random_mpsk(n, order, &mut rng)?,
            RandomSymbols::UniformPhase => random_unit_phase(n, &mut rng)?,
        };
        for (i, &(d, tau)) in points.iter().enumerate() {
            let v = af_ccdt_closed_form(params, &x, d, tau)?;
            sum[i] += v;
            sum_sq[i] += v.norm_sqr();
        }
    }
    let k = trials as f64;
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, &(delta, tau))| {
            let mean = sum[i] / k;
            let var = if trials > 1 {
                ((sum_sq[i] - k * mean.norm_sqr()) / (k - 1.0)).max(0.0)
            } else {
                0.0
            };
            RandomAfStat {
                delta,
                tau,
                mean,
                std_err: (var / k).sqrt(),
                trials,
            }
        })
        .collect())
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
