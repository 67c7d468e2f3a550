//! Discrete-time channels: tapped delay line with Clarke fading, AWGN,
//! carrier frequency offset and point radar targets.
//!
//! All channel functions take a CP-extended symbol and return the `N`
//! samples left after CP removal. Noise is added separately so that the
//! detection code can reuse one noiseless realization across SNR points.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier and numerology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Subcarrier spacing in Hz.
    pub f_scs: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
    /// Symbol length in samples.
    pub n: usize,
}

impl LinkBudget {
    pub fn new(f_scs: f64, f_c: f64, n: usize) -> Result<Self> {
        if !(f_scs > 0.0 && f_c > 0.0 && n > 0) {
            return Err(Error::InvalidParams(
                "subcarrier spacing, carrier and N must be positive".into(),
            ));
        }
        Ok(Self { f_scs, f_c, n })
    }

    /// Sampling rate `N·f_SCS` in Hz.
    pub fn f_s(&self) -> f64 {
        self.n as f64 * self.f_scs
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.f_s()
    }

    /// Maximum Doppler shift in Hz for a terminal moving at `v_kmh`.
    pub fn doppler_hz(&self, v_kmh: f64) -> f64 {
        kmh_to_ms(v_kmh) / SPEED_OF_LIGHT * self.f_c
    }

    /// Maximum Doppler in cycles per sample.
    pub fn doppler_per_sample(&self, v_kmh: f64) -> f64 {
        self.doppler_hz(v_kmh) / self.f_s()
    }

    /// Maximum Doppler in subcarrier spacings.
    pub fn doppler_subcarriers(&self, v_kmh: f64) -> f64 {
        self.doppler_hz(v_kmh) / self.f_scs
    }

    /// Radial speed (m/s) of a radar target with two-way Doppler `delta` subcarriers.
    pub fn target_speed(&self, delta: f64) -> f64 {
        self.f_scs * delta * SPEED_OF_LIGHT / (2.0 * self.f_c)
    }

    /// Range (m) of a radar target at a round-trip delay of `tau` samples.
    pub fn target_range(&self, tau: f64) -> f64 {
        tau * SPEED_OF_LIGHT / (2.0 * self.n as f64 * self.f_scs)
    }
}

pub fn kmh_to_ms(v: f64) -> f64 {
    v / 3.6
}

#[derive(Debug, Clone, PartialEq)]
pub struct TappedDelayProfile {
    delays_us: Vec<f64>,
    powers: Vec<f64>,
    sample_delays: Vec<usize>,
}

impl TappedDelayProfile {
    /// Tap delays are rounded to the nearest sample at rate `f_s`.
    pub fn new(delays_us: Vec<f64>, powers: Vec<f64>, f_s: f64) -> Result<Self> {
        if delays_us.is_empty() || delays_us.len() != powers.len() {
            return Err(Error::InvalidParams(
                "profile needs equally many delays and powers".into(),
            ));
        }
        if powers.iter().any(|&p| !(p > 0.0)) || delays_us.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::InvalidParams(
                "tap powers must be positive and delays non-negative".into(),
            ));
        }
        if !(f_s > 0.0) {
            return Err(Error::InvalidParams("sampling rate must be positive".into()));
        }
        let sample_delays: Vec<usize> = delays_us
            .iter()
            .map(|t| (t * 1e-6 * f_s).round() as usize)
            .collect();
        if sample_delays.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams("tap delays must be non-decreasing".into()));
        }
        Ok(Self {
            delays_us,
            powers,
            sample_delays,
        })
    }

    /// ITU Vehicular A.
    pub fn vehicular_a(f_s: f64) -> Result<Self> {
        Self::new(
            vec![0.0, 0.52, 1.05, 1.57, 2.62],
            vec![0.4850, 0.4463, 0.0485, 0.0153, 0.0049],
            f_s,
        )
    }

    /// One tap of unit power at zero delay.
    pub fn single_tap() -> Self {
        Self {
            delays_us: vec![0.0],
            powers: vec![1.0],
            sample_delays: vec![0],
        }
    }

    pub fn delays_us(&self) -> &[f64] {
        &self.delays_us
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn sample_delays(&self) -> &[usize] {
        &self.sample_delays
    }

    pub fn num_taps(&self) -> usize {
        self.powers.len()
    }

    pub fn max_delay(&self) -> usize {
        *self.sample_delays.iter().max().expect("non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    /// Sinusoids per tap.
    pub num_paths: usize,
    /// Maximum Doppler in cycles per sample.
    pub doppler: f64,
}

impl FadingSpec {
    pub fn new(num_paths: usize, doppler: f64) -> Result<Self> {
        if num_paths == 0 || !(doppler >= 0.0) {
            return Err(Error::InvalidParams(
                "fading needs at least one path and a non-negative Doppler".into(),
            ));
        }
        Ok(Self { num_paths, doppler })
    }
}

/// One tap of a sum-of-sinusoids Rayleigh process.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkeTap {
    doppler: f64,
    /// `cos θ_p` of each angle of arrival.
    cos_angles: Vec<f64>,
    phases: Vec<f64>,
}

impl ClarkeTap {
    /// Angles of arrival and phases uniform on `[−π, π)`.
    pub fn draw<R: Rng + ?Sized>(spec: &FadingSpec, rng: &mut R) -> Self {
        let mut uniform = || rng.random_range(-PI..PI);
        let mut cos_angles = Vec::with_capacity(spec.num_paths);
        let mut phases = Vec::with_capacity(spec.num_paths);
        for _ in 0..spec.num_paths {
            cos_angles.push(uniform().cos());
            phases.push(uniform());
        }
        Self {
            doppler: spec.doppler,
            cos_angles,
            phases,
        }
    }

    /// `h[n] = P^{-1/2}·Σ_p e^{j(2π f_D n cos θ_p + φ_p)}`.
    pub fn gain(&self, n: f64) -> Complex64 {
        let sum: Complex64 = self
            .cos_angles
            .iter()
            .zip(&self.phases)
            .map(|(c, p)| Complex64::from_polar(1.0, 2.0 * PI * self.doppler * n * c + p))
            .sum();
        sum / (self.cos_angles.len() as f64).sqrt()
    }

    /// Gains for samples `0..len`.
    pub fn series(&self, len: usize) -> Vec<Complex64> {
        (0..len).map(|n| self.gain(n as f64)).collect()
    }

    /// The same draw with a different maximum Doppler.
    pub fn with_doppler(&self, doppler: f64) -> Self {
        Self {
            doppler,
            ..self.clone()
        }
    }
}

/// Time-varying tapped delay line over a CP-extended symbol.
///
/// `gains[l][n]` is the gain of tap `l` at output sample `n` (after CP
/// removal). The output is `r[n] = Σ_l √P_l·h_l[n]·s_cp[n + N_cp − τ_l]`,
/// i.e. the linear convolution with the CP dropped.
pub fn apply_multipath(
    s_cp: &[Complex64],
    n_cp: usize,
    profile: &TappedDelayProfile,
    gains: &[Vec<Complex64>],
) -> Result<Vec<Complex64>> {
    if n_cp > s_cp.len() {
        return Err(Error::CpTooLong { n_cp, n: s_cp.len() });
    }
    let n = s_cp.len() - n_cp;
    if profile.max_delay() > n_cp {
        return Err(Error::DelayExceedsCp {
            delay: profile.max_delay(),
            n_cp,
        });
    }
    if gains.len() != profile.num_taps() {
        return Err(Error::LengthMismatch {
            expected: profile.num_taps(),
            actual: gains.len(),
        });
    }
    if let Some(g) = gains.iter().find(|g| g.len() < n) {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: g.len(),
        });
    }
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for ((&p, &d), g) in profile.powers().iter().zip(profile.sample_delays()).zip(gains) {
        let amp = p.sqrt();
        for (i, out) in r.iter_mut().enumerate() {
            *out += amp * g[i] * s_cp[i + n_cp - d];
        }
    }
    Ok(r)
}

/// Unit-variance circular complex Gaussian samples.
pub fn complex_noise<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * scale
        })
        .collect()
}

/// Noise standard deviation for an SNR against unit signal power.
pub fn noise_std(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Add complex Gaussian noise of variance `10^{−SNR/10}`.
pub fn awgn<R: Rng + ?Sized>(r: &[Complex64], snr_db: f64, rng: &mut R) -> Vec<Complex64> {
    let sigma = noise_std(snr_db);
    r.iter()
        .zip(complex_noise(r.len(), rng))
        .map(|(s, w)| s + sigma * w)
        .collect()
}

/// Multiply by `e^{j2π(f_o/f_SCS)n/N}`.
pub fn apply_freq_offset(r: &[Complex64], f_o: f64, f_scs: f64, n: usize) -> Vec<Complex64> {
    let nu = f_o / f_scs;
    r.iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, 2.0 * PI * nu * i as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarTarget {
    pub power: f64,
    /// Phase in radians.
    pub phase: f64,
    /// Doppler in subcarrier spacings.
    pub doppler: f64,
    /// Round-trip delay in samples.
    pub delay: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarTargetSet {
    targets: Vec<RadarTarget>,
}

impl RadarTargetSet {
    /// Targets must be ordered by non-increasing power.
    pub fn new(targets: Vec<RadarTarget>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidParams("at least one target is required".into()));
        }
        if targets.iter().any(|t| !(t.power > 0.0)) {
            return Err(Error::InvalidParams("target powers must be positive".into()));
        }
        if targets.windows(2).any(|w| w[0].power < w[1].power) {
            return Err(Error::InvalidParams(
                "target powers must be non-increasing".into(),
            ));
        }
        Ok(Self { targets })
    }

    /// Delays uniform on `0..=max_delay`, Doppler uniform on `[−1, 1]`,
    /// phase uniform on `[−π, π)`.
    pub fn draw<R: Rng + ?Sized>(powers: &[f64], max_delay: usize, rng: &mut R) -> Result<Self> {
        let targets = powers
            .iter()
            .map(|&power| RadarTarget {
                power,
                phase: rng.random_range(-PI..PI),
                doppler: rng.random_range(-1.0..=1.0),
                delay: rng.random_range(0..=max_delay),
            })
            .collect();
        Self::new(targets)
    }

    pub fn targets(&self) -> &[RadarTarget] {
        &self.targets
    }

    pub fn strongest(&self) -> &RadarTarget {
        &self.targets[0]
    }

    pub fn total_power(&self) -> f64 {
        self.targets.iter().map(|t| t.power).sum()
    }
}

/// Superposition of delayed, Doppler-shifted and phase-rotated echoes of a
/// CP-extended symbol, returned after CP removal.
pub fn radar_channel(s_cp: &[Complex64], n_cp: usize, targets: &RadarTargetSet) -> Result<Vec<Complex64>> {
    if n_cp > s_cp.len() {
        return Err(Error::CpTooLong { n_cp, n: s_cp.len() });
    }
    let n = s_cp.len() - n_cp;
    let mut r = vec![Complex64::new(0.0, 0.0); n];
    for t in targets.targets() {
        if t.delay > n_cp {
            return Err(Error::DelayExceedsCp { delay: t.delay, n_cp });
        }
        let amp = Complex64::from_polar(t.power.sqrt(), t.phase);
        for (i, out) in r.iter_mut().enumerate() {
            let ramp = Complex64::from_polar(1.0, 2.0 * PI * t.doppler * i as f64 / n as f64);
            *out += amp * ramp * s_cp[i + n_cp - t.delay];
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{max_abs_diff, mean_power};
    use crate::sequences::{m_sequence, LfsrSpec};
    use crate::waveform::add_cp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn budget() -> LinkBudget {
        LinkBudget::new(15e3, 6e9, 127).unwrap()
    }

    fn mseq() -> Vec<Complex64> {
        m_sequence(&LfsrSpec::default_for_degree(7).unwrap())
            .unwrap()
            .into_samples()
    }

    #[test]
    fn vehicular_a_profile() {
        let p = TappedDelayProfile::vehicular_a(budget().f_s()).unwrap();
        assert_eq!(p.powers(), &[0.4850, 0.4463, 0.0485, 0.0153, 0.0049]);
        assert_eq!(p.delays_us(), &[0.0, 0.52, 1.05, 1.57, 2.62]);
        assert_eq!(p.sample_delays(), &[0, 1, 2, 3, 5]);
        assert!((p.powers().iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(TappedDelayProfile::new(vec![1.0, 0.0], vec![0.5, 0.5], 1e6).is_err());
    }

    #[test]
    fn link_budget_conversions() {
        let b = budget();
        assert!((b.f_s() - 1.905e6).abs() < 1e-6);
        let d = b.doppler_subcarriers(500.0);
        assert!((d - 0.185).abs() < 1e-3, "{d}");
        assert!((b.doppler_per_sample(500.0) * 127.0 - d).abs() < 1e-12);
        // inverse relations
        let v = b.target_speed(1.0);
        assert!((v - 15e3 * SPEED_OF_LIGHT / 12e9).abs() < 1e-9);
        assert!((b.target_range(127.0) - SPEED_OF_LIGHT / 30e3).abs() < 1e-6);
    }

    #[test]
    fn static_fading_has_constant_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let tap = ClarkeTap::draw(&FadingSpec::new(5, 0.0).unwrap(), &mut rng);
        let g = tap.series(127);
        assert!(g.iter().all(|v| (v - g[0]).norm() < 1e-12));
    }

    #[test]
    fn fading_has_unit_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = FadingSpec::new(5, 0.001).unwrap();
        let k = 10_000;
        let avg: f64 = (0..k)
            .map(|_| ClarkeTap::draw(&spec, &mut rng).gain(40.0).norm_sqr())
            .sum::<f64>()
            / k as f64;
        assert!((avg - 1.0).abs() < 0.03, "{avg}");
    }

    fn bessel_j0(x: f64) -> f64 {
        // power series; fine for |x| < 10
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -(x * x / 4.0) / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn fading_autocorrelation_follows_clarke() {
        // Diagnostic with a loose bound: P = 5 sinusoids only approximate J0.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = FadingSpec::new(5, 0.01).unwrap();
        let k = 20_000;
        for lag in [0usize, 10, 20, 40] {
            let acc: Complex64 = (0..k)
                .map(|_| {
                    let t = ClarkeTap::draw(&spec, &mut rng);
                    t.gain(lag as f64) * t.gain(0.0).conj()
                })
                .sum::<Complex64>()
                / k as f64;
            let expect = bessel_j0(2.0 * PI * 0.01 * lag as f64);
            assert!((acc.re - expect).abs() < 0.05, "lag {lag}: {} vs {expect}", acc.re);
        }
    }

    #[test]
    fn single_static_tap_scales_signal() {
        let s = mseq();
        let s_cp = add_cp(&s, 12).unwrap();
        let h = Complex64::new(0.3, -0.7);
        let r = apply_multipath(&s_cp, 12, &TappedDelayProfile::single_tap(), &[vec![h; 127]]).unwrap();
        let expect: Vec<Complex64> = s.iter().map(|v| h * v).collect();
        assert!(max_abs_diff(&r, &expect) < 1e-15);
    }

    #[test]
    fn cp_turns_linear_into_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = crate::sequences::random_mpsk(127, 4, &mut rng).unwrap();
        let s_cp = add_cp(&s, 12).unwrap();
        let profile = TappedDelayProfile::vehicular_a(budget().f_s()).unwrap();
        let spec = FadingSpec::new(5, 0.0).unwrap();
        let taps: Vec<ClarkeTap> = (0..5).map(|_| ClarkeTap::draw(&spec, &mut rng)).collect();
        let gains: Vec<Vec<Complex64>> = taps.iter().map(|t| t.series(127)).collect();
        let r = apply_multipath(&s_cp, 12, &profile, &gains).unwrap();
        let direct: Vec<Complex64> = (0..127)
            .map(|n| {
                (0..5)
                    .map(|l| {
                        let d = profile.sample_delays()[l];
                        profile.powers()[l].sqrt() * gains[l][n] * s[(n + 127 - d) % 127]
                    })
                    .sum()
            })
            .collect();
        assert!(max_abs_diff(&r, &direct) < 1e-12);
        assert!(apply_multipath(&s_cp[8..], 4, &profile, &gains).is_err());
    }

    #[test]
    fn awgn_hits_requested_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let zeros = vec![Complex64::new(0.0, 0.0); 127];
        for snr in [-5.0, 0.0, 7.5] {
            let k = 10_000;
            let p: f64 = (0..k).map(|_| mean_power(&awgn(&zeros, snr, &mut rng))).sum::<f64>() / k as f64;
            let measured = -10.0 * p.log10();
            assert!((measured - snr).abs() < 0.1, "{measured} vs {snr}");
        }
    }

    #[test]
    fn frequency_offset() {
        let s = mseq();
        assert_eq!(apply_freq_offset(&s, 0.0, 15e3, 127), s);
        let ones = vec![Complex64::new(1.0, 0.0); 128];
        let r = apply_freq_offset(&ones, 15e3, 15e3, 127);
        assert!((r[127] - 1.0).norm() < 1e-12);
        assert!((r[1] - Complex64::from_polar(1.0, 2.0 * PI / 127.0)).norm() < 1e-15);
        let ab = apply_freq_offset(&apply_freq_offset(&s, 1234.0, 15e3, 127), -777.0, 15e3, 127);
        let sum = apply_freq_offset(&s, 457.0, 15e3, 127);
        assert!(max_abs_diff(&ab, &sum) < 1e-12);
    }

    #[test]
    fn radar_single_target_is_cyclic_shift() {
        let s = mseq();
        let s_cp = add_cp(&s, 12).unwrap();
        let targets = RadarTargetSet::new(vec![RadarTarget { power: 1.0, phase: 0.0, doppler: 0.0, delay: 7 }]).unwrap();
        let r = radar_channel(&s_cp, 12, &targets).unwrap();
        let shifted: Vec<Complex64> = (0..127).map(|n| s[(n + 120) % 127]).collect();
        assert!(max_abs_diff(&r, &shifted) < 1e-15);
        let far = RadarTargetSet::new(vec![RadarTarget { power: 1.0, phase: 0.0, doppler: 0.0, delay: 13 }]).unwrap();
        assert!(radar_channel(&s_cp, 12, &far).is_err());
    }

    #[test]
    fn radar_matches_direct_sum_and_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let powers = [1.0, 0.75, 0.5, 0.25];
        let mut total = 0.0;
        let k = 2000;
        for _ in 0..k {
            let s = crate::sequences::random_mpsk(127, 4, &mut rng).unwrap();
            let s_cp = add_cp(&s, 12).unwrap();
            let targets = RadarTargetSet::draw(&powers, 12, &mut rng).unwrap();
            let r = radar_channel(&s_cp, 12, &targets).unwrap();
            let direct: Vec<Complex64> = (0..127)
                .map(|n| {
                    targets
                        .targets()
                        .iter()
                        .map(|t| {
                            t.power.sqrt()
                                * Complex64::from_polar(1.0, t.phase + 2.0 * PI * t.doppler * n as f64 / 127.0)
                                * s[(n + 127 - t.delay) % 127]
                        })
                        .sum()
                })
                .collect();
            assert!(max_abs_diff(&r, &direct) < 1e-12);
            assert!(targets.targets().iter().all(|t| t.delay <= 12 && t.doppler.abs() <= 1.0));
            total += mean_power(&r);
        }
        let avg = total / k as f64;
        assert!((avg - 2.5).abs() < 0.05, "{avg}");
        assert!(RadarTargetSet::new(vec![
            RadarTarget { power: 0.5, phase: 0.0, doppler: 0.0, delay: 0 },
            RadarTarget { power: 1.0, phase: 0.0, doppler: 0.0, delay: 0 },
        ])
        .is_err());
    }
}
