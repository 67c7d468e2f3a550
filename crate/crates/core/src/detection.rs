//! Correlator banks, threshold calibration and the Monte-Carlo acquisition
//! and tracking experiments.
//!
//! Every trial draws its randomness from substreams keyed by the master seed,
//! the experiment domain and the trial index only. Schemes that differ in
//! waveform, sequence, SNR or velocity therefore see the same channel and
//! noise draws. Correlation is linear in the received signal, so each trial
//! correlates the noiseless signal and a unit-variance noise vector once and
//! combines the two maps for every SNR point.

use crate::channel::{
    apply_freq_offset, apply_multipath, complex_noise, noise_std, radar_channel, ClarkeTap,
    FadingSpec, LinkBudget, RadarTargetSet, TappedDelayProfile,
};
use crate::dft::FftPlan;
use crate::error::{Error, Result};
use crate::rng::{domain, substream};
use crate::sequences::SequenceSpec;
use crate::waveform::{add_cp, Waveform};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{self, Write};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Trials are reduced in chunks of this size, in order, so results do not
/// depend on the number of worker threads.
const CHUNK: usize = 64;

/// `|(1/N)·Σ_n r[n]·s*[n−τ mod N]·e^{−j2πΔn/N}|`
pub fn correlate_periodic(r: &[Complex64], s_ref: &[Complex64], tau: i64, delta: f64) -> Result<f64> {
    let n = s_ref.len();
    if r.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: r.len(),
        });
    }
    let shift = crate::math::rem(-tau, n);
    let sum: Complex64 = (0..n)
        .map(|i| {
            let ph = Complex64::from_polar(1.0, -2.0 * PI * delta * i as f64 / n as f64);
            r[i] * s_ref[(i + shift) % n].conj() * ph
        })
        .sum();
    Ok(sum.norm() / n as f64)
}

/// Doppler and delay hypotheses searched by the correlator bank.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisGrid {
    dopplers: Vec<f64>,
    delays: Vec<usize>,
}

impl HypothesisGrid {
    pub fn new(dopplers: Vec<f64>, delays: Vec<usize>, n: usize) -> Result<Self> {
        if dopplers.is_empty() || delays.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if let Some(&d) = delays.iter().find(|&&d| d >= n) {
            return Err(Error::IndexOutOfRange { index: d as i64, n });
        }
        Ok(Self { dopplers, delays })
    }

    /// `{(2i − (H−1))/H : i = 0..H}`, e.g. `{−2/3, 0, 2/3}` for `H = 3`.
    pub fn doppler_set(h: usize) -> Vec<f64> {
        (0..h)
            .map(|i| (2.0 * i as f64 - (h as f64 - 1.0)) / h as f64)
            .collect()
    }

    /// `H` Doppler hypotheses and every delay `0..N`.
    pub fn acquisition(h: usize, n: usize) -> Result<Self> {
        Self::new(Self::doppler_set(h), (0..n).collect(), n)
    }

    /// `N` Doppler hypotheses and delays `0..=n_cp`.
    pub fn tracking(n: usize, n_cp: usize) -> Result<Self> {
        Self::new(Self::doppler_set(n), (0..=n_cp).collect(), n)
    }

    pub fn dopplers(&self) -> &[f64] {
        &self.dopplers
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn len(&self) -> usize {
        self.dopplers.len() * self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(τ, Δ)` of a flat map index. Maps are delay-major: all Doppler
    /// hypotheses of the first delay come first.
    pub fn point(&self, index: usize) -> (usize, f64) {
        let nd = self.dopplers.len();
        (self.delays[index / nd], self.dopplers[index % nd])
    }
}

/// A reference symbol prepared for correlation.
#[derive(Debug, Clone)]
pub struct Reference {
    samples: Vec<Complex64>,
    spectrum_conj: Vec<Complex64>,
}

/// Correlates a received symbol against every hypothesis of a grid.
///
/// Full delay ranges use one FFT pair per Doppler hypothesis; short delay
/// ranges are summed directly.
#[derive(Debug, Clone)]
pub struct CorrelatorBank {
    n: usize,
    grid: HypothesisGrid,
    /// `e^{−j2πΔn/N}` per Doppler hypothesis.
    ramps: Vec<Vec<Complex64>>,
    fft: FftPlan,
    use_fft: bool,
}

impl CorrelatorBank {
    pub fn new(n: usize, grid: HypothesisGrid) -> Self {
        let ramps = grid
            .dopplers
            .iter()
            .map(|&d| {
                (0..n)
                    .map(|i| Complex64::from_polar(1.0, -2.0 * PI * d * i as f64 / n as f64))
                    .collect()
            })
            .collect();
        let use_fft = grid.delays.len() > 16;
        Self {
            n,
            grid,
            ramps,
            fft: FftPlan::new(n),
            use_fft,
        }
    }

    /// Force the direct or FFT path.
    pub fn with_fft(mut self, use_fft: bool) -> Self {
        self.use_fft = use_fft;
        self
    }

    pub fn grid(&self) -> &HypothesisGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reference(&self, s_ref: &[Complex64]) -> Result<Reference> {
        if s_ref.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: s_ref.len(),
            });
        }
        let mut spectrum = s_ref.to_vec();
        self.fft.forward(&mut spectrum);
        Ok(Reference {
            samples: s_ref.to_vec(),
            spectrum_conj: spectrum.iter().map(|v| v.conj()).collect(),
        })
    }

    /// Complex correlator outputs, one per grid point, delay-major.
    pub fn correlate(&self, r: &[Complex64], reference: &Reference) -> Result<Vec<Complex64>> {
        let n = self.n;
        if r.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: r.len(),
            });
        }
        let nd = self.grid.dopplers.len();
        let mut out = vec![ZERO; self.grid.len()];
        if self.use_fft {
            let scale = 1.0 / (n as f64 * n as f64);
            let mut buf = vec![ZERO; n];
            for (di, ramp) in self.ramps.iter().enumerate() {
                for ((b, rv), pv) in buf.iter_mut().zip(r).zip(ramp) {
                    *b = rv * pv;
                }
                self.fft.forward(&mut buf);
                for (b, s) in buf.iter_mut().zip(&reference.spectrum_conj) {
                    *b *= s;
                }
                self.fft.inverse(&mut buf);
                for (ti, &t) in self.grid.delays.iter().enumerate() {
                    out[ti * nd + di] = buf[t] * scale;
                }
            }
        } else {
            let mut prod = vec![ZERO; n];
            for (ti, &t) in self.grid.delays.iter().enumerate() {
                for (i, p) in prod.iter_mut().enumerate() {
                    *p = r[i] * reference.samples[(i + n - t) % n].conj();
                }
                for (di, ramp) in self.ramps.iter().enumerate() {
                    let sum: Complex64 = prod.iter().zip(ramp).map(|(a, b)| a * b).sum();
                    out[ti * nd + di] = sum / n as f64;
                }
            }
        }
        Ok(out)
    }
}

/// Largest `|a + σ·b|` over a map. Scanning in storage order with a strict
/// comparison keeps the smallest delay, then the smallest Doppler, on ties.
pub fn combined_peak(signal: &[Complex64], noise: &[Complex64], sigma: f64) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, (a, b)) in signal.iter().zip(noise).enumerate() {
        let v = (a + sigma * b).norm_sqr();
        if v > best.1 {
            best = (i, v);
        }
    }
    (best.0, best.1.sqrt())
}

fn map_peak(map: &[Complex64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in map.iter().enumerate() {
        let p = v.norm_sqr();
        if p > best.1 {
            best = (i, p);
        }
    }
    (best.0, best.1.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPeak {
    pub tau: usize,
    pub delta: f64,
    pub value: f64,
}

/// Exhaustive search of the grid for the largest correlator magnitude.
pub fn detect_timing(r: &[Complex64], s_ref: &[Complex64], grid: &HypothesisGrid) -> Result<GridPeak> {
    let bank = CorrelatorBank::new(s_ref.len(), grid.clone());
    let map = bank.correlate(r, &bank.reference(s_ref)?)?;
    let (idx, value) = map_peak(&map);
    let (tau, delta) = grid.point(idx);
    Ok(GridPeak { tau, delta, value })
}

/// Cyclic distance between two delays.
pub fn cyclic_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

/// A peak judged against the true delays and Doppler of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub tau_star: usize,
    pub delta_star: f64,
    pub peak_value: f64,
    pub hit: bool,
    /// Smallest cyclic delay error to any true delay, in seconds.
    pub timing_error_s: f64,
    pub tau_error: usize,
    pub doppler_error: f64,
}

impl DetectionOutcome {
    /// Hit when the detected delay is one of `true_delays`.
    pub fn judge(peak: GridPeak, true_delays: &[usize], true_doppler: f64, n: usize, f_s: f64) -> Self {
        let tau_error = true_delays
            .iter()
            .map(|&t| cyclic_distance(peak.tau, t, n))
            .min()
            .unwrap_or(n);
        Self {
            tau_star: peak.tau,
            delta_star: peak.delta,
            peak_value: peak.value,
            hit: tau_error == 0,
            timing_error_s: tau_error as f64 / f_s,
            tau_error,
            doppler_error: (peak.delta - true_doppler).abs(),
        }
    }
}

/// Noise-only trials needed to estimate the `1 − p_fa` quantile.
pub fn required_calibration_trials(p_fa: f64) -> usize {
    (100.0 / p_fa - 1e-9).ceil() as usize
}

/// Detection threshold for unit-variance noise: the empirical `1 − p_fa`
/// quantile of the grid maximum, taken as an order statistic without
/// interpolation so that `Pr[max ≥ Γ] ≤ p_fa` on the calibration set.
pub fn calibrate_threshold(
    s_ref: &[Complex64],
    grid: &HypothesisGrid,
    p_fa: f64,
    noise_trials: usize,
    seed: u64,
) -> Result<f64> {
    let bank = CorrelatorBank::new(s_ref.len(), grid.clone());
    let reference = bank.reference(s_ref)?;
    calibrate_threshold_by(&bank, p_fa, noise_trials, seed, |_| Ok(reference.clone()))
}

/// As [`calibrate_threshold`], with a reference per calibration trial (for
/// random transmit sequences).
pub fn calibrate_threshold_by<F>(
    bank: &CorrelatorBank,
    p_fa: f64,
    noise_trials: usize,
    seed: u64,
    reference: F,
) -> Result<f64>
where
    F: Fn(usize) -> Result<Reference> + Sync,
{
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::InvalidParams(format!("p_fa = {p_fa} must lie in (0, 1)")));
    }
    let required = required_calibration_trials(p_fa);
    if noise_trials < required {
        return Err(Error::InsufficientTrials {
            trials: noise_trials,
            p_fa,
            required,
        });
    }
    let n = bank.n();
    let mut stats = (0..noise_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, &[domain::CALIBRATION, k as u64, domain::NOISE]);
            let w = complex_noise(n, &mut rng);
            let map = bank.correlate(&w, &reference(k)?)?;
            Ok(map_peak(&map).1)
        })
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    let index = (noise_trials as f64 * (1.0 - p_fa)).ceil() as usize;
    if index >= noise_trials {
        return Err(Error::InsufficientTrials {
            trials: noise_trials,
            p_fa,
            required,
        });
    }
    Ok(stats[index])
}

/// Monte-Carlo summary at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentStats {
    pub snr_db: f64,
    pub trials: usize,
    /// Misses divided by trials.
    pub p_md: f64,
    /// Trials entering the error statistics.
    pub counted: usize,
    pub mean_te_s: f64,
    pub std_te_s: f64,
    pub mean_abs_tau_err: f64,
    pub std_abs_tau_err: f64,
    pub mean_abs_delta_err: f64,
    pub std_abs_delta_err: f64,
}

impl ExperimentStats {
    /// Half-width of the normal 95% confidence interval of the mean delay error.
    pub fn ci95_tau(&self) -> f64 {
        1.96 * self.std_abs_tau_err / (self.counted as f64).sqrt()
    }

    pub fn ci95_delta(&self) -> f64 {
        1.96 * self.std_abs_delta_err / (self.counted as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    fn std(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        ((self.sum_sq - self.count as f64 * m * m) / (self.count as f64 - 1.0))
            .max(0.0)
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PointAccum {
    trials: usize,
    misses: usize,
    te: Moments,
    tau: Moments,
    delta: Moments,
}

impl PointAccum {
    fn merge(&mut self, other: &PointAccum) {
        self.trials += other.trials;
        self.misses += other.misses;
        self.te.merge(&other.te);
        self.tau.merge(&other.tau);
        self.delta.merge(&other.delta);
    }

    fn finish(&self, snr_db: f64) -> ExperimentStats {
        ExperimentStats {
            snr_db,
            trials: self.trials,
            p_md: self.misses as f64 / self.trials as f64,
            counted: self.te.count,
            mean_te_s: self.te.mean(),
            std_te_s: self.te.std(),
            mean_abs_tau_err: self.tau.mean(),
            std_abs_tau_err: self.tau.std(),
            mean_abs_delta_err: self.delta.mean(),
            std_abs_delta_err: self.delta.std(),
        }
    }
}

/// Run `trials` independent trials, each filling one accumulator per
/// operating point, and merge them in trial order.
fn run_trials<F>(trials: usize, points: usize, trial: F) -> Result<Vec<PointAccum>>
where
    F: Fn(usize, &mut [PointAccum]) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![PointAccum::default(); points];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                trial(t, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![PointAccum::default(); points];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

fn check_experiment(trials: usize, snrs: &[f64]) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if snrs.is_empty() {
        return Err(Error::InvalidConfig("at least one SNR point is required".into()));
    }
    if snrs.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidConfig("SNR values must be finite".into()));
    }
    Ok(())
}

/// Timing acquisition over a fading multipath channel with a random carrier
/// frequency offset.
#[derive(Debug, Clone)]
pub struct AcquisitionConfig {
    pub waveform: Waveform,
    pub sequence: SequenceSpec,
    /// Number of Doppler hypotheses `H`.
    pub hypotheses: usize,
    pub profile: TappedDelayProfile,
    pub num_paths: usize,
    pub budget: LinkBudget,
    pub velocities_kmh: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// Offsets are uniform on `[−max, max]` subcarrier spacings.
    pub max_offset: f64,
    pub trials: usize,
    pub seed: u64,
    /// Restrict error statistics to hits instead of all trials.
    pub errors_on_hits_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionPoint {
    pub velocity_kmh: f64,
    pub stats: ExperimentStats,
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        check_experiment(self.trials, &self.snr_db)?;
        let n = self.waveform.params().n();
        if self.budget.n != n {
            return Err(Error::InvalidConfig(format!(
                "link budget N = {} differs from waveform N = {n}",
                self.budget.n
            )));
        }
        if self.hypotheses == 0 {
            return Err(Error::EmptyGrid);
        }
        if self.velocities_kmh.is_empty() || self.velocities_kmh.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "velocities must be a non-empty list of non-negative values".into(),
            ));
        }
        if !(self.max_offset >= 0.0) {
            return Err(Error::InvalidConfig("maximum offset must be non-negative".into()));
        }
        FadingSpec::new(self.num_paths, 0.0)?;
        let n_cp = self.waveform.params().n_cp();
        if self.profile.max_delay() > n_cp {
            return Err(Error::DelayExceedsCp {
                delay: self.profile.max_delay(),
                n_cp,
            });
        }
        if self.sequence.is_random() {
            return Err(Error::InvalidConfig(
                "acquisition needs a fixed sequence".into(),
            ));
        }
        self.sequence.fixed(n)?;
        Ok(())
    }
}

/// Points are ordered by velocity, then SNR, as listed in the config.
pub fn run_acquisition(config: &AcquisitionConfig) -> Result<Vec<AcquisitionPoint>> {
    config.validate()?;
    let params = config.waveform.params();
    let (n, n_cp) = (params.n(), params.n_cp());
    let x = config.sequence.fixed(n)?.expect("validated fixed sequence");
    let s = config.waveform.modulate(&x)?;
    let s_cp = add_cp(&s, n_cp)?;
    let bank = CorrelatorBank::new(n, HypothesisGrid::acquisition(config.hypotheses, n)?);
    let reference = bank.reference(&s)?;
    let sigmas: Vec<f64> = config.snr_db.iter().map(|&v| noise_std(v)).collect();
    let dopplers: Vec<f64> = config
        .velocities_kmh
        .iter()
        .map(|&v| config.budget.doppler_per_sample(v))
        .collect();
    let f_s = config.budget.f_s();
    let base = FadingSpec::new(config.num_paths, 0.0)?;
    let n_snr = sigmas.len();
    let seed = config.seed;

    let acc = run_trials(config.trials, dopplers.len() * n_snr, |t, acc| {
        let key = |sub: u64, idx: u64| substream(seed, &[domain::ACQUISITION, t as u64, sub, idx]);
        let offset = key(domain::OFFSET, 0).random_range(-config.max_offset..=config.max_offset);
        let taps: Vec<ClarkeTap> = (0..config.profile.num_taps())
            .map(|l| ClarkeTap::draw(&base, &mut key(domain::TAP, l as u64)))
            .collect();
        let w = complex_noise(n, &mut key(domain::NOISE, 0));
        let noise_map = bank.correlate(&w, &reference)?;
        for (vi, &fd) in dopplers.iter().enumerate() {
            let gains: Vec<Vec<Complex64>> = taps.iter().map(|tap| tap.with_doppler(fd).series(n)).collect();
            let r = apply_multipath(&s_cp, n_cp, &config.profile, &gains)?;
            let r = apply_freq_offset(&r, offset, 1.0, n);
            let signal_map = bank.correlate(&r, &reference)?;
            for (si, &sigma) in sigmas.iter().enumerate() {
                let (idx, value) = combined_peak(&signal_map, &noise_map, sigma);
                let (tau, delta) = bank.grid().point(idx);
                let peak = GridPeak { tau, delta, value };
                let out = DetectionOutcome::judge(peak, config.profile.sample_delays(), offset, n, f_s);
                let a = &mut acc[vi * n_snr + si];
                a.trials += 1;
                if !out.hit {
                    a.misses += 1;
                }
                if out.hit || !config.errors_on_hits_only {
                    a.te.push(out.timing_error_s);
                    a.tau.push(out.tau_error as f64);
                    a.delta.push(out.doppler_error);
                }
            }
        }
        Ok(())
    })?;

    Ok(acc
        .iter()
        .enumerate()
        .map(|(i, a)| AcquisitionPoint {
            velocity_kmh: config.velocities_kmh[i / n_snr],
            stats: a.finish(config.snr_db[i % n_snr]),
        })
        .collect())
}

/// Range and Doppler estimation of the strongest of several point targets.
#[derive(Debug, Clone)]
pub struct TrackingConfig {
    pub waveform: Waveform,
    pub sequence: SequenceSpec,
    /// Target powers, strongest first.
    pub powers: Vec<f64>,
    pub p_fa: f64,
    pub calibration_trials: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub budget: LinkBudget,
    pub seed: u64,
}

impl TrackingConfig {
    pub fn validate(&self) -> Result<()> {
        check_experiment(self.trials, &self.snr_db)?;
        let n = self.waveform.params().n();
        if self.budget.n != n {
            return Err(Error::InvalidConfig(format!(
                "link budget N = {} differs from waveform N = {n}",
                self.budget.n
            )));
        }
        RadarTargetSet::new(
            self.powers
                .iter()
                .map(|&power| crate::channel::RadarTarget {
                    power,
                    phase: 0.0,
                    doppler: 0.0,
                    delay: 0,
                })
                .collect(),
        )?;
        if !(self.p_fa > 0.0 && self.p_fa < 1.0) {
            return Err(Error::InvalidConfig(format!("p_fa = {} must lie in (0, 1)", self.p_fa)));
        }
        let required = required_calibration_trials(self.p_fa);
        if self.calibration_trials < required {
            return Err(Error::InsufficientTrials {
                trials: self.calibration_trials,
                p_fa: self.p_fa,
                required,
            });
        }
        self.sequence.fixed(n)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    /// Threshold for unit-variance noise; scaled by the noise level per SNR.
    pub threshold: f64,
    pub points: Vec<ExperimentStats>,
}

/// A trial counts as detected when the grid peak reaches the threshold;
/// delay and Doppler errors against the strongest target are averaged over
/// detected trials. `p_md` is the fraction of trials without a detection.
pub fn run_tracking(config: &TrackingConfig) -> Result<TrackingResult> {
    config.validate()?;
    let params = config.waveform.params();
    let (n, n_cp) = (params.n(), params.n_cp());
    let bank = CorrelatorBank::new(n, HypothesisGrid::tracking(n, n_cp)?);
    let fixed = config.sequence.fixed(n)?;
    let seed = config.seed;
    let waveform = &config.waveform;
    let symbol = |x: &[Complex64]| waveform.modulate(x).map(|s| s.into_samples());

    let threshold = match &fixed {
        Some(x) => {
            let reference = bank.reference(&symbol(x)?)?;
            calibrate_threshold_by(&bank, config.p_fa, config.calibration_trials, seed, |_| {
                Ok(reference.clone())
            })?
        }
        None => calibrate_threshold_by(&bank, config.p_fa, config.calibration_trials, seed, |k| {
            let mut rng = substream(seed, &[domain::CALIBRATION, k as u64, domain::SEQUENCE]);
            let x = config.sequence.realize(n, &mut rng)?;
            bank.reference(&symbol(&x)?)
        })?,
    };
    let fixed_symbol = fixed.as_ref().map(|x| symbol(x)).transpose()?;
    let sigmas: Vec<f64> = config.snr_db.iter().map(|&v| noise_std(v)).collect();

    let acc = run_trials(config.trials, sigmas.len(), |t, acc| {
        let key = |sub: u64| substream(seed, &[domain::TRACKING, t as u64, sub]);
        let s = match &fixed_symbol {
            Some(s) => s.clone(),
            None => symbol(&config.sequence.realize(n, &mut key(domain::SEQUENCE))?)?,
        };
        let targets = RadarTargetSet::draw(&config.powers, n_cp, &mut key(domain::TARGETS))?;
        let r = radar_channel(&add_cp(&s, n_cp)?, n_cp, &targets)?;
        let w = complex_noise(n, &mut key(domain::NOISE));
        let reference = bank.reference(&s)?;
        let signal_map = bank.correlate(&r, &reference)?;
        let noise_map = bank.correlate(&w, &reference)?;
        let truth = targets.strongest();
        for (si, &sigma) in sigmas.iter().enumerate() {
            let (idx, value) = combined_peak(&signal_map, &noise_map, sigma);
            let a = &mut acc[si];
            a.trials += 1;
            if value < sigma * threshold {
                a.misses += 1;
                continue;
            }
            let (tau, delta) = bank.grid().point(idx);
            let tau_err = tau.abs_diff(truth.delay) as f64;
            a.te.push(tau_err / config.budget.f_s());
            a.tau.push(tau_err);
            a.delta.push((delta - truth.doppler).abs());
        }
        Ok(())
    })?;

    Ok(TrackingResult {
        threshold,
        points: acc
            .iter()
            .zip(&config.snr_db)
            .map(|(a, &snr)| a.finish(snr))
            .collect(),
    })
}

/// SNR at which `p_md` first falls to `target`, interpolating `log10(p_md)`
/// linearly between the bracketing points (linearly in `p_md` when the lower
/// point is zero). `points` must be sorted by SNR.
pub fn required_snr_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(snr, p)) = points.first() {
        if p <= target {
            return Some(snr);
        }
    }
    points.windows(2).find_map(|w| {
        let ((s0, p0), (s1, p1)) = (w[0], w[1]);
        if !(p0 > target && p1 <= target) {
            return None;
        }
        let frac = if p1 > 0.0 {
            (p0.log10() - target.log10()) / (p0.log10() - p1.log10())
        } else {
            (p0 - target) / (p0 - p1)
        };
        Some(s0 + frac * (s1 - s0))
    })
}

/// One row of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub waveform: String,
    pub sequence: String,
    pub velocity_kmh: Option<f64>,
    pub stats: ExperimentStats,
}

/// CSV with header
/// `waveform,sequence,velocity_kmh,snr_db,trials,p_md,mean_te_s,std_te_s,mean_abs_tau_err,mean_abs_delta_err`.
/// The velocity column is empty for experiments without one.
pub fn write_results_csv<W: Write>(rows: &[ResultRow], w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "waveform,sequence,velocity_kmh,snr_db,trials,p_md,mean_te_s,std_te_s,mean_abs_tau_err,mean_abs_delta_err"
    )?;
    for row in rows {
        let s = &row.stats;
        let v = row.velocity_kmh.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{v},{},{},{},{},{},{},{}",
            row.waveform,
            row.sequence,
            s.snr_db,
            s.trials,
            s.p_md,
            s.mean_te_s,
            s.std_te_s,
            s.mean_abs_tau_err,
            s.mean_abs_delta_err
        )?;
    }
    Ok(())
}
