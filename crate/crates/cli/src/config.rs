//! TOML configuration. Every key is optional; defaults reproduce the
//! reference setups (N = 127, 15 kHz subcarriers at 6 GHz).

use ccdt_core::channel::{LinkBudget, TappedDelayProfile};
use ccdt_core::papr::SequenceFamily;
use ccdt_core::sequences::SequenceSpec;
use ccdt_core::{Waveform, WaveformKind, WaveformParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed for every random draw.
    pub seed: u64,
    pub verify: VerifySection,
    pub af: AfSection,
    pub papr: PaprSection,
    pub acquire: AcquireSection,
    pub track: TrackSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            verify: VerifySection::default(),
            af: AfSection::default(),
            papr: PaprSection::default(),
            acquire: AcquireSection::default(),
            track: TrackSection::default(),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Chirp basis `N`, `2α`, `2β`, `γ`. Rates are doubled so half-integer
/// values stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chirp {
    pub n: usize,
    pub two_alpha: i64,
    pub two_beta: i64,
    #[serde(default)]
    pub gamma: f64,
}

impl Chirp {
    /// α = 2, β = 1.
    pub const SHAPE: Chirp = Chirp {
        n: 127,
        two_alpha: 4,
        two_beta: 2,
        gamma: 0.0,
    };
    /// α = −2, β = −2.
    pub const EXPERIMENT: Chirp = Chirp {
        n: 127,
        two_alpha: -4,
        two_beta: -4,
        gamma: 0.0,
    };

    pub fn params(&self) -> Result<WaveformParams, CliError> {
        Ok(WaveformParams::new(self.n, self.two_alpha, self.two_beta, self.gamma)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceConfig {
    /// Degree defaults to `log2(N + 1)`.
    Mseq {
        degree: Option<u32>,
        taps: Option<Vec<u32>>,
    },
    Zc {
        root: i64,
    },
    Dft {
        index: usize,
    },
    Qpsk,
    Psk {
        order: usize,
    },
}

impl SequenceConfig {
    pub fn spec(&self, n: usize) -> SequenceSpec {
        match self {
            SequenceConfig::Mseq { degree, taps } => SequenceSpec::MSequence {
                degree: degree.unwrap_or_else(|| (n + 1).ilog2()),
                taps: taps.clone(),
            },
            SequenceConfig::Zc { root } => SequenceSpec::ZadoffChu { root: *root },
            SequenceConfig::Dft { index } => SequenceSpec::Dft { index: *index },
            SequenceConfig::Qpsk => SequenceSpec::RandomPsk { order: 4 },
            SequenceConfig::Psk { order } => SequenceSpec::RandomPsk { order: *order },
        }
    }
}

fn mseq() -> SequenceConfig {
    SequenceConfig::Mseq {
        degree: None,
        taps: None,
    }
}

fn parse_kind(name: &str) -> Result<WaveformKind, CliError> {
    name.parse().map_err(|e: ccdt_core::Error| CliError::Config(e.to_string()))
}

fn check_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Config("trials must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub chirp: Chirp,
    pub zc_root: i64,
    pub dft_index: usize,
    /// Overrides every per-property tolerance.
    pub tol: Option<f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            chirp: Chirp::SHAPE,
            zc_root: 3,
            dft_index: 5,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealAxis {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RealAxis {
    /// `start, start + step, …` up to `stop` inclusive.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let RealAxis { start, stop, step } = *self;
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
            return Err(CliError::Config(format!("empty or invalid grid {self:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Snap to the step so integer grids stay integral.
        Ok((0..count)
            .map(|i| {
                let v = start + i as f64 * step;
                let r = v.round();
                if (v - r).abs() < 1e-9 {
                    r
                } else {
                    v
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntAxis {
    pub start: i64,
    pub stop: i64,
}

impl IntAxis {
    pub fn values(&self) -> Result<Vec<i64>, CliError> {
        if self.stop < self.start {
            return Err(CliError::Config(format!("empty grid {self:?}")));
        }
        Ok((self.start..=self.stop).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AfSection {
    pub waveform: String,
    pub chirp: Chirp,
    /// Length of the zero-padded symbol; `τ` counts its samples.
    pub upsampled_len: Option<usize>,
    pub sequence: SequenceConfig,
    pub deltas: RealAxis,
    pub taus: IntAxis,
}

impl Default for AfSection {
    fn default() -> Self {
        Self {
            waveform: "ccdt".into(),
            chirp: Chirp::SHAPE,
            upsampled_len: None,
            sequence: SequenceConfig::Zc { root: 4 },
            deltas: RealAxis {
                start: 0.0,
                stop: 126.0,
                step: 1.0,
            },
            taus: IntAxis { start: 0, stop: 126 },
        }
    }
}

pub struct AfPlan {
    pub waveform: Waveform,
    pub upsampled_len: usize,
    pub sequence: SequenceSpec,
    pub deltas: Vec<f64>,
    pub taus: Vec<i64>,
}

impl AfSection {
    pub fn plan(&self) -> Result<AfPlan, CliError> {
        let params = self.chirp.params()?;
        let n = params.n();
        let upsampled_len = self.upsampled_len.unwrap_or(n);
        params.with_upsampled_len(upsampled_len)?;
        let sequence = self.sequence.spec(n);
        sequence.fixed(n)?;
        Ok(AfPlan {
            waveform: Waveform::new(parse_kind(&self.waveform)?, params)?,
            upsampled_len,
            sequence,
            deltas: self.deltas.values()?,
            taus: self.taus.values()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaprSection {
    pub waveforms: Vec<String>,
    pub family: String,
    pub chirp: Chirp,
    pub upsampled_len: usize,
}

impl Default for PaprSection {
    fn default() -> Self {
        Self {
            waveforms: vec!["ofdm".into(), "dfts-ofdm".into(), "ccdt".into()],
            family: "zc".into(),
            chirp: Chirp::SHAPE,
            upsampled_len: 4 * 127,
        }
    }
}

pub struct PaprPlan {
    pub waveforms: Vec<Waveform>,
    pub family: SequenceFamily,
    pub upsampled_len: usize,
}

impl PaprSection {
    pub fn plan(&self) -> Result<PaprPlan, CliError> {
        let params = self.chirp.params()?;
        params.with_upsampled_len(self.upsampled_len)?;
        if self.waveforms.is_empty() {
            return Err(CliError::Config("no waveforms listed".into()));
        }
        Ok(PaprPlan {
            waveforms: self
                .waveforms
                .iter()
                .map(|w| Ok(Waveform::new(parse_kind(w)?, params)?))
                .collect::<Result<_, CliError>>()?,
            family: self.family.parse()?,
            upsampled_len: self.upsampled_len,
        })
    }
}

/// Link parameters shared by the detection experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub f_scs: f64,
    pub f_c: f64,
    pub n_cp: usize,
}

impl Default for Link {
    fn default() -> Self {
        Self {
            f_scs: 15e3,
            f_c: 6e9,
            n_cp: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub waveform: String,
    pub sequence: SequenceConfig,
    /// Number of Doppler hypotheses.
    pub hypotheses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPreset {
    VehicularA,
    SingleTap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquireSection {
    pub chirp: Chirp,
    pub link: Link,
    pub channel: ChannelPreset,
    /// Sinusoids per Clarke tap.
    pub num_paths: usize,
    pub schemes: Vec<Scheme>,
    pub velocities_kmh: Vec<f64>,
    pub snr_db: Vec<f64>,
    /// Frequency offsets are uniform on `±max_offset` subcarriers.
    pub max_offset: f64,
    pub trials: usize,
    pub errors_on_hits_only: bool,
}

impl Default for AcquireSection {
    fn default() -> Self {
        let mut schemes = Vec::new();
        for w in ["ofdm", "dfts-ofdm", "ccdt"] {
            for h in [3, 5, 7] {
                schemes.push(Scheme {
                    waveform: w.into(),
                    sequence: mseq(),
                    hypotheses: h,
                });
            }
        }
        // 2α = −4 ≡ 123, the ridge root
        schemes.push(Scheme {
            waveform: "ccdt".into(),
            sequence: SequenceConfig::Zc { root: -4 },
            hypotheses: 1,
        });
        Self {
            chirp: Chirp::EXPERIMENT,
            link: Link::default(),
            channel: ChannelPreset::VehicularA,
            num_paths: 5,
            schemes,
            velocities_kmh: vec![0.0, 100.0, 250.0, 350.0, 500.0],
            snr_db: (-6..=8).map(f64::from).collect(),
            max_offset: 1.0,
            trials: 10_000,
            errors_on_hits_only: false,
        }
    }
}

impl AcquireSection {
    pub fn plan(&self, seed: u64) -> Result<Vec<ccdt_core::detection::AcquisitionConfig>, CliError> {
        check_trials(self.trials)?;
        let params = self.chirp.params()?.with_cp(self.link.n_cp)?;
        let budget = LinkBudget::new(self.link.f_scs, self.link.f_c, params.n())?;
        let profile = match self.channel {
            ChannelPreset::VehicularA => TappedDelayProfile::vehicular_a(budget.f_s())?,
            ChannelPreset::SingleTap => TappedDelayProfile::single_tap(),
        };
        if self.schemes.is_empty() {
            return Err(CliError::Config("no acquisition schemes listed".into()));
        }
        self.schemes
            .iter()
            .map(|s| {
                let cfg = ccdt_core::detection::AcquisitionConfig {
                    waveform: Waveform::new(parse_kind(&s.waveform)?, params)?,
                    sequence: s.sequence.spec(params.n()),
                    hypotheses: s.hypotheses,
                    profile: profile.clone(),
                    num_paths: self.num_paths,
                    budget,
                    velocities_kmh: self.velocities_kmh.clone(),
                    snr_db: self.snr_db.clone(),
                    max_offset: self.max_offset,
                    trials: self.trials,
                    seed,
                    errors_on_hits_only: self.errors_on_hits_only,
                };
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    pub chirp: Chirp,
    pub link: Link,
    pub waveforms: Vec<String>,
    /// Each waveform is run with every sequence.
    pub sequences: Vec<SequenceConfig>,
    /// Relative target powers, strongest first.
    pub powers: Vec<f64>,
    pub p_fa: f64,
    pub calibration_trials: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
}

impl Default for TrackSection {
    fn default() -> Self {
        Self {
            chirp: Chirp::EXPERIMENT,
            link: Link::default(),
            waveforms: vec!["ofdm".into(), "dfts-ofdm".into(), "ccdt".into()],
            sequences: vec![mseq(), SequenceConfig::Qpsk],
            powers: vec![1.0, 0.75, 0.5, 0.25],
            p_fa: 0.01,
            calibration_trials: 10_000,
            snr_db: (-25..=10).step_by(5).map(f64::from).collect(),
            trials: 10_000,
        }
    }
}

impl TrackSection {
    pub fn plan(&self, seed: u64) -> Result<Vec<ccdt_core::detection::TrackingConfig>, CliError> {
        check_trials(self.trials)?;
        let params = self.chirp.params()?.with_cp(self.link.n_cp)?;
        let budget = LinkBudget::new(self.link.f_scs, self.link.f_c, params.n())?;
        if self.waveforms.is_empty() || self.sequences.is_empty() {
            return Err(CliError::Config("tracking needs at least one waveform and one sequence".into()));
        }
        let mut out = Vec::new();
        for w in &self.waveforms {
            let waveform = Waveform::new(parse_kind(w)?, params)?;
            for s in &self.sequences {
                let cfg = ccdt_core::detection::TrackingConfig {
                    waveform,
                    sequence: s.spec(params.n()),
                    powers: self.powers.clone(),
                    p_fa: self.p_fa,
                    calibration_trials: self.calibration_trials,
                    snr_db: self.snr_db.clone(),
                    trials: self.trials,
                    budget,
                    seed,
                };
                cfg.validate()?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}
