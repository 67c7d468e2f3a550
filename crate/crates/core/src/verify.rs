//! Machine check of the ambiguity-function shapes and PAPR properties of
//! CCDT, OFDM and DFT-s-OFDM on the full integer grid.

use crate::ambiguity::{af_ccdt_surface, af_surface, AmbiguitySurface};
use crate::error::{Error, Result};
use crate::math::{is_prime, rem};
use crate::papr::{papr, papr_sweep, SequenceFamily};
use crate::rng::{domain, substream};
use crate::sequences::{dft_sequence, m_sequence, random_mpsk, zadoff_chu, ComplexSeq, LfsrSpec};
use crate::waveform::{Waveform, WaveformKind, WaveformParams};
use num_complex::Complex64;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub params: WaveformParams,
    /// ZC root for the generic checks.
    pub zc_root: i64,
    /// DFT sequence index for the generic checks.
    pub dft_index: usize,
    /// Seed of the random QPSK sequence.
    pub seed: u64,
    /// Replaces every per-check tolerance when set.
    pub tol: Option<f64>,
}

impl VerifyConfig {
    pub fn new(params: WaveformParams) -> Self {
        Self {
            params,
            zc_root: 3,
            dft_index: 5,
            seed: 1,
            tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub id: &'static str,
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.count(|s| *s == CheckStatus::Passed)
    }

    pub fn failed(&self) -> usize {
        self.count(|s| *s == CheckStatus::Failed)
    }

    pub fn skipped(&self) -> usize {
        self.count(|s| matches!(s, CheckStatus::Skipped(_)))
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    fn count(&self, f: impl Fn(&CheckStatus) -> bool) -> usize {
        self.checks.iter().filter(|c| f(&c.status)).count()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.status {
                CheckStatus::Skipped(why) => writeln!(f, "{:<4} SKIP {} ({why})", c.id, c.name)?,
                s => writeln!(
                    f,
                    "{:<4} {} {}: max deviation {:.3e} (tol {:.1e})",
                    c.id,
                    if *s == CheckStatus::Passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_deviation,
                    c.tolerance
                )?,
            }
        }
        write!(
            f,
            "{} passed, {} failed, {} skipped",
            self.passed(),
            self.failed(),
            self.skipped()
        )
    }
}

fn delta(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// Largest `| |χ| − expected(Δ,τ) |` over a surface.
fn modulus_deviation(surface: &AmbiguitySurface, expected: impl Fn(i64, i64) -> f64) -> f64 {
    surface
        .iter()
        .map(|(d, t, v)| (v.norm() - expected(d as i64, t)).abs())
        .fold(0.0, f64::max)
}

fn m_sequence_for(n: usize) -> Option<ComplexSeq> {
    let degree = (n + 1).trailing_zeros();
    if n < 3 || (n + 1).count_ones() != 1 {
        return None;
    }
    m_sequence(&LfsrSpec::default_for_degree(degree).ok()?).ok()
}

struct Suite {
    tol: Option<f64>,
    checks: Vec<PropertyCheck>,
}

impl Suite {
    fn record(&mut self, id: &'static str, name: &'static str, default_tol: f64, dev: f64) {
        let tolerance = self.tol.unwrap_or(default_tol);
        let status = if dev <= tolerance {
            CheckStatus::Passed
        } else {
            CheckStatus::Failed
        };
        self.checks.push(PropertyCheck {
            id,
            name,
            max_deviation: dev,
            tolerance,
            status,
        });
    }

    fn skip(&mut self, id: &'static str, name: &'static str, why: String) {
        self.checks.push(PropertyCheck {
            id,
            name,
            max_deviation: f64::NAN,
            tolerance: f64::NAN,
            status: CheckStatus::Skipped(why),
        });
    }
}

/// Run the 14 checks.
pub fn verify_shape_properties(config: &VerifyConfig) -> Result<VerifyReport> {
    let params = config.params;
    params.validate()?;
    if let Some(t) = config.tol {
        if !(t > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance {t} must be positive")));
        }
    }
    let n = params.n();
    let nn = n as i64;
    let two_alpha = params.two_alpha();
    let mut suite = Suite {
        tol: config.tol,
        checks: Vec::new(),
    };

    let zc = zadoff_chu(n, config.zc_root)?;
    let dft = dft_sequence(n, config.dft_index)?;
    let qpsk = random_mpsk(n, 4, &mut substream(config.seed, &[domain::SEQUENCE]))?;
    let mseq = m_sequence_for(n);
    let ccdt = Waveform::new(WaveformKind::Ccdt, params)?;
    let ofdm = Waveform::new(WaveformKind::Ofdm, params)?;
    let dfts = Waveform::new(WaveformKind::DftsOfdm, params)?;
    let signal_af = |w: &Waveform, x: &[Complex64]| -> Result<AmbiguitySurface> { af_surface(&w.modulate(x)?) };

    let mut families: Vec<&ComplexSeq> = vec![&zc, &dft, &qpsk];
    if let Some(m) = &mseq {
        families.push(m);
    }
    let mut ccdt_afs = Vec::new();
    let mut dev = 0.0f64;
    for x in &families {
        let by_def = signal_af(&ccdt, x)?;
        dev = dev.max(by_def.max_abs_diff(&af_ccdt_surface(&params, x)?));
        ccdt_afs.push(by_def);
    }
    suite.record("P1", "CCDT closed form equals definition", 1e-10, dev);

    // Zeros on the line Δ + 2ατ ≡ 0 for unit-modulus sequences.
    let on_line = |d: i64, t: i64| rem(d + two_alpha * t, n) == 0;
    let dev = [0usize, 2]
        .iter()
        .chain(if mseq.is_some() { &[3usize][..] } else { &[][..] })
        .map(|&i| {
            ccdt_afs[i]
                .iter()
                .filter(|&(d, t, _)| on_line(d as i64, t))
                .map(|(d, _, v)| (v.norm() - delta(d == 0.0)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    suite.record("P2", "CCDT zeros on the line Δ+2ατ ≡ 0", 1e-12, dev);

    let dev = (0..n)
        .map(|d| {
            let energy: f64 = (0..n).map(|t| ccdt_afs[0].get(d, t).norm_sqr()).sum();
            (energy - 1.0).abs()
        })
        .fold(0.0, f64::max);
    suite.record("P3", "CAZAC sidelobe energy per Doppler row is 1", 1e-10, dev);

    let dev = modulus_deviation(&ccdt_afs[1], |d, _| delta(d == 0));
    suite.record("P4", "CCDT + DFT sequence ridge |χ| = δ[Δ]", 1e-12, dev);

    let ridge_root = rem(two_alpha, n) as i64;
    let zc_ridge = zadoff_chu(n, ridge_root)?;
    let dev = modulus_deviation(&signal_af(&ccdt, &zc_ridge)?, |_, t| delta(t == 0));
    suite.record("P5", "CCDT + ZC with u = 2α ridge |χ| = δ[τ]", 1e-12, dev);

    match &mseq {
        Some(_) => {
            let side = ((n + 1) as f64).sqrt() / n as f64;
            let dev = modulus_deviation(&ccdt_afs[3], |d, t| match (d, t) {
                (0, 0) => 1.0,
                (0, _) => 1.0 / n as f64,
                _ if on_line(d, t) => 0.0,
                _ => side,
            });
            suite.record("P6", "m-sequence AF value table", 1e-12, dev);
        }
        None => suite.skip("P6", "m-sequence AF value table", format!("N = {n} is not 2^p − 1")),
    }

    if is_prime(n) {
        let sweep = papr_sweep(&ccdt, SequenceFamily::ZadoffChu, n)?;
        let peak_db = 10.0 * (n as f64).log10();
        let dev = sweep
            .iter()
            .map(|e| {
                let expect = if rem(e.root - two_alpha, n) == 0 { peak_db } else { 0.0 };
                (e.result.papr_db - expect).abs()
            })
            .fold(0.0, f64::max);
        suite.record("P7", "CCDT + ZC PAPR is 0 dB, or 10·log10 N at u = 2α", 1e-9, dev);
    } else {
        suite.skip("P7", "CCDT + ZC PAPR", format!("N = {n} is not prime"));
    }

    let dev = (0..n)
        .map(|k| Ok(papr(&ccdt.modulate(&dft_sequence(n, k)?)?)?.papr_db.abs()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    suite.record("P8", "CCDT + DFT sequence PAPR is 0 dB", 1e-9, dev);

    let ofdm_qpsk = signal_af(&ofdm, &qpsk)?;
    let dev = (0..n)
        .map(|t| (ofdm_qpsk.get(0, t).norm() - delta(t == 0)).abs())
        .fold(0.0, f64::max);
    suite.record("P9", "OFDM zero-Doppler cut |χ(0,τ)| = δ[τ]", 1e-12, dev);

    let dfts_qpsk = signal_af(&dfts, &qpsk)?;
    let dev = (0..n)
        .map(|d| (dfts_qpsk.get(d, 0).norm() - delta(d == 0)).abs())
        .fold(0.0, f64::max);
    suite.record("P10", "DFT-s-OFDM zero-delay cut |χ(Δ,0)| = δ[Δ]", 1e-12, dev);

    let dev = modulus_deviation(&signal_af(&ofdm, &dft)?, |_, t| delta(t == 0));
    suite.record("P11", "OFDM + DFT sequence |χ| = δ[τ]", 1e-12, dev);

    let dev = modulus_deviation(&signal_af(&dfts, &dft)?, |d, _| delta(d == 0));
    suite.record("P12", "DFT-s-OFDM + DFT sequence |χ| = δ[Δ]", 1e-12, dev);

    let u = config.zc_root;
    if n % 2 == 1 {
        let dev = modulus_deviation(&signal_af(&ofdm, &zc)?, |d, t| delta(rem(u * d + t, n) == 0));
        suite.record("P13", "OFDM + ZC |χ| = δ[uΔ+τ]", 1e-12, dev);
        let dev = modulus_deviation(&signal_af(&dfts, &zc)?, |d, t| delta(rem(d - t * u, n) == 0));
        suite.record("P14", "DFT-s-OFDM + ZC |χ| = δ[Δ−uτ]", 1e-12, dev);
    } else {
        suite.skip("P13", "OFDM + ZC", format!("N = {nn} is even"));
        suite.skip("P14", "DFT-s-OFDM + ZC", format!("N = {nn} is even"));
    }

    Ok(VerifyReport {
        checks: suite.checks,
    })
}
