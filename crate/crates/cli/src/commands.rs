use ccdt_core::ambiguity::af_grid;
use ccdt_core::detection::{run_acquisition, run_tracking, write_results_csv, ResultRow};
use ccdt_core::papr::{papr_sweep, write_papr_csv};
use ccdt_core::rng::{domain, substream};
use ccdt_core::verify::{verify_shape_properties, VerifyConfig};
use std::fmt::Debug;

use crate::config::Config;
use crate::error::CliError;

/// Text to emit, plus a property failure to report once it is written.
pub struct Output {
    pub text: Vec<u8>,
    pub failure: Option<String>,
}

fn header(command: &str, seed: u64, section: &impl Debug) -> Vec<u8> {
    format!("# ccdt {command} seed={seed} config={section:?}\n").into_bytes()
}

fn io_error(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<buffer>".into(),
        source: e,
    }
}

pub fn verify(config: &Config) -> Result<Output, CliError> {
    let section = &config.verify;
    let mut cfg = VerifyConfig::new(section.chirp.params()?);
    cfg.zc_root = section.zc_root;
    cfg.dft_index = section.dft_index;
    cfg.seed = config.seed;
    cfg.tol = section.tol;
    let report = verify_shape_properties(&cfg)?;
    let mut text = header("verify", config.seed, section);
    text.extend(format!("{report}\n").into_bytes());
    let failure = (!report.all_passed()).then(|| format!("{} properties failed", report.failed()));
    Ok(Output { text, failure })
}

pub fn af(config: &Config) -> Result<Output, CliError> {
    let plan = config.af.plan()?;
    let n = plan.waveform.params().n();
    let x = plan
        .sequence
        .realize(n, &mut substream(config.seed, &[domain::SEQUENCE]))?;
    let s = if plan.upsampled_len == n {
        plan.waveform.modulate(&x)
    } else {
        plan.waveform.modulate_upsampled(&x, plan.upsampled_len)
    }
    .map_err(CliError::Runtime)?;
    let surface = af_grid(&s, &plan.deltas, &plan.taus).map_err(CliError::Runtime)?;
    let mut text = header("af", config.seed, &config.af);
    surface.write_csv(&mut text).map_err(io_error)?;
    Ok(Output { text, failure: None })
}

pub fn papr(config: &Config) -> Result<Output, CliError> {
    let plan = config.papr.plan()?;
    let mut entries = Vec::new();
    for w in &plan.waveforms {
        entries.extend(papr_sweep(w, plan.family, plan.upsampled_len).map_err(CliError::Runtime)?);
    }
    let mut text = header("papr", config.seed, &config.papr);
    write_papr_csv(&entries, &mut text).map_err(io_error)?;
    Ok(Output { text, failure: None })
}

pub fn acquire(config: &Config) -> Result<Output, CliError> {
    let plans = config.acquire.plan(config.seed)?;
    let mut rows = Vec::new();
    for cfg in &plans {
        let label = format!("{}/D{}", cfg.sequence.label(), cfg.hypotheses);
        for p in run_acquisition(cfg).map_err(CliError::Runtime)? {
            rows.push(ResultRow {
                waveform: cfg.waveform.kind().to_string(),
                sequence: label.clone(),
                velocity_kmh: Some(p.velocity_kmh),
                stats: p.stats,
            });
        }
    }
    let mut text = header("acquire", config.seed, &config.acquire);
    write_results_csv(&rows, &mut text).map_err(io_error)?;
    Ok(Output { text, failure: None })
}

pub fn track(config: &Config) -> Result<Output, CliError> {
    let plans = config.track.plan(config.seed)?;
    let mut rows = Vec::new();
    for cfg in &plans {
        let result = run_tracking(cfg).map_err(CliError::Runtime)?;
        rows.extend(result.points.into_iter().map(|stats| ResultRow {
            waveform: cfg.waveform.kind().to_string(),
            sequence: cfg.sequence.label(),
            velocity_kmh: None,
            stats,
        }));
    }
    let mut text = header("track", config.seed, &config.track);
    write_results_csv(&rows, &mut text).map_err(io_error)?;
    Ok(Output { text, failure: None })
}
