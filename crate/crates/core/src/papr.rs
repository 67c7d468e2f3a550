//! Peak-to-average power ratio of modulated symbols.

use crate::error::{Error, Result};
use crate::math::gcd;
use crate::sequences::{dft_sequence, zadoff_chu, ComplexSeq};
use crate::waveform::{Waveform, WaveformKind};
use num_complex::Complex64;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprResult {
    pub papr_db: f64,
    pub peak_index: usize,
    pub mean_power: f64,
}

/// `10·log10(max|s|² / mean|s|²)`. The first maximum wins on ties.
pub fn papr(s: &[Complex64]) -> Result<PaprResult> {
    if s.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mean_power = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64;
    if mean_power == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let (peak_index, peak) = s
        .iter()
        .map(|v| v.norm_sqr())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    Ok(PaprResult {
        papr_db: 10.0 * (peak / mean_power).log10(),
        peak_index,
        mean_power,
    })
}

/// PAPR of the symbol after zero-padded upsampling to `q_len` samples.
pub fn papr_upsampled(waveform: &Waveform, x: &[Complex64], q_len: usize) -> Result<PaprResult> {
    papr(&waveform.modulate_upsampled(x, q_len)?)
}

/// Sequence families swept by [`papr_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFamily {
    /// Roots `u` in `1..N` with `gcd(u, N) = 1`.
    ZadoffChu,
    /// Indices `k` in `0..N`.
    Dft,
}

impl SequenceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SequenceFamily::ZadoffChu => "zc",
            SequenceFamily::Dft => "dft",
        }
    }

    pub fn members(&self, n: usize) -> Result<Vec<(i64, ComplexSeq)>> {
        match self {
            SequenceFamily::ZadoffChu => (1..n as i64)
                .filter(|&u| gcd(u, n as i64) == 1)
                .map(|u| Ok((u, zadoff_chu(n, u)?)))
                .collect(),
            SequenceFamily::Dft => (0..n)
                .map(|k| Ok((k as i64, dft_sequence(n, k)?)))
                .collect(),
        }
    }
}

impl fmt::Display for SequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SequenceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zc" | "zadoff-chu" => Ok(SequenceFamily::ZadoffChu),
            "dft" => Ok(SequenceFamily::Dft),
            other => Err(Error::InvalidConfig(format!("unknown sequence family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprEntry {
    /// Position in ascending PAPR order, starting at 1.
    pub rank: usize,
    pub root: i64,
    pub waveform: WaveformKind,
    pub result: PaprResult,
}

/// PAPR of every family member, sorted ascending (ties by root).
pub fn papr_sweep(waveform: &Waveform, family: SequenceFamily, q_len: usize) -> Result<Vec<PaprEntry>> {
    let n = waveform.params().n();
    let mut entries = family
        .members(n)?
        .into_iter()
        .map(|(root, x)| {
            Ok(PaprEntry {
                rank: 0,
                root,
                waveform: waveform.kind(),
                result: papr_upsampled(waveform, &x, q_len)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| {
        a.result
            .papr_db
            .total_cmp(&b.result.papr_db)
            .then(a.root.cmp(&b.root))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(entries)
}

/// CSV with header `rank,root,papr_db,waveform`.
pub fn write_papr_csv<W: Write>(entries: &[PaprEntry], w: &mut W) -> io::Result<()> {
    writeln!(w, "rank,root,papr_db,waveform")?;
    for e in entries {
        writeln!(w, "{},{},{},{}", e.rank, e.root, e.result.papr_db, e.waveform)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::mod_inverse;
    use crate::waveform::WaveformParams;

    fn ccdt(q_len: usize) -> Waveform {
        let p = WaveformParams::new(127, 4, 2, 0.0).unwrap();
        Waveform::new(WaveformKind::Ccdt, p.with_upsampled_len(q_len).unwrap()).unwrap()
    }

    fn kind(kind: WaveformKind) -> Waveform {
        Waveform::new(kind, WaveformParams::new(127, 4, 2, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn unit_modulus_is_zero_db() {
        let s = zadoff_chu(127, 5).unwrap();
        assert!(papr(&s).unwrap().papr_db.abs() < 1e-12);
        assert!(papr(&[Complex64::new(0.0, 0.0); 4]).is_err());
        let dfts = kind(WaveformKind::DftsOfdm).modulate(&s).unwrap();
        assert!(papr(&dfts).unwrap().papr_db.abs() < 1e-12);
    }

    #[test]
    fn ccdt_zadoff_chu() {
        let w = kind(WaveformKind::Ccdt);
        for u in 1..127 {
            let s = w.modulate(&zadoff_chu(127, u).unwrap()).unwrap();
            let r = papr(&s).unwrap();
            if u == 4 {
                assert!((r.papr_db - 10.0 * 127f64.log10()).abs() < 1e-9);
                let peak = s[r.peak_index].norm_sqr();
                assert!((peak - 127.0).abs() < 1e-9);
            } else {
                assert!(r.papr_db.abs() < 1e-9, "u={u} {}", r.papr_db);
            }
        }
    }

    #[test]
    fn ccdt_dft_family_is_flat() {
        let sweep = papr_sweep(&ccdt(127), SequenceFamily::Dft, 127).unwrap();
        assert_eq!(sweep.len(), 127);
        assert!(sweep.iter().all(|e| e.result.papr_db.abs() < 1e-9));
        let zc = papr_sweep(&ccdt(127), SequenceFamily::ZadoffChu, 127).unwrap();
        assert_eq!(zc.len(), 126);
        assert!(zc[..125].iter().all(|e| e.result.papr_db.abs() < 1e-9));
        assert_eq!(zc[125].root, 4);
        assert!(zc.windows(2).all(|w| w[0].result.papr_db <= w[1].result.papr_db));
    }

    #[test]
    fn upsampling_does_not_lower_papr() {
        for k in [WaveformKind::Ofdm, WaveformKind::DftsOfdm, WaveformKind::Ccdt] {
            let w = kind(k);
            for u in [1i64, 3, 50, 126] {
                let x = zadoff_chu(127, u).unwrap();
                let base = papr_upsampled(&w, &x, 127).unwrap().papr_db;
                assert!((base - papr(&w.modulate(&x).unwrap()).unwrap().papr_db).abs() < 1e-9);
                let up = papr_upsampled(&w, &x, 4 * 127).unwrap().papr_db;
                assert!(up >= base - 1e-9);
            }
        }
    }

    #[test]
    fn dfts_matches_ofdm_for_mapped_root() {
        let ofdm = kind(WaveformKind::Ofdm);
        let dfts = kind(WaveformKind::DftsOfdm);
        for u in 1..127i64 {
            let mapped = 127 - mod_inverse(u, 127).unwrap() as i64;
            let a = papr_upsampled(&dfts, &zadoff_chu(127, u).unwrap(), 508).unwrap();
            let b = papr_upsampled(&ofdm, &zadoff_chu(127, mapped).unwrap(), 508).unwrap();
            assert!((a.papr_db - b.papr_db).abs() < 1e-9, "u={u}");
        }
        // so the sorted curves coincide
        let a = papr_sweep(&dfts, SequenceFamily::ZadoffChu, 508).unwrap();
        let b = papr_sweep(&ofdm, SequenceFamily::ZadoffChu, 508).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.result.papr_db - y.result.papr_db).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_layout() {
        let sweep = papr_sweep(&ccdt(127), SequenceFamily::ZadoffChu, 127).unwrap();
        let mut out = Vec::new();
        write_papr_csv(&sweep[..2], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "rank,root,papr_db,waveform");
        assert!(lines[1].starts_with("1,"));
        assert!(lines[1].ends_with(",ccdt"));
    }
}
