//! Discrete Fourier transforms.
//!
//! Convention used throughout the crate: the forward transform uses the
//! kernel `e^{-j2πkn/N}`. [`dft`] is unscaled, [`dft_unitary`] and
//! [`idft_unitary`] carry `1/√N`. The direct `O(N²)` routines are the
//! reference path; [`FftPlan`] is the fast path used by the correlators and
//! is tested against the direct one.

use crate::math::RootTable;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

fn direct(x: &[Complex64], sign: i64) -> Vec<Complex64> {
    let n = x.len();
    let table = RootTable::new(n);
    (0..n as i64)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(m, &v)| v * table.get(sign * k * m as i64))
                .sum()
        })
        .collect()
}

/// Unscaled forward DFT, `X[k] = Σ x[m] e^{-j2πkm/N}`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    direct(x, -1)
}

/// Unscaled inverse kernel, `x[n] = Σ X[k] e^{j2πkn/N}` (no `1/N`).
pub fn idft_unscaled(x: &[Complex64]) -> Vec<Complex64> {
    direct(x, 1)
}

pub fn dft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    dft(x).into_iter().map(|v| v * scale).collect()
}

pub fn idft_unitary(x: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (x.len() as f64).sqrt();
    idft_unscaled(x).into_iter().map(|v| v * scale).collect()
}

/// Forward and inverse FFT plans of one length, unscaled in both directions.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::max_abs_diff;

    fn ramp(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn unitary_pair_round_trips() {
        let x = ramp(127);
        let back = idft_unitary(&dft_unitary(&x));
        assert!(max_abs_diff(&x, &back) < 1e-12);
    }

    #[test]
    fn fft_matches_direct() {
        for n in [1, 4, 7, 127, 128] {
            let x = ramp(n);
            let plan = FftPlan::new(n);
            let mut buf = x.clone();
            plan.forward(&mut buf);
            assert!(max_abs_diff(&buf, &dft(&x)) < 1e-10, "n={n}");
            let mut buf = x.clone();
            plan.inverse(&mut buf);
            assert!(max_abs_diff(&buf, &idft_unscaled(&x)) < 1e-10, "n={n}");
        }
    }
}
