//! Integer and phase helpers shared by the generators and closed forms.
//!
//! Quadratic phases such as `π·u·m(m+1)/N` are reduced modulo `2N` in exact
//! integer arithmetic before they touch floating point, so sequence samples
//! stay accurate to a few ulps regardless of the index magnitude.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Non-negative remainder of `a` modulo `n`.
#[inline]
pub fn rem(a: i64, n: usize) -> usize {
    a.rem_euclid(n as i64) as usize
}

#[inline]
pub fn rem_i128(a: i128, n: i128) -> i128 {
    a.rem_euclid(n)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Inverse of `a` modulo `n` by the extended Euclidean algorithm.
pub fn mod_inverse(a: i64, n: usize) -> Option<usize> {
    let n_i = n as i64;
    let (mut old_r, mut r) = (a.rem_euclid(n_i), n_i);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(rem(old_s, n))
}

/// `e^{jπ·num/den}` with the numerator reduced modulo `2·den` first.
#[inline]
pub fn pi_phasor(num: i128, den: i128) -> Complex64 {
    let r = rem_i128(num, 2 * den);
    Complex64::from_polar(1.0, PI * r as f64 / den as f64)
}

/// `e^{j2π·k/n}` with `k` reduced modulo `n`.
#[inline]
pub fn root_of_unity(k: i64, n: usize) -> Complex64 {
    let r = rem(k, n);
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)
}

/// Table of `e^{j2π·k/n}` for `k = 0..n`; index with `(a·b) mod n`.
#[derive(Debug, Clone)]
pub struct RootTable {
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: usize) -> Self {
        Self {
            roots: (0..n as i64).map(|k| root_of_unity(k, n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// `e^{j2π·k/n}`
    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        self.roots[rem(k, self.roots.len())]
    }
}

pub fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    energy(x) / x.len() as f64
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_gcd() {
        assert_eq!(mod_inverse(4, 127), Some(32));
        assert_eq!(mod_inverse(-4, 127), Some(127 - 32));
        assert_eq!(mod_inverse(3, 9), None);
        assert_eq!(gcd(-4, 127), 1);
        assert_eq!(gcd(6, 9), 3);
        for a in 1..127 {
            let inv = mod_inverse(a, 127).unwrap();
            assert_eq!((a as usize * inv) % 127, 1);
        }
    }

    #[test]
    fn phasor_reduction_is_exact_for_large_numerators() {
        let big = pi_phasor(2 * 127 * 1_000_000_007 + 5, 127);
        let small = pi_phasor(5, 127);
        assert!((big - small).norm() < 1e-15);
        assert!((root_of_unity(-1, 4) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }
}
