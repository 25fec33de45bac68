use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netcore::db20;

const PHASES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecombineTarget {
    I,
    Q,
}

fn theta(k: usize) -> f64 {
    TAU * k as f64 / PHASES as f64
}

/// Exact weights for phases 0, 45, ..., 315 degrees.
///
/// I: `1, 1/sqrt2, 0, -1/sqrt2, -1, -1/sqrt2, 0, 1/sqrt2`; Q is the same pattern
/// rotated by two phases.
pub fn weights(target: RecombineTarget) -> [f64; PHASES] {
    let mut w = [0.0; PHASES];
    for (k, wk) in w.iter_mut().enumerate() {
        let raw = match target {
            RecombineTarget::I => theta(k).cos(),
            RecombineTarget::Q => theta(k).sin(),
        };
        // snap the exact zeros and unit weights
        *wk = if raw.abs() < 1e-12 { 0.0 } else if (raw.abs() - 1.0).abs() < 1e-12 { raw.signum() } else { raw };
    }
    w
}

/// Weights rounded to `frac_bits` fractional bits.
pub fn quantized_weights(target: RecombineTarget, frac_bits: u32) -> [f64; PHASES] {
    let scale = f64::from(1u32 << frac_bits);
    weights(target).map(|w| (w * scale).round() / scale)
}

/// Weighted sum of the eight phase outputs, sample by sample.
pub fn harmonic_recombine(bb: &[Vec<C64>], target: RecombineTarget) -> Result<Vec<C64>> {
    recombine_with(bb, &weights(target))
}

pub fn recombine_with(bb: &[Vec<C64>], w: &[f64; PHASES]) -> Result<Vec<C64>> {
    if bb.len() != PHASES {
        return Err(Error::Arity { expected: PHASES, got: bb.len() });
    }
    let len = bb[0].len();
    if bb.iter().any(|s| s.len() != len) {
        return Err(Error::Dimension("phase streams differ in length".into()));
    }
    Ok((0..len).map(|n| bb.iter().zip(w).map(|(s, &wk)| s[n] * wk).sum()).collect())
}

/// Eight phase outputs of an LO harmonic `h` mixing a BB tone of `cycles` cycles
/// over `len` samples: phase `k` carries `cos(h theta_k - phi(n))`.
pub fn progression(harmonic: i32, len: usize, cycles: f64) -> Vec<Vec<C64>> {
    (0..PHASES)
        .map(|k| {
            (0..len)
                .map(|n| {
                    let phi = TAU * cycles * n as f64 / len as f64;
                    C64::new((f64::from(harmonic) * theta(k) - phi).cos(), 0.0)
                })
                .collect()
        })
        .collect()
}

/// Response magnitude of weights `w` to LO harmonic `h`.
fn response(w: &[f64; PHASES], harmonic: i32) -> f64 {
    w.iter()
        .enumerate()
        .map(|(k, &wk)| wk * C64::from_polar(1.0, f64::from(harmonic) * theta(k)))
        .sum::<C64>()
        .norm()
}

/// Coherent voltage gain of the fundamental, dB.
pub fn recombination_gain_db(w: &[f64; PHASES]) -> f64 {
    db20(response(w, 1))
}

/// Fundamental-to-harmonic response ratio, dB (infinite for an exact null).
pub fn harmonic_rejection_db(w: &[f64; PHASES], harmonic: i32) -> f64 {
    let h = response(w, harmonic);
    if h == 0.0 {
        f64::INFINITY
    } else {
        db20(response(w, 1) / h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn weight_table() {
        let i = weights(RecombineTarget::I);
        let s = FRAC_1_SQRT_2;
        let expected = [1.0, s, 0.0, -s, -1.0, -s, 0.0, s];
        for (a, b) in i.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let q = weights(RecombineTarget::Q);
        let expected = [0.0, s, 1.0, s, 0.0, -s, -1.0, -s];
        for (a, b) in q.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let energy: f64 = i.iter().map(|w| w * w).sum();
        assert_abs_diff_eq!(energy, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_gain_and_rejection() {
        let w = weights(RecombineTarget::I);
        assert_abs_diff_eq!(recombination_gain_db(&w), 12.04, epsilon = 0.005);
        for h in [3, 5, 11, 13] {
            assert!(harmonic_rejection_db(&w, h) > 120.0, "h = {h}");
        }
        // 7th and 9th fold onto the fundamental with N = 8
        assert!(harmonic_rejection_db(&w, 7) < 1.0);
    }

    #[test]
    fn streams() {
        let fund = progression(1, 64, 3.0);
        let i = harmonic_recombine(&fund, RecombineTarget::I).unwrap();
        for (n, v) in i.iter().enumerate() {
            let phi = TAU * 3.0 * n as f64 / 64.0;
            assert_abs_diff_eq!(v.re, 4.0 * phi.cos(), epsilon = 1e-12);
        }
        let third = progression(3, 64, 3.0);
        let out = harmonic_recombine(&third, RecombineTarget::Q).unwrap();
        assert!(out.iter().all(|v| v.norm() < 1e-12));
        assert!(matches!(harmonic_recombine(&fund[..7], RecombineTarget::I), Err(Error::Arity { expected: 8, got: 7 })));
    }

    #[test]
    fn quantized_rejection_is_finite() {
        let w = quantized_weights(RecombineTarget::I, 6);
        assert_eq!(w[1], 45.0 / 64.0);
        let rej = harmonic_rejection_db(&w, 3);
        assert!(rej.is_finite() && rej > 30.0 && rej < 120.0, "{rej}");
    }
}
