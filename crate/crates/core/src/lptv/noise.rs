//! Monte-Carlo estimate of how each thermal source reaches the gyrator node.
//!
//! Each source is driven by band-limited noise: a comb of tones around `f_lo`
//! with independent complex Gaussian amplitudes whose power matches `4kTR` over
//! the comb spacing. Keeping the noise near the carrier avoids folding from LO
//! harmonics, which the closed-form coefficients ignore.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{Engine, Tone};
use super::{build_circuit, window_phasor, NPathConfig, Port};
use crate::error::{invalid, Error, Result};
use crate::netcore::db10;
use crate::tol::BOLTZMANN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSource {
    Ant,
    SwLeft,
    SwRight,
    Bal,
}

impl NoiseSource {
    pub const ALL: [NoiseSource; 4] = [NoiseSource::Ant, NoiseSource::SwLeft, NoiseSource::SwRight, NoiseSource::Bal];

    fn port(self) -> Port {
        match self {
            NoiseSource::Ant => Port::Ant,
            NoiseSource::SwLeft => Port::SwLeft,
            NoiseSource::SwRight => Port::SwRight,
            NoiseSource::Bal => Port::Bal,
        }
    }

    fn resistance(self, cfg: &NPathConfig) -> Option<f64> {
        match self {
            NoiseSource::Ant => cfg.terminations.ant.resistance(),
            NoiseSource::SwLeft | NoiseSource::SwRight => Some(cfg.r_sw),
            NoiseSource::Bal => cfg.terminations.bal.resistance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseMcConfig {
    pub n_runs: usize,
    pub temperature: f64,
    pub seed: u64,
    /// Comb spacing is `f_lo / spacing_periods`.
    pub spacing_periods: usize,
    /// Tones on each side of `f_lo` (plus one at `f_lo`).
    pub tones_per_side: usize,
}

impl Default for NoiseMcConfig {
    fn default() -> Self {
        NoiseMcConfig {
            n_runs: 100,
            temperature: 290.0,
            seed: 1,
            spacing_periods: 250,
            tones_per_side: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceEstimate {
    pub source: NoiseSource,
    /// Mean `|V1|^2 / (4kTR)` per unit bandwidth.
    pub coefficient: f64,
    pub coefficient_db: f64,
    /// Standard error of the mean, relative.
    pub rel_std_err: f64,
    /// Noise density at the gyrator node, V^2/Hz.
    pub psd_v2_per_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseMcResult {
    pub n_runs: usize,
    pub temperature: f64,
    pub per_source: Vec<SourceEstimate>,
}

impl NoiseMcResult {
    pub fn get(&self, s: NoiseSource) -> Option<&SourceEstimate> {
        self.per_source.iter().find(|e| e.source == s)
    }
}

pub fn noise_montecarlo(cfg: &NPathConfig, mc: &NoiseMcConfig, sources: &[NoiseSource]) -> Result<NoiseMcResult> {
    if mc.n_runs < 100 {
        return Err(invalid("n_runs", "need at least 100 runs"));
    }
    if !(mc.temperature >= 0.0) {
        return Err(invalid("temperature", "must be non-negative"));
    }
    if mc.spacing_periods == 0 {
        return Err(invalid("spacing_periods", "must be positive"));
    }
    let per_source = sources
        .par_iter()
        .map(|&s| estimate(cfg, mc, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(NoiseMcResult {
        n_runs: mc.n_runs,
        temperature: mc.temperature,
        per_source,
    })
}

fn estimate(cfg: &NPathConfig, mc: &NoiseMcConfig, source: NoiseSource) -> Result<SourceEstimate> {
    let Some(r) = source.resistance(cfg) else {
        return Ok(SourceEstimate {
            source,
            coefficient: 0.0,
            coefficient_db: f64::NEG_INFINITY,
            rel_std_err: 0.0,
            psd_v2_per_hz: 0.0,
        });
    };
    let circuit = build_circuit(cfg)?;
    let src = circuit.sources[&source.port()];
    let k = mc.spacing_periods;
    let df = cfg.f_lo / k as f64;
    let j = mc.tones_per_side as i64;
    let freqs: Vec<f64> = (-j..=j).map(|i| cfg.f_lo + i as f64 * df).collect();
    if freqs[0] <= 0.0 {
        return Err(invalid("tones_per_side", "comb reaches DC"));
    }
    let tones = freqs.iter().map(|&f| Tone { source: src, amp: C64::new(0.0, 0.0), freq: f }).collect();
    let mut engine = Engine::new(circuit.netlist, cfg.clocking()?, tones)?;
    let map = engine.steady_state_map(k)?;
    let nc = engine.n_circuit();
    let steps = engine.clock.steps_per_period();
    let h = engine.clock.h();
    let span = (k * steps) as f64 * h;
    // e^{-j w t} at each step start, per comb tone
    let turns: Vec<Vec<C64>> = freqs
        .iter()
        .map(|&f| (0..k * steps).map(|i| C64::from_polar(1.0, -TAU * f * i as f64 * h)).collect())
        .collect();
    let slots: Vec<usize> = (0..steps).map(|q| engine.clock.active(q).0.map_or(usize::MAX, |p| circuit.caps[p])).collect();

    let four_ktr = 4.0 * BOLTZMANN * mc.temperature * r;
    let sigma = (four_ktr * df).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed ^ ((source as u64 + 1) << 32));
    let mut samples = Vec::with_capacity(mc.n_runs);
    let mut sums = vec![C64::new(0.0, 0.0); freqs.len()];
    for _ in 0..mc.n_runs {
        let mut osc = nalgebra::DVector::zeros(2 * freqs.len());
        for i in 0..freqs.len() {
            osc[2 * i] = sigma * normal.sample(&mut rng);
            osc[2 * i + 1] = sigma * normal.sample(&mut rng);
        }
        let mut x = engine.initial_state();
        x.rows_mut(0, nc).copy_from(&(&map * &osc));
        x.rows_mut(nc, osc.len()).copy_from(&osc);
        let start = x.rows(0, nc).into_owned();
        sums.iter_mut().for_each(|s| *s = C64::new(0.0, 0.0));
        for p in 0..k {
            for q in 0..steps {
                if slots[q] != usize::MAX {
                    for (j, &f) in freqs.iter().enumerate() {
                        sums[j] += turns[j][p * steps + q] * engine.step_integral_at(q, &x, f, slots[q]);
                    }
                }
                x = engine.step(q, &x);
            }
        }
        let drift = (x.rows(0, nc) - start).norm();
        let scale = x.rows(0, nc).norm();
        if scale > 0.0 && drift > 1e-6 * scale {
            return Err(Error::NonConvergence { periods: k, last_delta: drift / scale });
        }
        let power: f64 = freqs.iter().zip(&sums).map(|(&f, &s)| window_phasor(s, span, f).norm_sqr() / 2.0).sum();
        samples.push(power / (freqs.len() as f64 * df));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let coefficient = if four_ktr > 0.0 { mean / four_ktr } else { 0.0 };
    Ok(SourceEstimate {
        source,
        coefficient,
        coefficient_db: db10(coefficient),
        rel_std_err: if mean > 0.0 { (var / n).sqrt() / mean } else { 0.0 },
        psd_v2_per_hz: mean,
    })
}
