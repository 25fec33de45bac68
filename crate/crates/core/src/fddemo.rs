//! End-to-end full-duplex receive chain on synthetic data: multicarrier TX,
//! leakage channel, weak desired tone, sync, digital cancellation.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sic::{build_basis, cancel, metrics, train_detailed, BasisSpec, SicMetrics, TonePlan, TrainInfo};
use crate::waveform::{apply_channel, ofdm_like, psd, sync, tone_amplitude, ChannelModel, IqWaveform, NlTerm, OfdmLikeConfig, Psd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemoConfig {
    pub ofdm: OfdmLikeConfig,
    /// TX average power; unit-power samples map to this level.
    pub tx_power_dbm: f64,
    /// Noiseless leakage path from TX samples to the RX capture.
    pub channel: ChannelModel,
    /// SI power over the injected noise power within the occupied band.
    pub si_to_floor_db: f64,
    /// `None` leaves the desired signal out.
    pub desired_tone_dbm: Option<f64>,
    pub desired_offset_hz: f64,
    /// Hold the desired signal off until the training prefix has been captured.
    pub desired_after_training: bool,
    /// Noise-only samples captured ahead of the leakage.
    pub capture_lead: usize,
    /// `None` matches the basis to the channel's orders and memory.
    pub basis: Option<BasisSpec>,
    pub training_len: usize,
    /// Ridge weight relative to unit column norm; 0 regularizes only when ill-conditioned.
    /// The capture is noisy, so the default weight is on.
    pub ridge_rel: f64,
    pub nfft: usize,
    pub snippet_len: usize,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Leakage of roughly -30 dB with a short echo profile and mild odd/even
/// nonlinearity, all inside the default basis.
pub fn default_channel() -> ChannelModel {
    let t = |order, delay, coeff| NlTerm { order, delay, coeff };
    ChannelModel {
        linear: vec![],
        terms: vec![
            t(1, 0, c(0.03, 0.004)),
            t(1, 1, c(0.0, 0.01)),
            t(1, 3, c(-0.004, 0.001)),
            t(1, 7, c(0.0, 0.002)),
            t(1, 20, c(0.0005, -0.0003)),
            t(2, 0, c(2e-4, 0.0)),
            t(3, 0, c(0.001, -0.0005)),
            t(3, 2, c(0.0, 2e-4)),
            t(5, 1, c(1e-4, 0.0)),
            t(7, 0, c(0.0, 5e-6)),
        ],
        noise_floor_db_per_hz: None,
    }
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            ofdm: OfdmLikeConfig::default(),
            tx_power_dbm: 0.0,
            channel: default_channel(),
            si_to_floor_db: 70.0,
            desired_tone_dbm: Some(-50.0),
            desired_offset_hz: 2e6,
            desired_after_training: true,
            capture_lead: 100,
            basis: None,
            training_len: 12_800,
            ridge_rel: crate::tol::SIC_RIDGE_REL,
            nfft: 4096,
            snippet_len: 512,
        }
    }
}

impl DemoConfig {
    pub fn validate(&self) -> Result<()> {
        self.ofdm.validate()?;
        self.basis_spec().validate()?;
        if !(self.ridge_rel >= 0.0) {
            return Err(invalid("ridge_rel", "must be non-negative"));
        }
        self.channel.validate()?;
        if self.channel.noise_floor_db_per_hz.is_some() {
            return Err(invalid("channel.noise_floor_db_per_hz", "set si_to_floor_db instead"));
        }
        if self.training_len >= self.ofdm.sync_len + self.ofdm.length {
            return Err(invalid("training_len", "leaves nothing to evaluate"));
        }
        if self.ofdm.sync_len == 0 {
            return Err(invalid("ofdm.sync_len", "sync needs a preamble"));
        }
        if self.desired_offset_hz.abs() >= self.ofdm.fs / 2.0 {
            return Err(invalid("desired_offset_hz", "beyond Nyquist"));
        }
        Ok(())
    }

    pub fn basis_spec(&self) -> BasisSpec {
        self.basis.clone().unwrap_or_else(|| BasisSpec::matched(&self.channel))
    }

    fn band(&self) -> (f64, f64) {
        let lo = self.ofdm.notch_hz;
        (lo, lo + self.ofdm.n_subcarriers as f64 * self.ofdm.subcarrier_bw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSummary {
    pub seed: u64,
    pub sync_offset: usize,
    pub train: TrainInfo,
    pub metrics: SicMetrics,
    pub si_power_dbm: f64,
    /// Injected noise density, dBm/Hz.
    pub injected_floor_dbm_per_hz: f64,
    /// Median out-of-band residual density, dBm/Hz.
    pub residual_floor_dbm_per_hz: f64,
    /// Mean residual density inside the occupied band with the tone removed, dBm/Hz.
    pub residual_inband_dbm_per_hz: f64,
    pub tone_power_dbm: Option<f64>,
    /// SI power minus tone power at the RX input.
    pub tone_below_si_db: Option<f64>,
    pub tone_snr_before_db: Option<f64>,
    pub tone_snr_after_db: Option<f64>,
    pub recovered: bool,
}

#[derive(Debug, Clone)]
pub struct DemoOutput {
    pub summary: DemoSummary,
    pub psd_before: Psd,
    pub psd_after: Psd,
    /// First samples of the evaluation segment, before and after cancellation.
    pub snippet: Vec<(C64, C64)>,
}

fn tone(len: usize, amp: f64, f: f64, fs: f64) -> Vec<C64> {
    (0..len).map(|n| C64::from_polar(amp, TAU * f * n as f64 / fs)).collect()
}

/// Fitted tone component and what remains after removing it.
fn split_tone(x: &[C64], f: f64, fs: f64) -> (f64, Vec<C64>) {
    let a = tone_amplitude(x, f, fs);
    let w = TAU * f / fs;
    let rest = x.iter().enumerate().map(|(n, v)| v - a * C64::from_polar(1.0, w * n as f64)).collect();
    (a.norm_sqr(), rest)
}

fn to_dbm(p_fs: f64, full_scale_dbm: f64) -> f64 {
    10.0 * p_fs.log10() + full_scale_dbm
}

pub fn run_demo(cfg: &DemoConfig) -> Result<DemoOutput> {
    cfg.validate()?;
    let fs = cfg.ofdm.fs;
    let fsdbm = cfg.tx_power_dbm;
    let seed = cfg.ofdm.seed;
    let tx = ofdm_like(&cfg.ofdm)?;
    let si = apply_channel(&tx, &cfg.channel, seed)?;
    let si_power = si.power();
    let (b_lo, b_hi) = cfg.band();
    let floor = si_power / 10f64.powf(cfg.si_to_floor_db / 10.0) / (b_hi - b_lo);
    let floor_db = 10.0 * floor.log10();

    let total = cfg.capture_lead + tx.len();
    let mut rx = vec![C64::new(0.0, 0.0); cfg.capture_lead];
    rx.extend_from_slice(&si.samples);
    let noise_ch = ChannelModel { terms: vec![], linear: vec![], noise_floor_db_per_hz: Some(floor_db) };
    let noise = apply_channel(&IqWaveform::new(vec![C64::new(0.0, 0.0); total], fs)?, &noise_ch, seed.wrapping_add(1))?;
    let tone_amp = cfg.desired_tone_dbm.map(|p| 10f64.powf((p - fsdbm) / 20.0));
    let desired = tone(total, tone_amp.unwrap_or(0.0), cfg.desired_offset_hz, fs);
    let start = if cfg.desired_after_training { cfg.capture_lead + cfg.training_len } else { 0 };
    for (i, ((r, n), d)) in rx.iter_mut().zip(&noise.samples).zip(&desired).enumerate() {
        *r += n;
        if i >= start {
            *r += d;
        }
    }
    let rx = IqWaveform::new(rx, fs)?;

    let preamble = tx.slice(0, cfg.ofdm.sync_len)?;
    let offset = sync(&rx, &preamble)?;
    let avail = (rx.len() - offset).min(tx.len());
    let y = rx.slice(offset, avail)?;
    let x = tx.slice(0, avail)?;
    let basis = build_basis(&x, &cfg.basis_spec())?;
    let (model, info) = train_detailed(&y, &basis, cfg.training_len, cfg.ridge_rel)?;
    let res = cancel(&y, &basis, &model)?;

    let eval = cfg.training_len..avail;
    let y_eval = &y.samples[eval.clone()];
    let r_eval = &res.samples[eval];
    let (y_clean, r_clean, tone_powers) = if tone_amp.is_some() {
        let (pb, yb) = split_tone(y_eval, cfg.desired_offset_hz, fs);
        let (pa, ra) = split_tone(r_eval, cfg.desired_offset_hz, fs);
        (yb, ra, Some((pb, pa)))
    } else {
        (y_eval.to_vec(), r_eval.to_vec(), None)
    };
    let before = IqWaveform::new(y_clean, fs)?;
    let after = IqWaveform::new(r_clean, fs)?;
    let plan = TonePlan::Band { main: (b_lo, b_hi), im3: Some((b_hi + cfg.ofdm.subcarrier_bw / 2.0, 2.0 * b_hi - b_lo)) };
    let m = metrics(&before, &after, &plan, cfg.training_len)?;

    let nfft = cfg.nfft.min(before.len());
    let segs = (2 * before.len() / nfft).saturating_sub(1).max(1);
    let psd_before = psd(&IqWaveform::new(y_eval.to_vec(), fs)?, nfft, segs)?;
    let psd_after = psd(&IqWaveform::new(r_eval.to_vec(), fs)?, nfft, segs)?;
    let psd_clean = psd(&after, nfft, segs)?;
    let inband = psd_clean.mean_density_db(b_lo, b_hi);

    let band_noise = |p: &Psd| p.band_power(b_lo, b_hi);
    let snr = |tone_p: f64, rest: &IqWaveform| -> Result<f64> {
        let p = psd(rest, nfft, segs)?;
        Ok(10.0 * (tone_p / band_noise(&p)).log10())
    };
    let (tone_snr_before_db, tone_snr_after_db) = match tone_powers {
        Some((pb, pa)) => (Some(snr(pb, &before)?), Some(snr(pa, &after)?)),
        None => (None, None),
    };
    let tone_power_dbm = cfg.desired_tone_dbm;
    let si_power_dbm = to_dbm(si_power, fsdbm);
    let summary = DemoSummary {
        seed,
        sync_offset: offset,
        train: info,
        metrics: m,
        si_power_dbm,
        injected_floor_dbm_per_hz: floor_db + fsdbm,
        residual_floor_dbm_per_hz: m.residual_floor_db_per_hz + fsdbm,
        residual_inband_dbm_per_hz: inband + fsdbm,
        tone_power_dbm,
        tone_below_si_db: tone_power_dbm.map(|t| si_power_dbm - t),
        tone_snr_before_db,
        tone_snr_after_db,
        recovered: tone_snr_after_db.is_some_and(|s| s >= 10.0),
    };
    let snippet = y_eval.iter().zip(r_eval).take(cfg.snippet_len).map(|(a, b)| (*a, *b)).collect();
    Ok(DemoOutput { summary, psd_before, psd_after, snippet })
}
