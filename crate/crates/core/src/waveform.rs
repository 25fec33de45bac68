//! Baseband signal generation and measurement.

use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IqWaveform {
    pub samples: Vec<C64>,
    pub fs: f64,
}

impl IqWaveform {
    pub fn new(samples: Vec<C64>, fs: f64) -> Result<Self> {
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(invalid("fs", "must be positive"));
        }
        if samples.is_empty() {
            return Err(Error::Empty("waveform"));
        }
        Ok(IqWaveform { samples, fs })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let s = self.samples.get(start..start + len).ok_or_else(|| Error::Dimension("slice out of range".into()))?;
        IqWaveform::new(s.to_vec(), self.fs)
    }
}

pub fn mean_power(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Rectangular-window DFT coefficient at `f`, normalized so a tone of amplitude
/// `a` on an integer bin returns `a`.
pub fn tone_amplitude(x: &[C64], f: f64, fs: f64) -> C64 {
    let w = -TAU * f / fs;
    x.iter().enumerate().map(|(n, v)| v * C64::from_polar(1.0, w * n as f64)).sum::<C64>() / x.len() as f64
}

pub fn two_tone(f1: f64, f2: f64, amp: f64, fs: f64, n: usize) -> Result<IqWaveform> {
    for f in [f1, f2] {
        if f.abs() >= fs / 2.0 {
            return Err(Error::Aliasing { f, nyquist: fs / 2.0 });
        }
    }
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            C64::from_polar(amp, TAU * f1 * t) + C64::from_polar(amp, TAU * f2 * t)
        })
        .collect();
    IqWaveform::new(samples, fs)
}

/// Unit-energy square-root raised-cosine taps over `span` symbols (odd length,
/// centered).
pub fn srrc_taps(beta: f64, span: usize, sps: usize) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", "must lie in (0, 1]"));
    }
    if span == 0 || sps == 0 {
        return Err(invalid("srrc", "span and sps must be positive"));
    }
    let half = (span * sps / 2) as i64;
    let mut h: Vec<f64> = (-half..=half)
        .map(|i| {
            let t = i as f64 / sps as f64;
            srrc_at(beta, t)
        })
        .collect();
    let e = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter_mut().for_each(|v| *v /= e);
    Ok(h)
}

/// SRRC impulse response at `t` in symbol periods (unnormalized).
fn srrc_at(beta: f64, t: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if (t.abs() - edge).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    num / (PI * t * (1.0 - (4.0 * beta * t).powi(2)))
}

/// Worst inter-symbol leakage of the matched pair `h * h`, relative to its peak.
pub fn nyquist_isi(taps: &[f64], sps: usize) -> f64 {
    let n = taps.len();
    let m = (2 * n).next_power_of_two();
    let mut buf: Vec<C64> = taps.iter().map(|&v| C64::new(v, 0.0)).chain(std::iter::repeat(C64::new(0.0, 0.0))).take(m).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter_mut().for_each(|v| *v = C64::new(v.norm_sqr(), 0.0));
    planner.plan_fft_inverse(m).process(&mut buf);
    // autocorrelation at lag k sits in bin k
    let peak = buf[0].re;
    (1..)
        .map(|k| k * sps)
        .take_while(|&lag| lag < n)
        .map(|lag| buf[lag].re.abs() / peak)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OfdmLikeConfig {
    pub fs: f64,
    pub n_subcarriers: usize,
    pub subcarrier_bw: f64,
    pub total_bw: f64,
    /// Band `[0, notch_hz)` is left empty.
    pub notch_hz: f64,
    pub srrc_beta: f64,
    /// Pulse length in symbols.
    pub srrc_span: usize,
    pub length: usize,
    pub sync_len: usize,
    pub seed: u64,
}

impl Default for OfdmLikeConfig {
    fn default() -> Self {
        OfdmLikeConfig {
            fs: 160e6,
            n_subcarriers: 10,
            subcarrier_bw: 0.4e6,
            total_bw: 5e6,
            notch_hz: 1e6,
            srrc_beta: 0.22,
            srrc_span: 12,
            length: 50_000,
            sync_len: 2000,
            seed: 1,
        }
    }
}

impl OfdmLikeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0 && self.subcarrier_bw > 0.0 && self.total_bw > 0.0) {
            return Err(invalid("ofdm", "rates and bandwidths must be positive"));
        }
        if self.n_subcarriers == 0 || self.length == 0 {
            return Err(invalid("ofdm", "need subcarriers and samples"));
        }
        if !(self.notch_hz >= 0.0 && self.notch_hz < self.total_bw) {
            return Err(invalid("notch_hz", "must lie inside the band"));
        }
        if self.notch_hz + self.n_subcarriers as f64 * self.subcarrier_bw > self.total_bw * (1.0 + 1e-12) {
            return Err(invalid("n_subcarriers", "subcarriers do not fit between the notch and total_bw"));
        }
        if self.total_bw >= self.fs / 2.0 {
            return Err(Error::Aliasing { f: self.total_bw, nyquist: self.fs / 2.0 });
        }
        if !(self.srrc_beta > 0.0 && self.srrc_beta <= 1.0) || self.srrc_span == 0 {
            return Err(invalid("srrc", "beta in (0, 1] and a positive span"));
        }
        self.samples_per_symbol().map(|_| ())
    }

    /// Oversampling that makes each shaped stream occupy exactly `subcarrier_bw`.
    pub fn samples_per_symbol(&self) -> Result<usize> {
        let sps = self.fs * (1.0 + self.srrc_beta) / self.subcarrier_bw;
        if (sps - sps.round()).abs() > 1e-6 || sps.round() < 2.0 {
            return Err(invalid("subcarrier_bw", format!("fs (1 + beta) / bw = {sps} is not an integer >= 2")));
        }
        Ok(sps.round() as usize)
    }

    pub fn symbol_rate(&self) -> f64 {
        self.subcarrier_bw / (1.0 + self.srrc_beta)
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_subcarriers)
            .map(|k| self.notch_hz + (k as f64 + 0.5) * self.subcarrier_bw)
            .collect()
    }
}

/// QPSK streams, SRRC shaped and shifted onto their carriers, scaled to unit
/// power. The first `sync_len` samples are the preamble.
pub fn ofdm_like(cfg: &OfdmLikeConfig) -> Result<IqWaveform> {
    cfg.validate()?;
    let sps = cfg.samples_per_symbol()?;
    let taps = srrc_taps(cfg.srrc_beta, cfg.srrc_span, sps)?;
    let half = taps.len() / 2;
    let total = cfg.sync_len + cfg.length;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = vec![C64::new(0.0, 0.0); total];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for fc in cfg.centers() {
        let mut stream = vec![C64::new(0.0, 0.0); total];
        // symbols whose pulses reach into the window
        let n_sym = (total + 2 * half) / sps + 1;
        for k in 0..n_sym {
            let sym = C64::new(if rng.random::<bool>() { s } else { -s }, if rng.random::<bool>() { s } else { -s });
            let center = (k * sps) as i64 - half as i64;
            let lo = (center - half as i64).max(0);
            let hi = (center + half as i64).min(total as i64 - 1);
            for n in lo..=hi {
                stream[n as usize] += sym * taps[(n - center + half as i64) as usize];
            }
        }
        let w = TAU * fc / cfg.fs;
        for (n, v) in stream.into_iter().enumerate() {
            x[n] += v * C64::from_polar(1.0, w * n as f64);
        }
    }
    let p = mean_power(&x).sqrt();
    x.iter_mut().for_each(|v| *v /= p);
    IqWaveform::new(x, cfg.fs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlTerm {
    pub order: u32,
    pub delay: usize,
    #[serde(with = "crate::cplx")]
    pub coeff: C64,
}

/// Memory-polynomial leakage path plus complex AWGN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelModel {
    /// Linear FIR taps, applied on top of `terms`.
    #[serde(with = "crate::cplx::pair")]
    pub linear: Vec<C64>,
    pub terms: Vec<NlTerm>,
    /// Noise density in dB relative to full scale per Hz; `None` is noiseless.
    pub noise_floor_db_per_hz: Option<f64>,
}

impl ChannelModel {
    pub fn identity() -> Self {
        ChannelModel { terms: vec![NlTerm { order: 1, delay: 0, coeff: C64::new(1.0, 0.0) }], ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.iter().any(|t| t.order == 0) {
            return Err(invalid("order", "must be at least 1"));
        }
        Ok(())
    }

    /// Per-sample complex noise variance at sample rate `fs`.
    pub fn noise_variance(&self, fs: f64) -> f64 {
        self.noise_floor_db_per_hz.map_or(0.0, |d| 10f64.powf(d / 10.0) * fs)
    }

    /// Noiseless response at sample `n`; depends only on `x[..=n]`.
    fn response(&self, x: &[C64], n: usize) -> C64 {
        let mut y = C64::new(0.0, 0.0);
        for (k, h) in self.linear.iter().enumerate() {
            if k <= n {
                y += h * x[n - k];
            }
        }
        for t in &self.terms {
            if t.delay <= n {
                let v = x[n - t.delay];
                y += t.coeff * v * v.norm().powi(t.order as i32 - 1);
            }
        }
        y
    }
}

/// `y(n) = sum h_{p,d} x(n-d) |x(n-d)|^(p-1) + linear FIR + noise`.
pub fn apply_channel(x: &IqWaveform, ch: &ChannelModel, seed: u64) -> Result<IqWaveform> {
    ch.validate()?;
    let var = ch.noise_variance(x.fs);
    let normal = Normal::new(0.0, (var / 2.0).sqrt()).map_err(|e| invalid("noise", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = (0..x.len())
        .map(|n| {
            let mut v = ch.response(&x.samples, n);
            if var > 0.0 {
                v += C64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
            v
        })
        .collect();
    IqWaveform::new(y, x.fs)
}

fn fft_in_place(buf: &mut [C64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(buf.len()) } else { planner.plan_fft_forward(buf.len()) };
    plan.process(buf);
}

/// `r[k] = sum_n a[k + n] conj(b[n])` for `k` in `0..=a.len() - b.len()`.
fn cross_correlate(a: &[C64], b: &[C64]) -> Vec<C64> {
    let m = (a.len() + b.len()).next_power_of_two();
    let zero = C64::new(0.0, 0.0);
    let mut fa: Vec<C64> = a.iter().copied().chain(std::iter::repeat(zero)).take(m).collect();
    let mut fb: Vec<C64> = b.iter().copied().chain(std::iter::repeat(zero)).take(m).collect();
    fft_in_place(&mut fa, false);
    fft_in_place(&mut fb, false);
    let mut prod: Vec<C64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    fft_in_place(&mut prod, true);
    prod.truncate(a.len() - b.len() + 1);
    prod.iter().map(|v| v / m as f64).collect()
}

/// Lag where the preamble's autocorrelation magnitude first falls to half power.
fn half_power_lag(p: &[C64]) -> usize {
    let e: f64 = p.iter().map(|v| v.norm_sqr()).sum();
    (1..p.len())
        .find(|&k| {
            let r: C64 = p[k..].iter().zip(p).map(|(a, b)| a * b.conj()).sum();
            r.norm() / e <= std::f64::consts::FRAC_1_SQRT_2
        })
        .unwrap_or(p.len())
}

/// Offset of `preamble` inside `rx` by normalized cross-correlation.
pub fn sync(rx: &IqWaveform, preamble: &IqWaveform) -> Result<usize> {
    let l = preamble.len();
    if l >= rx.len() {
        return Err(invalid("preamble", "must be shorter than rx"));
    }
    let corr = cross_correlate(&rx.samples, &preamble.samples);
    let pe: f64 = preamble.samples.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut cum = vec![0.0; rx.len() + 1];
    for (i, v) in rx.samples.iter().enumerate() {
        cum[i + 1] = cum[i] + v.norm_sqr();
    }
    let score: Vec<f64> = corr
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let re = (cum[k + l] - cum[k]).max(0.0).sqrt();
            if re == 0.0 || pe == 0.0 {
                0.0
            } else {
                c.norm() / (pe * re)
            }
        })
        .collect();
    let (best, &peak) = score
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Empty("correlation"))?;
    let excl = 2 * half_power_lag(&preamble.samples).max(1);
    let next = score
        .iter()
        .enumerate()
        .filter(|(k, _)| k.abs_diff(best) > excl)
        .map(|(_, &s)| s)
        .fold(0.0, f64::max);
    let ratio_db = if next == 0.0 { f64::INFINITY } else { 20.0 * (peak / next).log10() };
    if !(ratio_db >= 3.0) {
        return Err(Error::SyncFailed { ratio_db });
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psd {
    pub freq_hz: Vec<f64>,
    /// Density in dB relative to full scale per Hz.
    pub psd_db: Vec<f64>,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.freq_hz.get(1).zip(self.freq_hz.first()).map_or(0.0, |(a, b)| a - b)
    }

    /// Integrated power between `f_lo` and `f_hi` (inclusive bins).
    pub fn band_power(&self, f_lo: f64, f_hi: f64) -> f64 {
        let df = self.bin_width();
        self.freq_hz
            .iter()
            .zip(&self.psd_db)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(_, d)| 10f64.powf(d / 10.0) * df)
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.band_power(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Mean density (linear) over a band, in dB.
    pub fn mean_density_db(&self, f_lo: f64, f_hi: f64) -> f64 {
        let v: Vec<f64> = self
            .freq_hz
            .iter()
            .zip(&self.psd_db)
            .filter(|(f, _)| **f >= f_lo && **f <= f_hi)
            .map(|(_, d)| 10f64.powf(d / 10.0))
            .collect();
        10.0 * (v.iter().sum::<f64>() / v.len() as f64).log10()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "freq_hz,psd_db")?;
        for (f, d) in self.freq_hz.iter().zip(&self.psd_db) {
            writeln!(w, "{f},{d}")?;
        }
        Ok(())
    }
}

/// Welch estimate with a Hann window, `segments` evenly spread over the record.
pub fn psd(x: &IqWaveform, nfft: usize, segments: usize) -> Result<Psd> {
    if nfft < 2 || nfft > x.len() {
        return Err(invalid("nfft", format!("must lie in [2, {}]", x.len())));
    }
    if segments == 0 {
        return Err(invalid("segments", "must be positive"));
    }
    let win: Vec<f64> = (0..nfft).map(|n| 0.5 - 0.5 * (TAU * n as f64 / nfft as f64).cos()).collect();
    let wpow: f64 = win.iter().map(|w| w * w).sum();
    let hop = if segments > 1 { (x.len() - nfft) / (segments - 1) } else { 0 };
    let mut planner = FftPlanner::new();
    let plan = planner.plan_fft_forward(nfft);
    let mut acc = vec![0.0; nfft];
    for s in 0..segments {
        let start = s * hop;
        let mut buf: Vec<C64> = x.samples[start..start + nfft].iter().zip(&win).map(|(v, w)| v * w).collect();
        plan.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            *a += v.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * x.fs * wpow);
    let df = x.fs / nfft as f64;
    let half = nfft / 2;
    let (freq_hz, psd_db) = (0..nfft)
        .map(|i| {
            // fftshift: negative frequencies first
            let k = (i + nfft - half) % nfft;
            let f = if k >= nfft - half { k as f64 - nfft as f64 } else { k as f64 } * df;
            (f, 10.0 * (acc[k] * scale).max(1e-300).log10())
        })
        .unzip();
    Ok(Psd { freq_hz, psd_db })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqMeta {
    pub fs_hz: f64,
    pub full_scale_dbm: f64,
    pub seed: u64,
}

/// Sidecar path: `capture.iq` goes with `capture.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Interleaved little-endian f64 I/Q pairs plus a JSON sidecar.
pub fn write_iq(path: &Path, x: &IqWaveform, full_scale_dbm: f64, seed: u64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in &x.samples {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    let meta = IqMeta { fs_hz: x.fs, full_scale_dbm, seed };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_iq(path: &Path) -> Result<(IqWaveform, IqMeta)> {
    let meta: IqMeta = serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Dimension("IQ file length is not a multiple of 16 bytes".into()));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    let samples = bytes.chunks_exact(16).map(|c| C64::new(f(&c[..8]), f(&c[8..]))).collect();
    Ok((IqWaveform::new(samples, meta.fs_hz)?, meta))
}
