//! Digital self-interference cancellation with a memory-polynomial basis.

use std::ops::Range;
use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tol;
use crate::waveform::{mean_power, psd, tone_amplitude, ChannelModel, IqWaveform};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSpec {
    pub delay_spread: usize,
    pub order_set: Vec<u32>,
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec { delay_spread: 45, order_set: (1..=7).collect() }
    }
}

impl BasisSpec {
    /// Smallest basis holding every order and delay of `ch`.
    pub fn matched(ch: &ChannelModel) -> Self {
        let mut order_set: Vec<u32> = ch.terms.iter().map(|t| t.order).collect();
        if !ch.linear.is_empty() {
            order_set.push(1);
        }
        order_set.sort_unstable();
        order_set.dedup();
        let delay_spread = ch.terms.iter().map(|t| t.delay + 1).chain([ch.linear.len(), 1]).max().unwrap_or(1);
        BasisSpec { delay_spread, order_set }
    }

    pub fn n_columns(&self) -> usize {
        self.order_set.len() * self.delay_spread
    }

    pub fn validate(&self) -> Result<()> {
        if self.delay_spread == 0 {
            return Err(invalid("delay_spread", "must be positive"));
        }
        if self.order_set.is_empty() || self.order_set.contains(&0) {
            return Err(invalid("order_set", "needs orders >= 1"));
        }
        let mut sorted = self.order_set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.order_set.len() {
            return Err(invalid("order_set", "orders must be distinct"));
        }
        Ok(())
    }
}

/// `x |x|^(p-1)` for one order.
fn kernel(v: C64, p: u32) -> C64 {
    if p == 1 {
        v
    } else {
        v * v.norm().powi(p as i32 - 1)
    }
}

/// Basis over one input record. Column `(i, d)` (order index `i`, delay `d`)
/// holds `phi_p(x(n - d))`, zero before the record starts.
#[derive(Debug, Clone)]
pub struct Basis {
    pub spec: BasisSpec,
    /// Per order, the memoryless kernel applied to every sample.
    kernels: Vec<Vec<C64>>,
}

pub fn build_basis(x: &IqWaveform, spec: &BasisSpec) -> Result<Basis> {
    spec.validate()?;
    if x.len() <= spec.delay_spread {
        return Err(invalid("x", "record must be longer than the delay spread"));
    }
    let kernels = spec.order_set.iter().map(|&p| x.samples.iter().map(|&v| kernel(v, p)).collect()).collect();
    Ok(Basis { spec: spec.clone(), kernels })
}

impl Basis {
    pub fn len(&self) -> usize {
        self.kernels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_columns(&self) -> usize {
        self.spec.n_columns()
    }

    fn entry(&self, n: usize, col: usize) -> C64 {
        let (i, d) = (col / self.spec.delay_spread, col % self.spec.delay_spread);
        if n >= d {
            self.kernels[i][n - d]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Dense regression matrix for the rows in `rows`.
    pub fn matrix(&self, rows: Range<usize>) -> Result<DMatrix<C64>> {
        if rows.end > self.len() || rows.start > rows.end {
            return Err(Error::Dimension(format!("rows {rows:?} outside a record of {}", self.len())));
        }
        let start = rows.start;
        Ok(DMatrix::from_fn(rows.len(), self.n_columns(), |r, c| self.entry(start + r, c)))
    }

    /// `sum_c A[n, c] w[c]` without forming `A`.
    fn predict(&self, coeffs: &[C64], n: usize) -> C64 {
        coeffs.iter().enumerate().map(|(c, w)| w * self.entry(n, c)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SicModel {
    pub delay_spread: usize,
    pub order_set: Vec<u32>,
    /// One row per order, one entry per delay, `[re, im]` pairs.
    #[serde(with = "coeff_rows")]
    pub coeffs: Vec<Vec<C64>>,
    pub fs_hz: f64,
}

mod coeff_rows {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = v.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(rows.into_iter().map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect()).collect())
    }
}

impl SicModel {
    pub fn zeros(spec: &BasisSpec, fs_hz: f64) -> Self {
        SicModel {
            delay_spread: spec.delay_spread,
            order_set: spec.order_set.clone(),
            coeffs: vec![vec![C64::new(0.0, 0.0); spec.delay_spread]; spec.order_set.len()],
            fs_hz,
        }
    }

    pub fn spec(&self) -> BasisSpec {
        BasisSpec { delay_spread: self.delay_spread, order_set: self.order_set.clone() }
    }

    pub fn flat(&self) -> Vec<C64> {
        self.coeffs.iter().flatten().copied().collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let m: SicModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        m.spec().validate()?;
        if m.coeffs.len() != m.order_set.len() || m.coeffs.iter().any(|r| r.len() != m.delay_spread) {
            return Err(Error::Dimension("coefficient matrix does not match order_set x delay_spread".into()));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainInfo {
    pub training_len: usize,
    /// Condition number of the unregularized training matrix, columns at unit norm.
    pub condition_number: f64,
    /// Ridge weight actually applied, relative to unit column norm.
    pub ridge_lambda: f64,
}

pub fn train(y: &IqWaveform, basis: &Basis, training_len: usize) -> Result<SicModel> {
    train_detailed(y, basis, training_len, 0.0).map(|(m, _)| m)
}

/// Least squares on the first `training_len` rows by Householder QR, with a
/// ridge of `ridge_rel * trace(A^H A) / n` on the equilibrated columns added
/// through augmented rows. With
/// `ridge_rel = 0` the ridge is skipped unless the condition number exceeds the
/// limit, in which case the default weight is used.
pub fn train_detailed(y: &IqWaveform, basis: &Basis, training_len: usize, ridge_rel: f64) -> Result<(SicModel, TrainInfo)> {
    if !(ridge_rel >= 0.0) {
        return Err(invalid("ridge_rel", "must be non-negative"));
    }
    let n = basis.n_columns();
    if y.len() != basis.len() {
        return Err(Error::Dimension(format!("y has {} samples, basis {}", y.len(), basis.len())));
    }
    if training_len < 4 * n {
        return Err(invalid("training_len", format!("{training_len} < 4 x {n} columns")));
    }
    if training_len > y.len() {
        return Err(invalid("training_len", "longer than the record"));
    }
    let mut a = basis.matrix(0..training_len)?;
    let b = DVector::from_column_slice(&y.samples[..training_len]);
    // Columns are equilibrated to unit norm; orders differ by decades in energy.
    let scale: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if scale.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Singular("SIC basis has an all-zero column".into()));
    }
    for (mut c, s) in a.column_iter_mut().zip(&scale) {
        c.unscale_mut(*s);
    }

    let r = a.clone().qr().r();
    let sv = r.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let rel = if ridge_rel == 0.0 && condition_number > tol::SIC_COND_LIMIT {
        warn!("SIC basis condition number {condition_number:.3e} exceeds {:.0e}; regularizing", tol::SIC_COND_LIMIT);
        tol::SIC_RIDGE_REL
    } else {
        ridge_rel
    };
    // trace(A^H A) / n is 1 after equilibration
    let (a_fit, b_fit, ridge_lambda) = if rel > 0.0 {
        let mut aug = DMatrix::<C64>::zeros(training_len + n, n);
        aug.rows_mut(0, training_len).copy_from(&a);
        for i in 0..n {
            aug[(training_len + i, i)] = C64::new(rel.sqrt(), 0.0);
        }
        let mut baug = DVector::<C64>::zeros(training_len + n);
        baug.rows_mut(0, training_len).copy_from(&b);
        (aug, baug, rel)
    } else {
        (a, b, 0.0)
    };
    let qr = a_fit.qr();
    let qhb = qr.q().ad_mul(&b_fit);
    let mut w = qr
        .r()
        .solve_upper_triangular(&qhb)
        .filter(|w| w.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
        .ok_or_else(|| Error::Singular("rank-deficient SIC basis".into()))?;
    for (v, s) in w.iter_mut().zip(&scale) {
        *v /= *s;
    }
    let coeffs = w.as_slice().chunks(basis.spec.delay_spread).map(|c| c.to_vec()).collect();
    let model = SicModel {
        delay_spread: basis.spec.delay_spread,
        order_set: basis.spec.order_set.clone(),
        coeffs,
        fs_hz: y.fs,
    };
    Ok((model, TrainInfo { training_len, condition_number, ridge_lambda }))
}

/// `y - basis * coeffs` over the whole record.
pub fn cancel(y: &IqWaveform, basis: &Basis, model: &SicModel) -> Result<IqWaveform> {
    if model.spec() != basis.spec {
        return Err(Error::Dimension("model and basis disagree on orders or delay spread".into()));
    }
    if y.len() != basis.len() {
        return Err(Error::Dimension(format!("y has {} samples, basis {}", y.len(), basis.len())));
    }
    let w = model.flat();
    let r = y.samples.iter().enumerate().map(|(n, v)| v - basis.predict(&w, n)).collect();
    IqWaveform::new(r, y.fs)
}

/// Where to measure cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TonePlan {
    TwoTone { f1: f64, f2: f64 },
    Band { main: (f64, f64), im3: Option<(f64, f64)> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SicMetrics {
    pub sic_main_db: f64,
    pub sic_im3_db: Option<f64>,
    /// Median residual density away from the signal, dB relative to full scale per Hz.
    pub residual_floor_db_per_hz: f64,
    pub training_len: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn welch_params(len: usize) -> (usize, usize) {
    let nfft = 4096.min(len.next_power_of_two() / 2).max(2).min(len);
    (nfft, (2 * len / nfft).saturating_sub(1).max(1))
}

fn power_db_ratio(before: f64, after: f64) -> f64 {
    10.0 * (before / after).log10()
}

/// Cancellation achieved between two equal-length evaluation segments.
pub fn metrics(before: &IqWaveform, after: &IqWaveform, plan: &TonePlan, training_len: usize) -> Result<SicMetrics> {
    if before.len() != after.len() {
        return Err(Error::Dimension("before and after differ in length".into()));
    }
    let nyq = before.fs / 2.0;
    let check = |f: f64| if f.abs() >= nyq { Err(Error::Aliasing { f, nyquist: nyq }) } else { Ok(f) };
    let (nfft, segs) = welch_params(after.len());
    let p_after = psd(after, nfft, segs)?;
    let p_before = psd(before, nfft, segs)?;
    let df = p_after.bin_width();
    let (sic_main_db, sic_im3_db, excluded): (f64, Option<f64>, Vec<(f64, f64)>) = match *plan {
        TonePlan::TwoTone { f1, f2 } => {
            let (f1, f2) = (check(f1)?, check(f2)?);
            let im = [check(2.0 * f1 - f2)?, check(2.0 * f2 - f1)?];
            let pw = |x: &IqWaveform, fs: &[f64]| fs.iter().map(|&f| tone_amplitude(&x.samples, f, x.fs).norm_sqr()).sum::<f64>();
            let main = power_db_ratio(pw(before, &[f1, f2]), pw(after, &[f1, f2]));
            let im3 = power_db_ratio(pw(before, &im), pw(after, &im));
            let guard = 4.0 * df;
            let ex = [f1, f2, im[0], im[1]].iter().map(|&f| (f - guard, f + guard)).collect();
            (main, Some(im3), ex)
        }
        TonePlan::Band { main, im3 } => {
            check(main.0)?;
            check(main.1)?;
            let m = power_db_ratio(p_before.band_power(main.0, main.1), p_after.band_power(main.0, main.1));
            let mut ex = vec![main];
            let i = match im3 {
                Some(b) => {
                    check(b.0)?;
                    check(b.1)?;
                    ex.push(b);
                    Some(power_db_ratio(p_before.band_power(b.0, b.1), p_after.band_power(b.0, b.1)))
                }
                None => None,
            };
            (m, i, ex)
        }
    };
    let outside: Vec<f64> = p_after
        .freq_hz
        .iter()
        .zip(&p_after.psd_db)
        .filter(|(f, _)| !excluded.iter().any(|(lo, hi)| **f >= *lo && **f <= *hi))
        .map(|(_, d)| *d)
        .collect();
    // Welch bins of a Gaussian floor are chi-square; the median sits below the mean
    let segments_dof = 2.0 * segs as f64;
    let median_bias_db = chi2_median_over_mean_db(segments_dof);
    Ok(SicMetrics {
        sic_main_db,
        sic_im3_db,
        residual_floor_db_per_hz: median(outside) - median_bias_db,
        training_len,
    })
}

/// `10 log10(median / mean)` of a chi-square variable with `k` degrees of freedom
/// (Wilson-Hilferty approximation).
fn chi2_median_over_mean_db(k: f64) -> f64 {
    10.0 * (1.0 - 2.0 / (9.0 * k)).powi(3).log10()
}

/// Power of `x` relative to `y`, dB.
pub fn relative_power_db(x: &[C64], y: &[C64]) -> f64 {
    10.0 * (mean_power(x) / mean_power(y)).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{apply_channel, ofdm_like, two_tone, ChannelModel, NlTerm, OfdmLikeConfig};
    use approx::assert_abs_diff_eq;

    fn small_x(len: usize) -> IqWaveform {
        ofdm_like(&OfdmLikeConfig { length: len, sync_len: 0, ..Default::default() }).unwrap()
    }

    #[test]
    fn column_counts() {
        let x = small_x(500);
        assert_eq!(build_basis(&x, &BasisSpec::default()).unwrap().n_columns(), 315);
        let lin = build_basis(&x, &BasisSpec { delay_spread: 1, order_set: vec![1] }).unwrap();
        let a = lin.matrix(0..10).unwrap();
        assert_eq!(a.ncols(), 1);
        for n in 0..10 {
            assert_eq!(a[(n, 0)], x.samples[n]);
        }
        let a = build_basis(&x, &BasisSpec { delay_spread: 3, order_set: vec![1, 3] }).unwrap().matrix(0..5).unwrap();
        assert_abs_diff_eq!((a[(4, 3 + 2)] - x.samples[2] * x.samples[2].norm_sqr()).norm(), 0.0, epsilon = 1e-12);
        assert_eq!(a[(1, 2)], C64::new(0.0, 0.0));
        assert!(build_basis(&x.slice(0, 40).unwrap(), &BasisSpec::default()).is_err());
    }

    #[test]
    fn exact_recovery() {
        let x = small_x(3000);
        let spec = BasisSpec { delay_spread: 5, order_set: vec![1, 2, 3] };
        let ch = ChannelModel {
            terms: vec![
                NlTerm { order: 1, delay: 0, coeff: C64::new(0.1, 0.02) },
                NlTerm { order: 1, delay: 4, coeff: C64::new(0.0, -0.01) },
                NlTerm { order: 3, delay: 2, coeff: C64::new(0.003, 0.0) },
            ],
            ..Default::default()
        };
        let y = apply_channel(&x, &ch, 0).unwrap();
        let basis = build_basis(&x, &spec).unwrap();
        let (m, info) = train_detailed(&y, &basis, 1000, 0.0).unwrap();
        assert_eq!(info.ridge_lambda, 0.0);
        let r = cancel(&y, &basis, &m).unwrap();
        assert!(relative_power_db(&r.samples[1000..], &y.samples[1000..]) < -120.0);
        assert_abs_diff_eq!(m.coeffs[2][2].re, 0.003, epsilon = 1e-10);
    }

    #[test]
    fn noise_only_leaves_power() {
        // white input keeps the delayed columns well separated
        let zero = IqWaveform::new(vec![C64::new(0.0, 0.0); 3000], 160e6).unwrap();
        let unit = ChannelModel { terms: vec![], noise_floor_db_per_hz: Some(-10.0 * 160e6f64.log10()), ..Default::default() };
        let x = apply_channel(&zero, &unit, 1).unwrap();
        let ch = ChannelModel { terms: vec![], noise_floor_db_per_hz: Some(-90.0), ..Default::default() };
        let y = apply_channel(&zero, &ch, 3).unwrap();
        let basis = build_basis(&x, &BasisSpec { delay_spread: 5, order_set: vec![1, 3] }).unwrap();
        let m = train(&y, &basis, 2000).unwrap();
        // noise std 0.4 over 2000 rows: estimates scatter around 0.4 / sqrt(2000)
        assert!(m.flat().iter().all(|c| c.norm() < 0.05), "{:?}", m.flat());
        let r = cancel(&y, &basis, &m).unwrap();
        assert!(relative_power_db(&r.samples, &y.samples).abs() < 0.5);
    }

    #[test]
    fn zero_model_is_identity() {
        let x = small_x(500);
        let spec = BasisSpec { delay_spread: 4, order_set: vec![1] };
        let basis = build_basis(&x, &spec).unwrap();
        let r = cancel(&x, &basis, &SicModel::zeros(&spec, x.fs)).unwrap();
        assert_eq!(r, x);
    }

    #[test]
    fn constant_modulus_triggers_ridge() {
        let fs = 160e6;
        let x = IqWaveform::new((0..2000).map(|n| C64::from_polar(1.0, 0.37 * n as f64 + 0.001 * (n * n) as f64)).collect(), fs).unwrap();
        let basis = build_basis(&x, &BasisSpec { delay_spread: 3, order_set: vec![1, 3] }).unwrap();
        let y = apply_channel(&x, &ChannelModel::identity(), 0).unwrap();
        let (m, info) = train_detailed(&y, &basis, 1000, 0.0).unwrap();
        assert!(info.condition_number > tol::SIC_COND_LIMIT);
        assert!(info.ridge_lambda > 0.0);
        let r = cancel(&y, &basis, &m).unwrap();
        assert!(relative_power_db(&r.samples, &y.samples) < -60.0);
    }

    #[test]
    fn two_tone_cubic_metrics() {
        let (fs, n) = (160e6, 16000);
        let x = two_tone(-1e6, 1e6, 0.5, fs, n).unwrap();
        let ch = ChannelModel {
            terms: vec![
                NlTerm { order: 1, delay: 0, coeff: C64::new(0.05, 0.01) },
                NlTerm { order: 3, delay: 0, coeff: C64::new(0.01, -0.002) },
            ],
            ..Default::default()
        };
        let y = apply_channel(&x, &ch, 0).unwrap();
        let basis = build_basis(&x, &BasisSpec { delay_spread: 1, order_set: vec![1, 3] }).unwrap();
        let m = train(&y, &basis, 4000).unwrap();
        let r = cancel(&y, &basis, &m).unwrap();
        let met = metrics(&y.slice(4000, 12000).unwrap(), &r.slice(4000, 12000).unwrap(), &TonePlan::TwoTone { f1: -1e6, f2: 1e6 }, 4000).unwrap();
        assert!(met.sic_main_db > 60.0 && met.sic_im3_db.unwrap() > 60.0, "{met:?}");
        assert!(metrics(&y, &r, &TonePlan::TwoTone { f1: -1e6, f2: 79e6 }, 4000).is_err());
    }

    #[test]
    fn sic_bounded_by_snr() {
        let x = small_x(20_000);
        let fs = x.fs;
        let ch = ChannelModel {
            terms: vec![NlTerm { order: 1, delay: 2, coeff: C64::new(0.1, 0.0) }],
            // noise 40 dB under the SI within the 4 MHz signal band
            noise_floor_db_per_hz: Some(-20.0 - 40.0 - 10.0 * 4e6f64.log10()),
            ..Default::default()
        };
        let y = apply_channel(&x, &ch, 5).unwrap();
        let basis = build_basis(&x, &BasisSpec { delay_spread: 4, order_set: vec![1] }).unwrap();
        let m = train(&y, &basis, 4000).unwrap();
        let r = cancel(&y, &basis, &m).unwrap();
        let plan = TonePlan::Band { main: (1e6, 5e6), im3: None };
        let met = metrics(&y.slice(4000, 16000).unwrap(), &r.slice(4000, 16000).unwrap(), &plan, 4000).unwrap();
        assert!((met.sic_main_db - 40.0).abs() < 1.0, "{met:?}");
        let floor = -20.0 - 40.0 - 10.0 * 4e6f64.log10();
        assert!((met.residual_floor_db_per_hz - floor).abs() < 1.0, "{met:?} vs {floor}");
        let _ = fs;
    }

    #[test]
    fn ninth_order_mismatch_leaves_residual() {
        let x = small_x(6000);
        let ch = ChannelModel {
            terms: vec![
                NlTerm { order: 1, delay: 0, coeff: C64::new(0.1, 0.0) },
                NlTerm { order: 9, delay: 0, coeff: C64::new(1e-4, 0.0) },
            ],
            ..Default::default()
        };
        let y = apply_channel(&x, &ch, 0).unwrap();
        let spec = BasisSpec { delay_spread: 2, order_set: vec![1, 3, 5, 7] };
        let basis = build_basis(&x, &spec).unwrap();
        let r = cancel(&y, &basis, &train(&y, &basis, 3000).unwrap()).unwrap();
        let rel = relative_power_db(&r.samples[3000..], &y.samples[3000..]);
        assert!(rel > -100.0, "{rel}");
    }

    #[test]
    fn model_roundtrip_and_shape_checks() {
        let spec = BasisSpec { delay_spread: 2, order_set: vec![1, 3] };
        let mut m = SicModel::zeros(&spec, 160e6);
        m.coeffs[1][1] = C64::new(0.5, -0.25);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert_eq!(SicModel::load(&p).unwrap(), m);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"fs_hz\""));
        std::fs::write(&p, text.replace("\"delay_spread\": 2", "\"delay_spread\": 3")).unwrap();
        assert!(SicModel::load(&p).is_err());
        let x = small_x(400);
        let basis = build_basis(&x, &BasisSpec { delay_spread: 3, order_set: vec![1, 3] }).unwrap();
        assert!(cancel(&x, &basis, &m).is_err());
        assert!(train(&x, &basis, 10).is_err());
    }
}
