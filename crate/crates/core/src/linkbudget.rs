//! Full-duplex link budget: noise floor, required cancellation, range.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Thermal noise density at 290 K, dBm/Hz.
pub const KT_DBM_PER_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub ptx_dbm: f64,
    pub bw_hz: f64,
    pub nf_db: f64,
    pub snr_req_db: f64,
    /// Gain of each antenna (TX and RX).
    pub ant_gain_dbi: f64,
    pub impl_loss_db: f64,
    pub fading_margin_db: f64,
    pub residual_si_penalty_db: f64,
    pub freq_hz: f64,
    /// Cancellation available beyond the antenna interface, reported only.
    pub extra_bb_sic_db: f64,
    /// 2 is free space.
    pub path_loss_exponent: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            ptx_dbm: 8.0,
            bw_hz: 20e6,
            nf_db: 8.0,
            snr_req_db: 15.0,
            ant_gain_dbi: 2.5,
            impl_loss_db: 5.0,
            fading_margin_db: 10.0,
            residual_si_penalty_db: 5.0,
            freq_hz: 750e6,
            extra_bb_sic_db: 20.0,
            path_loss_exponent: 2.0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.ptx_dbm,
            self.bw_hz,
            self.nf_db,
            self.snr_req_db,
            self.ant_gain_dbi,
            self.impl_loss_db,
            self.fading_margin_db,
            self.residual_si_penalty_db,
            self.freq_hz,
            self.extra_bb_sic_db,
            self.path_loss_exponent,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("link", "all fields must be finite"));
        }
        if !(self.bw_hz > 0.0) {
            return Err(invalid("bw_hz", "must be positive"));
        }
        if !(self.freq_hz > 0.0) {
            return Err(invalid("freq_hz", "must be positive"));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(invalid("path_loss_exponent", "must be positive"));
        }
        Ok(())
    }
}

pub fn noise_floor(bw_hz: f64, nf_db: f64) -> Result<f64> {
    if !(bw_hz > 0.0) {
        return Err(invalid("bw_hz", "must be positive"));
    }
    Ok(KT_DBM_PER_HZ + 10.0 * bw_hz.log10() + nf_db)
}

pub fn required_sic(ptx_dbm: f64, floor_dbm: f64) -> f64 {
    ptx_dbm - floor_dbm
}

/// Free-space loss at 1 m, dB.
fn reference_loss_db(freq_hz: f64) -> f64 {
    20.0 * (4.0 * PI * freq_hz / SPEED_OF_LIGHT).log10()
}

/// Distance at which the path loss (1 m free-space reference, then
/// `10 n log10(d)`) equals `budget_db`.
pub fn range_for_budget(budget_db: f64, freq_hz: f64, exponent: f64) -> f64 {
    10f64.powf((budget_db - reference_loss_db(freq_hz)) / (10.0 * exponent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkReport {
    pub noise_floor_dbm: f64,
    pub required_sic_db: f64,
    /// Cancellation still needed after the extra BB stage.
    pub remaining_sic_db: f64,
    pub budget_db: f64,
    pub range_m: f64,
    /// Set when the budget cannot even cover the 1 m reference loss.
    pub below_reference: bool,
}

pub fn link_range(cfg: &LinkConfig) -> Result<LinkReport> {
    cfg.validate()?;
    let floor = noise_floor(cfg.bw_hz, cfg.nf_db)?;
    let budget_db = cfg.ptx_dbm + 2.0 * cfg.ant_gain_dbi
        - (floor + cfg.impl_loss_db + cfg.snr_req_db)
        - cfg.residual_si_penalty_db
        - cfg.fading_margin_db;
    let range_m = range_for_budget(budget_db, cfg.freq_hz, cfg.path_loss_exponent);
    let required = required_sic(cfg.ptx_dbm, floor);
    Ok(LinkReport {
        noise_floor_dbm: floor,
        required_sic_db: required,
        remaining_sic_db: required - cfg.extra_bb_sic_db,
        budget_db,
        range_m,
        below_reference: range_m < 1.0,
    })
}

impl LinkReport {
    pub fn to_table(&self) -> String {
        let rows = [
            ("noise floor", format!("{:.2}", self.noise_floor_dbm), "dBm"),
            ("required SIC", format!("{:.2}", self.required_sic_db), "dB"),
            ("remaining SIC", format!("{:.2}", self.remaining_sic_db), "dB"),
            ("link budget", format!("{:.2}", self.budget_db), "dB"),
            ("range", format!("{:.1}", self.range_m), "m"),
        ];
        let w = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, v, unit) in rows {
            let _ = writeln!(out, "{name:<14} {v:>w$} {unit}");
        }
        if self.below_reference {
            out.push_str("warning: budget below the 1 m reference loss\n");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn floors() {
        assert_abs_diff_eq!(noise_floor(20e6, 8.0).unwrap(), -92.99, epsilon = 0.005);
        assert_abs_diff_eq!(noise_floor(1.0, 0.0).unwrap(), -174.0, epsilon = 1e-12);
        assert_abs_diff_eq!(noise_floor(20e6, 0.0).unwrap(), -100.99, epsilon = 0.005);
        assert!(noise_floor(0.0, 0.0).is_err());
    }

    #[test]
    fn sic_requirements() {
        assert_abs_diff_eq!(required_sic(8.0, -93.0), 101.0);
        assert_eq!(required_sic(0.0, 0.0), 0.0);
        assert_abs_diff_eq!(required_sic(8.0, -73.0), 81.0);
    }

    #[test]
    fn default_budget_and_range() {
        let r = link_range(&LinkConfig::default()).unwrap();
        assert_abs_diff_eq!(r.budget_db, 71.0, epsilon = 0.05);
        assert!(r.range_m > 110.0 && r.range_m < 115.0, "{r:?}");
        assert!(!r.below_reference);
        // 20 dB less budget is a tenth of the distance
        let d51 = range_for_budget(r.budget_db - 20.0, 750e6, 2.0);
        assert_abs_diff_eq!(d51 * 10.0, r.range_m, epsilon = 1e-9 * r.range_m);
        assert_abs_diff_eq!(range_for_budget(51.0, 750e6, 2.0), 11.3, epsilon = 0.1);
    }

    #[test]
    fn negative_budget_is_flagged() {
        let r = link_range(&LinkConfig { ptx_dbm: -90.0, ..Default::default() }).unwrap();
        assert!(r.budget_db < 0.0 && r.range_m < 1.0 && r.below_reference);
        assert!(r.to_table().contains("warning"));
    }

    #[test]
    fn table_is_aligned() {
        let t = link_range(&LinkConfig::default()).unwrap().to_table();
        let cols: Vec<usize> = t.lines().map(|l| l.rfind(' ').unwrap()).collect();
        assert!(cols.windows(2).all(|w| w[0] == w[1]), "{t}");
    }
}
