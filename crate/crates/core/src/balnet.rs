//! Balance-network and matching-network impedance models, and the bank tuner.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circmodel::{isolation_db, mean, BalancePortResponse, CirculatorParams, Drive, NetworkOptions};
use crate::error::{invalid, Error, Result};
use crate::netcore::{cascade, db20, reflection, Abcd, PiSection, Termination};
use crate::noisemodel::noise_factor;

/// Parallel G + C bank. Code 0 on both halves is an open circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RcBank {
    pub r_code: u8,
    pub c_code: u8,
    /// Conductance per R-code LSB, S.
    pub g_lsb: f64,
    /// Capacitance per C-code LSB, F.
    pub c_lsb: f64,
}

pub const R_BITS: u32 = 6;
pub const C_BITS: u32 = 5;

/// Default LSBs: code 32 is exactly 50 ohm, full scale about 25 ohm.
pub const DEFAULT_G_LSB: f64 = 1.0 / 1600.0;
/// Default C LSB: full scale 2 pF.
pub const DEFAULT_C_LSB: f64 = 2e-12 / 31.0;

impl Default for RcBank {
    fn default() -> Self {
        RcBank {
            r_code: 0,
            c_code: 0,
            g_lsb: DEFAULT_G_LSB,
            c_lsb: DEFAULT_C_LSB,
        }
    }
}

impl RcBank {
    pub fn new(r_code: u8, c_code: u8) -> Result<Self> {
        RcBank { r_code, c_code, ..Default::default() }.checked()
    }

    pub fn checked(self) -> Result<Self> {
        if u32::from(self.r_code) >= 1 << R_BITS {
            return Err(invalid("r_code", format!("{} exceeds {R_BITS} bits", self.r_code)));
        }
        if u32::from(self.c_code) >= 1 << C_BITS {
            return Err(invalid("c_code", format!("{} exceeds {C_BITS} bits", self.c_code)));
        }
        if !(self.g_lsb > 0.0 && self.c_lsb > 0.0) {
            return Err(invalid("bank", "LSB values must be positive"));
        }
        Ok(self)
    }

    pub fn admittance(&self, f: f64) -> C64 {
        C64::new(f64::from(self.r_code) * self.g_lsb, TAU * f * f64::from(self.c_code) * self.c_lsb)
    }
}

pub fn bank_impedance(bank: &RcBank, f: f64) -> Result<Termination> {
    if !(f > 0.0) {
        return Err(invalid("f", "must be positive"));
    }
    let y = bank.checked()?.admittance(f);
    Ok(if y == C64::new(0.0, 0.0) { Termination::Open } else { Termination::Z(1.0 / y) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderElement {
    SeriesL { l: f64 },
    ShuntC { c: f64 },
}

/// LC ladder seen from its input, far end shorted to ground. Inductors share one Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LcLadder {
    pub elements: Vec<LadderElement>,
    pub q: f64,
}

impl Default for LcLadder {
    /// Non-authoritative values: about 50 ohm at 750 MHz with the two
    /// capacitors steering Z along nearly perpendicular directions.
    fn default() -> Self {
        LcLadder {
            elements: vec![
                LadderElement::ShuntC { c: 4.673e-12 },
                LadderElement::SeriesL { l: 49.60e-9 },
                LadderElement::ShuntC { c: 2.073e-12 },
                LadderElement::SeriesL { l: 42.40e-9 },
            ],
            q: 20.0,
        }
    }
}

impl LcLadder {
    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::NoSections);
        }
        if !(self.q > 0.0) {
            return Err(invalid("q", "must be positive"));
        }
        let bad = self.elements.iter().any(|e| match *e {
            LadderElement::SeriesL { l } => !(l > 0.0),
            // a zero capacitor is allowed as the untuned limit
            LadderElement::ShuntC { c } => !(c >= 0.0),
        });
        if bad {
            return Err(invalid("ladder", "element values must be positive"));
        }
        Ok(())
    }

    /// Indices of the tunable capacitors.
    pub fn cap_indices(&self) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, LadderElement::ShuntC { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn with_cap(&self, index: usize, c: f64) -> Self {
        let mut out = self.clone();
        if let Some(LadderElement::ShuntC { c: old }) = out.elements.get_mut(index) {
            *old = c;
        }
        out
    }
}

pub fn ladder_impedance(ladder: &LcLadder, f: f64) -> Result<C64> {
    ladder.validate()?;
    if !(f > 0.0) {
        return Err(invalid("f", "must be positive"));
    }
    let w = TAU * f;
    let parts: Vec<Abcd> = ladder
        .elements
        .iter()
        .map(|e| match *e {
            LadderElement::SeriesL { l } => {
                let x = w * l;
                Abcd::series(C64::new(if ladder.q.is_finite() { x / ladder.q } else { 0.0 }, x))
            }
            LadderElement::ShuntC { c } => Abcd::shunt(C64::new(0.0, w * c)),
        })
        .collect();
    match cascade(&parts)?.input_impedance(Termination::Z(C64::new(0.0, 0.0)))? {
        Termination::Z(z) => Ok(z),
        Termination::Open => Err(Error::DegenerateNetwork),
    }
}

/// Largest |cos| between the impedance displacements caused by nudging each
/// pair of tunable capacitors; 0 means perfectly orthogonal control.
pub fn orthogonality_error(ladder: &LcLadder, f: f64) -> Result<f64> {
    let z0 = ladder_impedance(ladder, f)?;
    let dirs = ladder
        .cap_indices()
        .into_iter()
        .map(|i| {
            let LadderElement::ShuntC { c } = ladder.elements[i] else { unreachable!() };
            let dc = (c * 1e-4).max(1e-18);
            Ok(ladder_impedance(&ladder.with_cap(i, c + dc), f)? - z0)
        })
        .collect::<Result<Vec<C64>>>()?;
    let mut worst: f64 = 0.0;
    for (i, a) in dirs.iter().enumerate() {
        for b in &dirs[i + 1..] {
            let cos = (a.conj() * b).re / (a.norm() * b.norm());
            worst = worst.max(cos.abs());
        }
    }
    Ok(worst)
}

/// Shunt-C1, series-L, shunt-C2 matching network (C2 at the load).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClcNetwork {
    pub c1: f64,
    pub l: f64,
    pub c2: f64,
}

impl ClcNetwork {
    fn abcd(&self, f: f64) -> Abcd {
        let w = TAU * f;
        Abcd::shunt(C64::new(0.0, w * self.c1)) * Abcd::series(C64::new(0.0, w * self.l)) * Abcd::shunt(C64::new(0.0, w * self.c2))
    }
}

/// Impedance seen looking into the network with `zload` on the far side.
pub fn clc_match(net: &ClcNetwork, zload: C64, f: f64) -> Result<C64> {
    if !(net.c1 > 0.0 && net.l > 0.0 && net.c2 > 0.0) {
        return Err(invalid("clc", "element values must be positive"));
    }
    if !(f > 0.0) {
        return Err(invalid("f", "must be positive"));
    }
    match net.abcd(f).input_impedance(Termination::Z(zload))? {
        Termination::Z(z) => Ok(z),
        Termination::Open => Err(Error::DegenerateNetwork),
    }
}

pub fn vswr(z: C64, z0: f64) -> f64 {
    crate::netcore::vswr(Termination::Z(z), z0)
}

/// Symmetric CLC (C1 = C2) that presents `z0 * target_vswr` (resistive) at `f`
/// when loaded with `zload`. Newton iteration on the two unknowns (C, L),
/// started from the quarter-wave transformer.
pub fn design_clc_match(zload: C64, f: f64, target_vswr: f64, z0: f64) -> Result<ClcNetwork> {
    if !(target_vswr >= 1.0) {
        return Err(invalid("target_vswr", "must be at least 1"));
    }
    if !(zload.re > 0.0) {
        return Err(invalid("zload", "needs a positive resistance"));
    }
    let target = C64::new(z0 * target_vswr, 0.0);
    let w = TAU * f;
    let zc = (zload.norm() * target.re).sqrt();
    let mut x = [(1.0 / (w * zc)).ln(), (zc / w).ln()];
    let eval = |x: &[f64; 2]| -> Result<C64> {
        let (c, l) = (x[0].exp(), x[1].exp());
        Ok(clc_match(&ClcNetwork { c1: c, l, c2: c }, zload, f)? - target)
    };
    for _ in 0..100 {
        let r = eval(&x)?;
        if r.norm() < 1e-12 * z0 {
            break;
        }
        let h = 1e-7;
        let d0 = (eval(&[x[0] + h, x[1]])? - r) / h;
        let d1 = (eval(&[x[0], x[1] + h])? - r) / h;
        // solve [d0 d1] dx = -r over the reals
        let det = d0.re * d1.im - d1.re * d0.im;
        if det.abs() < 1e-300 {
            return Err(Error::NoSolution("singular Jacobian in CLC design".into()));
        }
        let dx0 = (-r.re * d1.im + r.im * d1.re) / det;
        let dx1 = (-d0.re * r.im + d0.im * r.re) / det;
        x[0] += dx0.clamp(-0.5, 0.5);
        x[1] += dx1.clamp(-0.5, 0.5);
    }
    if eval(&x)?.norm() > 1e-6 * z0 {
        return Err(Error::NoSolution("CLC design did not converge".into()));
    }
    let c = x[0].exp();
    Ok(ClcNetwork { c1: c, l: x[1].exp(), c2: c })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub f_center: f64,
    pub bw: f64,
    pub n_points: usize,
}

impl Band {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.n_points == 0 {
            return Err(Error::Empty("band"));
        }
        if !(self.f_center > 0.0 && self.bw >= 0.0 && self.bw < 2.0 * self.f_center) {
            return Err(invalid("band", "needs f_center > 0 and 0 <= bw < 2 f_center"));
        }
        if self.n_points == 1 {
            return Ok(vec![self.f_center]);
        }
        let step = self.bw / (self.n_points - 1) as f64;
        Ok((0..self.n_points).map(|i| self.f_center - self.bw / 2.0 + i as f64 * step).collect())
    }
}

impl Default for Band {
    fn default() -> Self {
        Band { f_center: 750e6, bw: 20e6, n_points: 21 }
    }
}

/// Tuner search space. Bit widths below the hardware's shrink the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BankSpec {
    pub g_lsb: f64,
    pub c_lsb: f64,
    pub r_bits: u32,
    pub c_bits: u32,
}

impl Default for BankSpec {
    fn default() -> Self {
        BankSpec {
            g_lsb: DEFAULT_G_LSB,
            c_lsb: DEFAULT_C_LSB,
            r_bits: R_BITS,
            c_bits: C_BITS,
        }
    }
}

impl BankSpec {
    fn codes(&self) -> Result<impl Iterator<Item = (u8, u8)>> {
        if self.r_bits > R_BITS || self.c_bits > C_BITS {
            return Err(invalid("bank", "bit widths exceed the hardware banks"));
        }
        let (nr, nc) = (1u16 << self.r_bits, 1u16 << self.c_bits);
        Ok((0..nr).flat_map(move |r| (0..nc).map(move |c| (r as u8, c as u8))))
    }

    pub fn bank(&self, r_code: u8, c_code: u8) -> RcBank {
        RcBank { r_code, c_code, g_lsb: self.g_lsb, c_lsb: self.c_lsb }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codes {
    pub r_code: u8,
    pub c_code: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunerResult {
    pub codes: Codes,
    /// Bank impedance at the band center.
    pub zbal_at_f0: Termination,
    pub avg_isolation_db: f64,
    /// Band-mean ANT-to-BB gain lost against the open bank.
    pub gain_penalty_db: f64,
    /// NF at the chosen code minus NF with the bank open.
    pub nf_penalty_db: f64,
    pub untuned_isolation_db: f64,
}

struct BandPoint {
    f: f64,
    tx: BalancePortResponse,
    ant: BalancePortResponse,
}

/// NF with the nominal antenna and the total shunt (bank plus parasitic) at BAL.
fn nf_db(p: &CirculatorParams, opts: &NetworkOptions, y_bank: C64, f: f64) -> Result<f64> {
    let y = y_bank + C64::new(0.0, TAU * f * opts.bal_shunt_c);
    let zbal = if y == C64::new(0.0, 0.0) { Termination::Open } else { Termination::Z(1.0 / y) };
    let q = CirculatorParams { zant: C64::new(p.z0, 0.0), zbal, ..*p };
    Ok(noise_factor(&q)?.nf_db)
}

/// Exhaustive search over the bank codes maximizing mean TX-to-BB isolation.
/// `p.zbal` is ignored: the bank is the balance network.
pub fn tune(p: &CirculatorParams, opts: &NetworkOptions, band: &Band, spec: &BankSpec) -> Result<TunerResult> {
    let p = CirculatorParams { zbal: Termination::Open, ..*p };
    p.validate()?;
    let grid = band.grid()?;
    crate::circmodel::check_grid(&p, &grid)?;
    let v = C64::new(2.0, 0.0);
    let points = grid
        .iter()
        .map(|&f| {
            Ok(BandPoint {
                f,
                tx: BalancePortResponse::compute(&p, opts, f, Drive::Tx(v))?,
                ant: BalancePortResponse::compute(&p, opts, f, Drive::Ant(v))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let iso = |bank: &RcBank| mean(points.iter().map(|pt| isolation_db(pt.tx.with_shunt(bank.admittance(pt.f)).v1, v)));
    let gain = |bank: &RcBank| mean(points.iter().map(|pt| db20(pt.ant.with_shunt(bank.admittance(pt.f)).v1.norm() / (v.norm() / 2.0))));

    let open = spec.bank(0, 0);
    let nf_open = nf_db(&p, opts, C64::new(0.0, 0.0), band.f_center)?;
    let mut best: Option<(f64, f64, RcBank)> = None;
    for (r, c) in spec.codes()? {
        let bank = spec.bank(r, c);
        let i = iso(&bank);
        let better = match &best {
            None => true,
            Some((bi, bnf, _)) => {
                if i != *bi {
                    i > *bi
                } else {
                    // codes arrive in ascending order, so only a strictly lower NF wins
                    nf_db(&p, opts, bank.admittance(band.f_center), band.f_center)? - nf_open < *bnf
                }
            }
        };
        if better {
            let nf = nf_db(&p, opts, bank.admittance(band.f_center), band.f_center)? - nf_open;
            best = Some((i, nf, bank));
        }
    }
    let (avg_isolation_db, nf_penalty_db, bank) = best.ok_or(Error::Empty("code lattice"))?;
    Ok(TunerResult {
        codes: Codes { r_code: bank.r_code, c_code: bank.c_code },
        zbal_at_f0: bank_impedance(&bank, band.f_center)?,
        avg_isolation_db,
        gain_penalty_db: gain(&open) - gain(&bank),
        nf_penalty_db,
        untuned_isolation_db: iso(&open),
    })
}

/// Reflection of a bank setting against `z0`, for reports.
pub fn bank_reflection(bank: &RcBank, f: f64, z0: f64) -> Result<C64> {
    Ok(reflection(bank_impedance(bank, f)?, z0))
}

/// CLC section whose quarter-wave behavior leaves a `zc` load untouched at `f0`.
pub fn transparent_clc(zc: f64, f0: f64) -> ClcNetwork {
    let s = PiSection::quarter_wave(zc, f0);
    ClcNetwork { c1: s.c, l: s.l, c2: s.c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circmodel::frequency_sweep_with;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bank_codes() {
        assert_eq!(bank_impedance(&RcBank::new(0, 0).unwrap(), 750e6).unwrap(), Termination::Open);
        let z = bank_impedance(&RcBank::new(32, 0).unwrap(), 750e6).unwrap().impedance().unwrap();
        assert_abs_diff_eq!(z.re, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        let full = bank_impedance(&RcBank::new(63, 0).unwrap(), 750e6).unwrap().impedance().unwrap();
        assert_abs_diff_eq!(full.re, 1600.0 / 63.0, epsilon = 1e-12);
        assert!(RcBank::new(64, 0).is_err());
        assert!(RcBank::new(0, 32).is_err());
    }

    #[test]
    fn bank_magnitude_falls_with_frequency() {
        let b = RcBank::new(10, 20).unwrap();
        let mags: Vec<f64> = (1..50)
            .map(|k| bank_impedance(&b, k as f64 * 30e6).unwrap().impedance().unwrap().norm())
            .collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ladder_limits() {
        let lad = LcLadder::default();
        let f = 600e6;
        let mut bare = lad.clone();
        for i in lad.cap_indices() {
            bare = bare.with_cap(i, 0.0);
        }
        let z = ladder_impedance(&bare, f).unwrap();
        let ltot = 49.60e-9 + 42.40e-9;
        let x = TAU * f * ltot;
        assert_abs_diff_eq!(z.im, x, epsilon = 1e-9 * x);
        assert_abs_diff_eq!(z.re, x / 20.0, epsilon = 1e-9 * x);
        let lossless = LcLadder { q: f64::INFINITY, ..lad };
        assert!(ladder_impedance(&lossless, f).unwrap().re.abs() < 1e-9);
    }

    #[test]
    fn ladder_defaults_near_fifty_ohm_and_orthogonal() {
        let lad = LcLadder::default();
        let z = ladder_impedance(&lad, 750e6).unwrap();
        assert!((z - 50.0).norm() < 1.0, "{z}");
        assert!(orthogonality_error(&lad, 750e6).unwrap() <= 0.1);
    }

    #[test]
    fn clc_transparent_and_design() {
        let net = transparent_clc(50.0, 750e6);
        let z = clc_match(&net, C64::new(50.0, 0.0), 750e6).unwrap();
        assert_abs_diff_eq!(z.re, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(vswr(z, 50.0), 1.0, epsilon = 1e-9);

        let d = design_clc_match(C64::new(50.0, 0.0), 750e6, 1.2, 50.0).unwrap();
        let z = clc_match(&d, C64::new(50.0, 0.0), 750e6).unwrap();
        let g = reflection(Termination::Z(z), 50.0).norm();
        assert!((g - 0.0909).abs() < 1e-3, "{g}");
        assert!(d.c1 > 0.0 && d.l > 0.0 && d.c2 > 0.0);
    }

    #[test]
    fn tuner_finds_fifty_ohm() {
        let p = CirculatorParams::default();
        // the quarter-wave arms limit the balanced bandwidth; 2 MHz keeps the mean above 60 dB
        let band = Band { bw: 2e6, ..Default::default() };
        let r = tune(&p, &NetworkOptions::default(), &band, &BankSpec::default()).unwrap();
        assert!((i32::from(r.codes.r_code) - 32).abs() <= 1, "{r:?}");
        assert!(r.codes.c_code <= 1, "{r:?}");
        assert!(r.avg_isolation_db >= 60.0, "{r:?}");
    }

    #[test]
    fn open_only_matches_baseline() {
        let p = CirculatorParams::default();
        let opts = NetworkOptions::default();
        let band = Band::default();
        let spec = BankSpec { r_bits: 0, c_bits: 0, ..Default::default() };
        let r = tune(&p, &opts, &band, &spec).unwrap();
        let base = frequency_sweep_with(&p, &opts, &band.grid().unwrap()).unwrap();
        assert_eq!(r.codes, Codes { r_code: 0, c_code: 0 });
        assert_abs_diff_eq!(r.avg_isolation_db, base.mean_isolation_db(), epsilon = 1e-9);
        assert_eq!(r.gain_penalty_db, 0.0);
        assert_eq!(r.nf_penalty_db, 0.0);
    }
}
