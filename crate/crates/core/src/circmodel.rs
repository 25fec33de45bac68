//! Center-frequency model of the N-path circulator with an embedded balance network.
//!
//! Topology: a ring `BAL -l/4- TX -l/4- ANT -l/4- RX` closed by the gyrator branch
//! `BAL -Rsw- G1 =gyrator= G2 -Rsw- RX`. The gyrator is the N -> infinity limit of the
//! N-path filter with `V2 = j V1`. TX is a Thevenin source behind `Z0`, ANT is
//! `Zant`, BAL is shunted by `Zbal`, and RX is open unless told otherwise.
//!
//! Voltages are "dB below the port voltage": the reference for a source of EMF `V`
//! is `V / 2`, the voltage a matched port would see.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::netcore::{cascade, db20, tline_abcd, Abcd, PiSection, SParams, Termination, J};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CirculatorParams {
    pub z0: f64,
    pub rsw: f64,
    #[serde(with = "crate::cplx")]
    pub zant: C64,
    pub zbal: Termination,
    pub f0: f64,
}

impl Default for CirculatorParams {
    fn default() -> Self {
        CirculatorParams {
            z0: 50.0,
            rsw: 3.5,
            zant: C64::new(50.0, 0.0),
            zbal: Termination::Open,
            f0: 750e6,
        }
    }
}

impl CirculatorParams {
    pub fn with_zbal(mut self, zbal: Termination) -> Self {
        self.zbal = zbal;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z0 > 0.0 && self.z0.is_finite()) {
            return Err(invalid("z0", "must be positive"));
        }
        if !(self.rsw >= 0.0 && self.rsw.is_finite()) {
            return Err(invalid("rsw", "must be non-negative"));
        }
        if !(self.zant.re > 0.0 && self.zant.is_finite()) {
            return Err(invalid("zant", "real part must be positive"));
        }
        if !self.zbal.is_passive() {
            return Err(invalid("zbal", "real part must be non-negative"));
        }
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return Err(invalid("f0", "must be positive"));
        }
        Ok(())
    }

    fn s(&self) -> f64 {
        self.rsw / self.z0
    }

    fn a(&self) -> C64 {
        self.z0 / self.zant
    }

    /// `Zbal / (Zbal + Z0)`: 1 for an open port, 0 for a short.
    fn u(&self) -> C64 {
        match self.zbal {
            Termination::Open => C64::new(1.0, 0.0),
            Termination::Z(z) => z / (z + self.z0),
        }
    }
}

/// Node phasors for one excitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeVoltages {
    #[serde(with = "crate::cplx")]
    pub v_tx: C64,
    #[serde(with = "crate::cplx")]
    pub v_ant: C64,
    #[serde(with = "crate::cplx")]
    pub v_bal: C64,
    #[serde(with = "crate::cplx")]
    pub v_rx: C64,
    #[serde(with = "crate::cplx")]
    pub v1: C64,
    #[serde(with = "crate::cplx")]
    pub v2: C64,
}

impl NodeVoltages {
    /// The five nodes shared with the time-domain oracle.
    pub fn named(&self) -> [(&'static str, C64); 5] {
        [
            ("ant", self.v_ant),
            ("bal", self.v_bal),
            ("rx", self.v_rx),
            ("v1", self.v1),
            ("v2", self.v2),
        ]
    }
}

// The closed forms are written with s = Rsw/Z0 (rather than Z0/Rsw) and
// u = Zbal/(Zbal + Z0) (rather than Z0/Zbal) so Rsw = 0 and a shorted BAL port
// are ordinary points.

/// Node voltages for a TX source of EMF `v_in_tx` behind `Z0`.
pub fn tx_excitation(p: &CirculatorParams, v_in_tx: C64) -> Result<NodeVoltages> {
    p.validate()?;
    let (s, a, u) = (p.s(), p.a(), p.u());
    let d = 2.0 * s + 1.0 + a;
    let v_ant = -J * v_in_tx / d;
    let v_bal = -J * v_in_tx * (2.0 * s + a - 1.0) * u / d;
    let v1 = -J * v_in_tx * (s * (2.0 * u - 1.0) + (a - 1.0) * u) / d;
    let v_rx = v_in_tx * (-2.0 * s * (1.0 - u) + (a - 1.0) * u) / d;
    Ok(NodeVoltages {
        v_tx: v_in_tx - J * (v_bal + v_ant),
        v_ant,
        v_bal,
        v_rx,
        v1,
        v2: J * v1,
    })
}

/// Node voltages for an antenna source of EMF `v_in_ant` behind `Zant`.
pub fn ant_excitation(p: &CirculatorParams, v_in_ant: C64) -> Result<NodeVoltages> {
    p.validate()?;
    let (s, a, u) = (p.s(), p.a(), p.u());
    let d = 2.0 * s + 1.0 + a;
    let k = -2.0 * v_in_ant * a;
    let v1 = k * (u + 0.5 * s) / d;
    let v_bal = k * u / d;
    // Carries the gyrator's j so that V2 = j V1 holds here as well.
    let v_rx = J * k * (u + s) / d;
    let v_ant = (a * v_in_ant - v_bal - J * v_rx) / (1.0 + a);
    Ok(NodeVoltages {
        v_tx: -J * (v_ant + v_bal),
        v_ant,
        v_bal,
        v_rx,
        v1,
        v2: J * v1,
    })
}

/// Balance impedance that nulls TX leakage at the gyrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancePoint {
    #[serde(with = "crate::cplx")]
    pub zbal: C64,
    /// False when the required impedance has a negative real part.
    pub passive: bool,
}

pub fn balance_condition(p: &CirculatorParams) -> Result<BalancePoint> {
    p.validate()?;
    let (z0, rsw, zant) = (p.z0, p.rsw, p.zant);
    // a short at BAL nulls the leakage for any antenna once the switches are ideal
    if rsw == 0.0 {
        return Ok(BalancePoint { zbal: C64::new(0.0, 0.0), passive: true });
    }
    let den = rsw * zant + z0 * (z0 - zant);
    let scale = rsw * zant.norm() + z0 * (z0 + zant.norm());
    if den.norm() <= tol::SINGULAR_REL * scale {
        return Err(Error::BalanceUnreachable);
    }
    let zbal = z0 * rsw * zant / den;
    Ok(BalancePoint {
        zbal,
        passive: zbal.re >= 0.0,
    })
}

/// Voltage gain from ANT port voltage to the RX node for a receiver impedance `zrx`.
pub fn rx_mismatch_gain(zrx: Termination, z0: f64) -> C64 {
    match zrx {
        Termination::Open => C64::new(2.0, 0.0),
        Termination::Z(z) => 2.0 / (1.0 + z0 / z),
    }
}

/// How the three quarter-wave arms are modeled across frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LineModel {
    #[default]
    Ideal,
    /// `sections` CLC pi-sections per quarter wave, optional inductor Q.
    Clc {
        #[serde(default = "one")]
        sections: usize,
        #[serde(default)]
        q: Option<f64>,
    },
}

fn one() -> usize {
    1
}

impl LineModel {
    /// ABCD of one quarter-wave arm at `f`.
    pub fn quarter_wave(&self, z0: f64, f0: f64, f: f64) -> Result<Abcd> {
        match *self {
            LineModel::Ideal => Ok(tline_abcd(z0, FRAC_PI_2 * f / f0)),
            LineModel::Clc { sections, q } => {
                if sections == 0 {
                    return Err(Error::NoSections);
                }
                let sec = PiSection::for_line(z0, FRAC_PI_2 / sections as f64, f0).with_q(q);
                cascade(&vec![sec.abcd(f); sections])
            }
        }
    }
}

/// Extra knobs of the swept network beyond [`CirculatorParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkOptions {
    pub line: LineModel,
    /// Parasitic shunt capacitance at BAL, F.
    pub bal_shunt_c: f64,
    /// Receiver input impedance at RX.
    pub zrx: Termination,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions {
            line: LineModel::Ideal,
            bal_shunt_c: 0.0,
            zrx: Termination::Open,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// EMF behind `Z0` at TX.
    Tx(C64),
    /// EMF behind `Zant` at ANT.
    Ant(C64),
    /// EMF behind `Z0` at RX (replaces the receiver load).
    Rx(C64),
}

impl Drive {
    pub fn emf(&self) -> C64 {
        match *self {
            Drive::Tx(v) | Drive::Ant(v) | Drive::Rx(v) => v,
        }
    }
}

const TX: usize = 0;
const ANT: usize = 1;
const RX: usize = 2;
const BAL: usize = 3;

/// Nodal system of the circulator at one frequency with the balance shunt left out.
struct Nodal {
    y: DMatrix<C64>,
    g1: usize,
    g2: usize,
}

fn stamp_two_port(y: &mut DMatrix<C64>, m: &Abcd, p: usize, q: usize) -> Result<()> {
    if m.b.norm() <= tol::SINGULAR_REL * (m.a.norm() + m.d.norm()) {
        return Err(Error::Singular("line has zero series impedance".into()));
    }
    let inv_b = m.b.inv();
    y[(p, p)] += m.d * inv_b;
    y[(p, q)] -= m.det() * inv_b;
    y[(q, p)] -= inv_b;
    y[(q, q)] += m.a * inv_b;
    Ok(())
}

fn stamp_conductance(y: &mut DMatrix<C64>, p: usize, q: usize, g: C64) {
    y[(p, p)] += g;
    y[(q, q)] += g;
    y[(p, q)] -= g;
    y[(q, p)] -= g;
}

impl Nodal {
    fn build(p: &CirculatorParams, opts: &NetworkOptions, f: f64, drive: &Drive) -> Result<Self> {
        let merged = p.rsw == 0.0;
        let (g1, g2, n_nodes) = if merged { (BAL, RX, 4) } else { (4, 5, 6) };
        let n = n_nodes + 1;
        let mut y = DMatrix::<C64>::zeros(n, n);
        let arm = opts.line.quarter_wave(p.z0, p.f0, f)?;
        stamp_two_port(&mut y, &arm, BAL, TX)?;
        stamp_two_port(&mut y, &arm, TX, ANT)?;
        stamp_two_port(&mut y, &arm, ANT, RX)?;
        if !merged {
            let g = C64::new(1.0 / p.rsw, 0.0);
            stamp_conductance(&mut y, BAL, g1, g);
            stamp_conductance(&mut y, g2, RX, g);
        }
        // Gyrator: extra unknown is the current drawn into port 1.
        let ig = n_nodes;
        y[(g1, ig)] += C64::new(1.0, 0.0);
        y[(g2, ig)] += -J;
        y[(ig, g1)] += C64::new(1.0, 0.0);
        y[(ig, g2)] += J;

        y[(TX, TX)] += 1.0 / p.z0;
        y[(ANT, ANT)] += p.zant.inv();
        y[(BAL, BAL)] += J * (TAU * f * opts.bal_shunt_c);
        match drive {
            Drive::Rx(_) => y[(RX, RX)] += 1.0 / p.z0,
            _ => y[(RX, RX)] += opts.zrx.admittance(),
        }
        Ok(Nodal { y, g1, g2 })
    }

    fn rhs(&self, p: &CirculatorParams, drive: &Drive) -> DVector<C64> {
        let mut b = DVector::<C64>::zeros(self.y.nrows());
        match *drive {
            Drive::Tx(v) => b[TX] = v / p.z0,
            Drive::Ant(v) => b[ANT] = v / p.zant,
            Drive::Rx(v) => b[RX] = v / p.z0,
        }
        b
    }

    fn voltages(&self, x: &DVector<C64>) -> NodeVoltages {
        NodeVoltages {
            v_tx: x[TX],
            v_ant: x[ANT],
            v_bal: x[BAL],
            v_rx: x[RX],
            v1: x[self.g1],
            v2: x[self.g2],
        }
    }
}

fn check_solution(x: &DVector<C64>) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Singular("network solution is not finite".into()))
    }
}

/// Solves the full network at `f`, with `p.zbal` and any parasitic at BAL.
pub fn solve_network(p: &CirculatorParams, opts: &NetworkOptions, f: f64, drive: Drive) -> Result<NodeVoltages> {
    p.validate()?;
    let mut nodal = Nodal::build(p, opts, f, &drive)?;
    nodal.y[(BAL, BAL)] += p.zbal.admittance();
    let b = nodal.rhs(p, &drive);
    let x = nodal
        .y
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("at {f} Hz")))?;
    check_solution(&x)?;
    Ok(nodal.voltages(&x))
}

/// Response of the network with BAL open, plus the transfer impedances from a
/// current drawn at BAL. Any shunt admittance `Y` at BAL then gives
/// `v = v_open - z_from_bal * Y * v_bal_open / (1 + Y * z_bal_bal)`.
#[derive(Debug, Clone, Copy)]
pub struct BalancePortResponse {
    pub open: NodeVoltages,
    pub from_bal: NodeVoltages,
}

impl BalancePortResponse {
    pub fn compute(p: &CirculatorParams, opts: &NetworkOptions, f: f64, drive: Drive) -> Result<Self> {
        p.validate()?;
        let nodal = Nodal::build(p, opts, f, &drive)?;
        let lu = nodal.y.clone().lu();
        let b = nodal.rhs(p, &drive);
        let x = lu.solve(&b).ok_or_else(|| Error::Singular(format!("at {f} Hz")))?;
        let mut u = DVector::<C64>::zeros(b.len());
        u[BAL] = C64::new(-1.0, 0.0);
        let z = lu.solve(&u).ok_or_else(|| Error::Singular(format!("at {f} Hz")))?;
        check_solution(&x)?;
        check_solution(&z)?;
        // z holds the voltages caused by drawing 1 A out of BAL; store them as
        // transfer impedances (positive for the BAL self term).
        let from_bal = nodal.voltages(&z.map(|v| -v));
        Ok(BalancePortResponse {
            open: nodal.voltages(&x),
            from_bal,
        })
    }

    pub fn with_shunt(&self, y: C64) -> NodeVoltages {
        let i = y * self.open.v_bal / (1.0 + y * self.from_bal.v_bal);
        let o = &self.open;
        let z = &self.from_bal;
        NodeVoltages {
            v_tx: o.v_tx - z.v_tx * i,
            v_ant: o.v_ant - z.v_ant * i,
            v_bal: o.v_bal - z.v_bal * i,
            v_rx: o.v_rx - z.v_rx * i,
            v1: o.v1 - z.v1 * i,
            v2: o.v2 - z.v2 * i,
        }
    }
}

/// One frequency point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsolationRow {
    pub f_hz: f64,
    pub tx_to_bb_isolation_db: f64,
    pub ant_to_bb_gain_db: f64,
    pub tx_to_ant_loss_db: f64,
    /// Set when the network could not be solved at this frequency.
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct IsolationReport {
    pub rows: Vec<IsolationRow>,
}

impl IsolationReport {
    pub fn mean_isolation_db(&self) -> f64 {
        mean(self.rows.iter().filter(|r| !r.singular).map(|r| r.tx_to_bb_isolation_db))
    }

    pub fn mean_gain_db(&self) -> f64 {
        mean(self.rows.iter().filter(|r| !r.singular).map(|r| r.ant_to_bb_gain_db))
    }
}

pub(crate) fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// TX-to-BB isolation in dB against the TX port voltage, capped.
pub fn isolation_db(v1: C64, v_in_tx: C64) -> f64 {
    let ratio = v1.norm() / (v_in_tx.norm() / 2.0);
    if ratio == 0.0 {
        return tol::ISOLATION_CAP_DB;
    }
    (-db20(ratio)).min(tol::ISOLATION_CAP_DB)
}

/// Builds an isolation row from the TX-drive and ANT-drive solutions (both with EMF `v`).
pub fn isolation_row(f: f64, tx: &NodeVoltages, ant: &NodeVoltages, v: C64) -> IsolationRow {
    let port = v.norm() / 2.0;
    IsolationRow {
        f_hz: f,
        tx_to_bb_isolation_db: isolation_db(tx.v1, v),
        ant_to_bb_gain_db: db20(ant.v1.norm() / port),
        tx_to_ant_loss_db: -db20(tx.v_ant.norm() / port),
        singular: false,
    }
}

fn singular_row(f: f64) -> IsolationRow {
    IsolationRow {
        f_hz: f,
        tx_to_bb_isolation_db: f64::NAN,
        ant_to_bb_gain_db: f64::NAN,
        tx_to_ant_loss_db: f64::NAN,
        singular: true,
    }
}

pub fn check_grid(p: &CirculatorParams, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Empty("frequency grid"));
    }
    if let Some(&f) = grid.iter().find(|&&f| !(f > 0.0 && f < 2.0 * p.f0)) {
        return Err(invalid("grid", format!("{f} Hz lies outside (0, 2 f0)")));
    }
    Ok(())
}

/// Sweeps the network over `grid` with the line model `line`.
pub fn frequency_sweep(p: &CirculatorParams, line: LineModel, grid: &[f64]) -> Result<IsolationReport> {
    let opts = NetworkOptions { line, ..Default::default() };
    frequency_sweep_with(p, &opts, grid)
}

pub fn frequency_sweep_with(p: &CirculatorParams, opts: &NetworkOptions, grid: &[f64]) -> Result<IsolationReport> {
    p.validate()?;
    check_grid(p, grid)?;
    let v = C64::new(2.0, 0.0);
    let rows = grid
        .iter()
        .map(|&f| {
            let tx = solve_network(p, opts, f, Drive::Tx(v));
            let ant = solve_network(p, opts, f, Drive::Ant(v));
            match (tx, ant) {
                (Ok(tx), Ok(ant)) => isolation_row(f, &tx, &ant, v),
                _ => singular_row(f),
            }
        })
        .collect();
    Ok(IsolationReport { rows })
}

/// TX/ANT two-port S-parameters with both ports referenced to (and loaded by) `Z0`.
pub fn tx_ant_sparams(p: &CirculatorParams, opts: &NetworkOptions, f: f64) -> Result<SParams> {
    let nominal = CirculatorParams {
        zant: C64::new(p.z0, 0.0),
        ..*p
    };
    let v = C64::new(2.0, 0.0);
    let tx = solve_network(&nominal, opts, f, Drive::Tx(v))?;
    let ant = solve_network(&nominal, opts, f, Drive::Ant(v))?;
    Ok(SParams {
        s11: tx.v_tx - 1.0,
        s21: tx.v_ant,
        s12: ant.v_tx,
        s22: ant.v_ant - 1.0,
        zref: p.z0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn base() -> CirculatorParams {
        CirculatorParams::default()
    }

    fn v2() -> C64 {
        C64::new(2.0, 0.0)
    }

    #[test]
    fn tx_null_with_matched_balance() {
        let p = base().with_zbal(Termination::resistor(50.0));
        let n = tx_excitation(&p, v2()).unwrap();
        assert_eq!(n.v1.norm(), 0.0);
        assert_abs_diff_eq!(n.v_bal.norm(), 0.0654, epsilon = 5e-5);
        assert_abs_diff_eq!(n.v_ant.norm(), 0.9346, epsilon = 5e-5);
        assert_abs_diff_eq!(-db20(n.v_ant.norm()), 0.59, epsilon = 0.005);
    }

    #[test]
    fn tx_leakage_without_balance() {
        let n = tx_excitation(&base(), v2()).unwrap();
        assert_abs_diff_eq!(n.v1.norm(), 0.0654, epsilon = 5e-5);
        assert_abs_diff_eq!(isolation_db(n.v1, v2()), 23.7, epsilon = 0.02);
        assert_eq!(n.v2, J * n.v1);
    }

    #[test]
    fn ant_drive_anchors() {
        let n = ant_excitation(&base(), v2()).unwrap();
        assert_abs_diff_eq!(n.v_rx.norm(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.v1.norm(), 2.0 * 0.9673, epsilon = 1e-4);
        assert_abs_diff_eq!(db20(n.v1.norm()), 5.73, epsilon = 0.01);
        let n = ant_excitation(&base().with_zbal(Termination::resistor(50.0)), v2()).unwrap();
        assert_abs_diff_eq!(n.v1.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn balance_anchors() {
        let b = balance_condition(&base()).unwrap();
        assert_eq!(b.zbal, C64::new(50.0, 0.0));
        assert!(b.passive);
        let p = CirculatorParams { rsw: 0.0, zant: C64::new(70.0, 10.0), ..base() };
        assert_eq!(balance_condition(&p).unwrap().zbal, C64::new(0.0, 0.0));
        // with Zant = Z0 every Zbal nulls; the short is reported
        let p = CirculatorParams { rsw: 0.0, ..base() };
        assert_eq!(balance_condition(&p).unwrap().zbal, C64::new(0.0, 0.0));
        let p = CirculatorParams { zant: C64::new(60.0, 0.0), ..base() };
        let b = balance_condition(&p).unwrap();
        assert_abs_diff_eq!(b.zbal.re, 50.0 * 3.5 * 60.0 / -290.0, epsilon = 1e-12);
        assert!(!b.passive);
    }

    #[test]
    fn shorted_balance_port_is_the_limit() {
        for p in [base(), CirculatorParams { rsw: 0.0, zant: C64::new(70.0, 10.0), ..base() }] {
            let short = p.with_zbal(Termination::Z(C64::new(0.0, 0.0)));
            let near = p.with_zbal(Termination::resistor(1e-9));
            assert_nodes_close(&tx_excitation(&short, v2()).unwrap(), &tx_excitation(&near, v2()).unwrap(), 1e-9);
            assert_nodes_close(&ant_excitation(&short, v2()).unwrap(), &ant_excitation(&near, v2()).unwrap(), 1e-9);
        }
        let p = CirculatorParams { rsw: 0.0, zant: C64::new(70.0, 10.0), ..base() };
        let zbal = balance_condition(&p).unwrap().zbal;
        assert_eq!(tx_excitation(&p.with_zbal(Termination::Z(zbal)), v2()).unwrap().v1.norm(), 0.0);
    }

    #[test]
    fn balance_unreachable() {
        // Rsw*Zant + Z0*(Z0 - Zant) = 0  =>  Zant = Z0^2 / (Z0 - Rsw)
        let zant = 2500.0 / 46.5;
        let p = CirculatorParams { zant: C64::new(zant, 0.0), ..base() };
        assert!(matches!(balance_condition(&p), Err(Error::BalanceUnreachable)));
    }

    #[test]
    fn mismatch_gain() {
        assert_eq!(rx_mismatch_gain(Termination::Open, 50.0), C64::new(2.0, 0.0));
        assert_abs_diff_eq!(rx_mismatch_gain(Termination::resistor(50.0), 50.0).re, 1.0, epsilon = 1e-15);
        let g = rx_mismatch_gain(Termination::resistor(150.0), 50.0);
        assert_abs_diff_eq!(g.re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(db20(g.re), 3.52, epsilon = 0.005);
    }

    fn assert_nodes_close(a: &NodeVoltages, b: &NodeVoltages, eps: f64) {
        for ((name, x), (_, y)) in a.named().iter().zip(b.named().iter()) {
            assert!((x - y).norm() <= eps, "{name}: {x} vs {y}");
        }
        assert!((a.v_tx - b.v_tx).norm() <= eps, "tx: {} vs {}", a.v_tx, b.v_tx);
    }

    #[test]
    fn nodal_solution_matches_closed_form_at_f0() {
        let cases = [
            base(),
            base().with_zbal(Termination::resistor(50.0)),
            base().with_zbal(Termination::Z(C64::new(20.0, -35.0))),
            CirculatorParams { rsw: 0.0, ..base() },
            CirculatorParams { zant: C64::new(35.0, 12.0), rsw: 7.0, ..base() },
        ];
        let opts = NetworkOptions::default();
        for p in cases {
            let tx = solve_network(&p, &opts, p.f0, Drive::Tx(v2())).unwrap();
            assert_nodes_close(&tx, &tx_excitation(&p, v2()).unwrap(), 1e-9);
            let ant = solve_network(&p, &opts, p.f0, Drive::Ant(v2())).unwrap();
            assert_nodes_close(&ant, &ant_excitation(&p, v2()).unwrap(), 1e-9);
        }
    }

    #[test]
    fn shunt_superposition_matches_direct_solve() {
        let p = base();
        let opts = NetworkOptions {
            line: LineModel::Clc { sections: 1, q: Some(20.0) },
            bal_shunt_c: 1e-12,
            zrx: Termination::Open,
        };
        let f = 741e6;
        let r = BalancePortResponse::compute(&p, &opts, f, Drive::Tx(v2())).unwrap();
        let zb = Termination::Z(C64::new(40.0, 15.0));
        let direct = solve_network(&p.with_zbal(zb), &opts, f, Drive::Tx(v2())).unwrap();
        assert_nodes_close(&r.with_shunt(zb.admittance()), &direct, 1e-9);
    }

    #[test]
    fn sweep_at_f0() {
        let p = base().with_zbal(Termination::resistor(50.0));
        let rep = frequency_sweep(&p, LineModel::Ideal, &[p.f0]).unwrap();
        assert!(rep.rows[0].tx_to_bb_isolation_db >= 160.0);
        let rep = frequency_sweep(&base(), LineModel::Ideal, &[750e6]).unwrap();
        assert_abs_diff_eq!(rep.rows[0].tx_to_bb_isolation_db, 23.69, epsilon = 0.01);
        assert!(frequency_sweep(&base(), LineModel::Ideal, &[]).is_err());
        assert!(frequency_sweep(&base(), LineModel::Ideal, &[1.6e9]).is_err());
    }

    #[test]
    fn sparams_show_circulation() {
        let s = tx_ant_sparams(&base(), &NetworkOptions { zrx: Termination::resistor(50.0), ..Default::default() }, 750e6)
            .unwrap();
        assert!(s.s21.norm() > 0.5);
        assert!(s.s12.norm() < 0.1 * s.s21.norm());
    }
}
