//! Time-domain oracle for the switched-capacitor N-path circulator-receiver.
//!
//! The network is simulated as a piecewise-LTI system (see [`engine`]) with
//! ideal non-overlapping NRZ clocks. Quarter-wave arms are lumped CLC sections.

pub mod engine;
mod mixer;
mod noise;
mod recombine;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::netcore::PiSection;
use crate::tol;
use engine::{Branch, Clocking, Engine, Gate, Inductor, Netlist, Tone};

pub use mixer::{mixer_conversion_ratio, simulate_mixer, MixerConfig, MixerResult};
pub use noise::{noise_montecarlo, NoiseMcConfig, NoiseMcResult, NoiseSource, SourceEstimate};
pub use recombine::{
    harmonic_recombine, harmonic_rejection_db, progression, quantized_weights, recombination_gain_db, weights,
    RecombineTarget,
};

/// Time-domain termination of a port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Load {
    Open(OpenWord),
    R(f64),
    /// Resistor in parallel with a capacitor.
    Rc { r: f64, c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpenWord {
    Open,
}

impl Load {
    pub const OPEN: Load = Load::Open(OpenWord::Open);

    fn parts(&self) -> (Option<f64>, f64) {
        match *self {
            Load::Open(_) => (None, 0.0),
            Load::R(r) => (Some(r), 0.0),
            Load::Rc { r, c } => (Some(r), c),
        }
    }

    pub fn resistance(&self) -> Option<f64> {
        self.parts().0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Terminations {
    pub tx: Load,
    pub ant: Load,
    pub bal: Load,
    pub rx: Load,
}

impl Default for Terminations {
    fn default() -> Self {
        Terminations {
            tx: Load::R(50.0),
            ant: Load::R(50.0),
            bal: Load::OPEN,
            rx: Load::OPEN,
        }
    }
}

/// Quarter-wave arm description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LineSpec {
    /// `sections` pi-sections matched to `z0` at `f_lo`.
    Matched {
        #[serde(default = "one")]
        sections: usize,
        #[serde(default)]
        q: Option<f64>,
    },
    /// Explicit pi-sections, port BAL/TX/ANT side first.
    Custom { sections: Vec<PiSection> },
}

fn one() -> usize {
    1
}

impl Default for LineSpec {
    fn default() -> Self {
        LineSpec::Matched { sections: 1, q: None }
    }
}

impl LineSpec {
    pub fn sections(&self, z0: f64, f_lo: f64) -> Vec<PiSection> {
        match self {
            LineSpec::Matched { sections, q } => {
                let s = PiSection::for_line(z0, FRAC_PI_2 / *sections as f64, f_lo).with_q(*q);
                vec![s; *sections]
            }
            LineSpec::Custom { sections } => sections.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Start from the periodic steady state found by shooting, then verify by stepping.
    #[default]
    Shooting,
    /// Start from rest.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NPathConfig {
    pub n_paths: usize,
    /// Defaults to `1 / n_paths`.
    pub duty: Option<f64>,
    pub c_bb: f64,
    pub r_sw: f64,
    pub f_lo: f64,
    pub phase_shift_deg: f64,
    pub z0: f64,
    pub line: LineSpec,
    pub terminations: Terminations,
    /// Time steps per path slot.
    pub substeps: usize,
    pub max_periods: usize,
    pub steady_tol: f64,
    pub init: InitialState,
}

impl Default for NPathConfig {
    fn default() -> Self {
        NPathConfig {
            n_paths: 8,
            duty: None,
            c_bb: 16e-12,
            r_sw: 3.5,
            f_lo: 750e6,
            phase_shift_deg: -90.0,
            z0: 50.0,
            line: LineSpec::default(),
            terminations: Terminations::default(),
            substeps: 8,
            max_periods: 2000,
            steady_tol: tol::STEADY_STATE_REL,
            init: InitialState::Shooting,
        }
    }
}

impl NPathConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(invalid("n_paths", "need at least 2 paths"));
        }
        if let Some(d) = self.duty {
            if d * self.n_paths as f64 > 1.0 + 1e-12 {
                return Err(Error::OverlappingClocks);
            }
            if (d * self.n_paths as f64 - 1.0).abs() > 1e-12 {
                return Err(invalid("duty", "the circulator requires duty = 1/n_paths"));
            }
        }
        for (name, v) in [("c_bb", self.c_bb), ("r_sw", self.r_sw), ("f_lo", self.f_lo), ("z0", self.z0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.substeps == 0 {
            return Err(invalid("substeps", "must be at least 1"));
        }
        if let LineSpec::Matched { sections: 0, .. } = self.line {
            return Err(Error::NoSections);
        }
        if let LineSpec::Custom { sections } = &self.line {
            if sections.is_empty() {
                return Err(Error::NoSections);
            }
            if sections.iter().any(|s| !(s.l > 0.0 && s.c > 0.0)) {
                return Err(invalid("line", "section values must be positive"));
            }
        }
        let t = &self.terminations;
        for (name, load) in [("tx", t.tx), ("ant", t.ant), ("bal", t.bal), ("rx", t.rx)] {
            let (r, c) = load.parts();
            if r.is_some_and(|r| !(r > 0.0)) || c < 0.0 {
                return Err(invalid(name, "termination values must be positive"));
            }
        }
        self.shift_steps()?;
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_lo
    }

    fn shift_steps(&self) -> Result<i64> {
        let steps = self.phase_shift_deg / 360.0 * (self.n_paths * self.substeps) as f64;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 {
            return Err(Error::PhaseOffGrid { deg: self.phase_shift_deg });
        }
        Ok(rounded as i64)
    }

    fn clocking(&self) -> Result<Clocking> {
        Ok(Clocking {
            n_paths: self.n_paths,
            period: self.period(),
            m: self.substeps,
            on_steps: self.substeps,
            shift_steps: self.shift_steps()?,
        })
    }
}

/// Where a source sits in the circulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Port {
    Tx,
    Ant,
    Rx,
    /// In series with the left (BAL side) switches.
    SwLeft,
    /// In series with the right (RX side) switches.
    SwRight,
    /// In series with the BAL termination resistor.
    Bal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Excitation {
    pub port: Port,
    /// Peak EMF, V.
    pub amplitude: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

/// Netlist of the circulator plus the indices needed to read it back.
pub(crate) struct Circuit {
    pub netlist: Netlist,
    pub sources: BTreeMap<Port, usize>,
    pub named: Vec<(String, usize)>,
    pub caps: Vec<usize>,
}

pub(crate) fn build_circuit(cfg: &NPathConfig) -> Result<Circuit> {
    cfg.validate()?;
    let sections = cfg.line.sections(cfg.z0, cfg.f_lo);
    let mut n = Netlist::default();
    let mut sources = BTreeMap::new();
    for port in [Port::Tx, Port::Ant, Port::Rx, Port::SwLeft, Port::SwRight, Port::Bal] {
        sources.insert(port, n.add_source());
    }

    // ring BAL - arm - TX - arm - ANT - arm - RX
    let mut ring = vec![n.add_node("bal", 0.0)];
    let mut named = vec![("bal".to_string(), ring[0])];
    for (arm, end) in ["tx", "ant", "rx"].iter().enumerate() {
        for (i, sec) in sections.iter().enumerate() {
            let a = *ring.last().unwrap();
            let b = if i + 1 == sections.len() {
                let id = n.add_node(*end, 0.0);
                named.push((end.to_string(), id));
                id
            } else {
                n.add_node(format!("arm{arm}_{i}"), 0.0)
            };
            n.caps[a] += sec.c;
            n.caps[b] += sec.c;
            n.inductors.push(Inductor {
                a: Some(a),
                b: Some(b),
                l: sec.l,
                r: sec.series_resistance(cfg.f_lo),
            });
            ring.push(b);
        }
    }
    let node = |name: &str| named.iter().find(|(n, _)| n == name).map(|(_, i)| *i).unwrap();
    let (bal, tx, ant, rx) = (node("bal"), node("tx"), node("ant"), node("rx"));

    let t = cfg.terminations;
    let ports = [(t.tx, tx, Port::Tx), (t.ant, ant, Port::Ant), (t.bal, bal, Port::Bal), (t.rx, rx, Port::Rx)];
    for (load, id, port) in ports {
        let (r, c) = load.parts();
        n.caps[id] += c;
        if let Some(r) = r {
            n.branches.push(Branch {
                a: Some(id),
                b: None,
                r,
                emf: Some(sources[&port]),
                gate: Gate::Always,
            });
        }
    }

    let caps: Vec<usize> = (0..cfg.n_paths).map(|k| n.add_node(format!("cap{k}"), cfg.c_bb)).collect();
    for (k, &c) in caps.iter().enumerate() {
        n.branches.push(Branch {
            a: Some(bal),
            b: Some(c),
            r: cfg.r_sw,
            emf: Some(sources[&Port::SwLeft]),
            gate: Gate::Left(k),
        });
        n.branches.push(Branch {
            a: Some(rx),
            b: Some(c),
            r: cfg.r_sw,
            emf: Some(sources[&Port::SwRight]),
            gate: Gate::Right(k),
        });
    }
    for (k, &c) in caps.iter().enumerate() {
        named.push((format!("cap{k}"), c));
    }
    Ok(Circuit { netlist: n, sources, named, caps })
}

/// Result of one oracle run.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    /// Sample instants of the recorded window, s.
    pub t: Vec<f64>,
    /// Node waveforms over the recorded window; `v1`/`v2` are the active left/right caps.
    pub waveforms: BTreeMap<String, Vec<f64>>,
    /// Named node voltages one step past the window (same time as the window
    /// start, one record later), for period-to-period checks.
    pub end_values: BTreeMap<String, f64>,
    pub steady_state: bool,
    pub periods_run: usize,
    pub record_periods: usize,
    pub last_delta: f64,
    pub excitation_freq: f64,
    /// Phasor of each waveform at the excitation frequency (peak, cosine reference).
    #[serde(skip)]
    pub phasors: BTreeMap<String, C64>,
    /// Complex baseband envelope of the path capacitors at `excitation_freq - f_lo`.
    #[serde(skip)]
    pub bb_phasor: C64,
}

impl SimResult {
    pub fn phasor(&self, node: &str) -> C64 {
        self.phasors[node]
    }

    /// Writes `t_s,node,value_v`, time-major with nodes in ascending name order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_s,node,value_v")?;
        for (i, t) in self.t.iter().enumerate() {
            for (name, wave) in &self.waveforms {
                writeln!(w, "{t:.9e},{name},{:.9e}", wave[i])?;
            }
        }
        Ok(())
    }
}

/// Smallest number of LO periods over which every tone completes whole cycles.
pub fn common_periods(f_lo: f64, freqs: &[f64], cap: usize) -> Result<usize> {
    'outer: for k in 1..=cap {
        for &f in freqs {
            let cycles = f / f_lo * k as f64;
            if (cycles - cycles.round()).abs() > 1e-9 * cycles.abs().max(1.0) {
                continue 'outer;
            }
        }
        return Ok(k);
    }
    Err(invalid(
        "excitation",
        format!("tones are not periodic within {cap} LO periods"),
    ))
}

/// Peak phasor at `f` from a Fourier sum already integrated over a window of
/// length `span`.
pub fn window_phasor(sum: C64, span: f64, f: f64) -> C64 {
    let scale = if f == 0.0 { 1.0 } else { 2.0 };
    sum * scale / span
}

/// Runs the network to steady state and records the final window.
pub(crate) struct Recorder<'a> {
    pub engine: &'a mut Engine,
    pub record_periods: usize,
    pub max_periods: usize,
    pub steady_tol: f64,
    pub init: InitialState,
}

pub(crate) struct Record {
    pub states: Vec<DVector<f64>>,
    /// State one step past the window.
    pub end: DVector<f64>,
    pub t0_step: usize,
    pub steady: bool,
    pub periods_run: usize,
    pub last_delta: f64,
}

impl Recorder<'_> {
    pub fn run(self, x_osc0: &DVector<f64>, shooting: Option<&nalgebra::DMatrix<f64>>) -> Result<Record> {
        let e = self.engine;
        let nc = e.n_circuit();
        let steps = e.clock.steps_per_period();
        let mut x = e.initial_state();
        x.rows_mut(nc, e.n_state() - nc).copy_from(x_osc0);
        if self.init == InitialState::Shooting {
            if let Some(s) = shooting {
                x.rows_mut(0, nc).copy_from(&(s * x_osc0));
            }
        }
        let window = self.record_periods;
        let mut periods = 0;
        loop {
            let start = x.rows(0, nc).into_owned();
            let mut states = Vec::with_capacity(window * steps);
            let mut energy = 0.0;
            for _ in 0..window {
                energy += x.rows(0, nc).norm_squared();
                for q in 0..steps {
                    states.push(x.clone());
                    x = e.step(q, &x);
                }
            }
            let t0_step = periods * steps;
            periods += window;
            let rms = (energy / window as f64).sqrt();
            let diff = (x.rows(0, nc) - &start).norm();
            let last_delta = if rms == 0.0 { diff } else { diff / rms };
            let steady = last_delta < self.steady_tol || (rms == 0.0 && diff == 0.0);
            if !last_delta.is_finite() {
                return Err(Error::NonConvergence { periods, last_delta });
            }
            if steady {
                return Ok(Record { states, end: x, t0_step, steady, periods_run: periods, last_delta });
            }
            if periods + window > self.max_periods {
                return Err(Error::NonConvergence { periods, last_delta });
            }
        }
    }
}

fn validate_excitation(cfg: &NPathConfig, ex: &Excitation) -> Result<()> {
    if !(ex.freq > 0.0 && ex.freq < 3.0 * cfg.f_lo) {
        return Err(invalid("freq", "excitation must lie in (0, 3 f_lo)"));
    }
    if !ex.amplitude.is_finite() {
        return Err(invalid("amplitude", "must be finite"));
    }
    let needs_r = |l: Load| l.resistance().is_none();
    let t = cfg.terminations;
    let bad = match ex.port {
        Port::Tx => needs_r(t.tx),
        Port::Ant => needs_r(t.ant),
        Port::Rx => needs_r(t.rx),
        Port::Bal => needs_r(t.bal),
        Port::SwLeft | Port::SwRight => false,
    };
    if bad {
        return Err(invalid("port", format!("{:?} termination is open and cannot host a source", ex.port)));
    }
    Ok(())
}

/// Simulates the circulator under one sinusoidal excitation.
pub fn simulate(cfg: &NPathConfig, ex: &Excitation) -> Result<SimResult> {
    validate_excitation(cfg, ex)?;
    let circuit = build_circuit(cfg)?;
    let tone = Tone {
        source: circuit.sources[&ex.port],
        amp: C64::from_polar(ex.amplitude, ex.phase_deg.to_radians()),
        freq: ex.freq,
    };
    let k = common_periods(cfg.f_lo, &[ex.freq], cfg.max_periods)?;
    let mut engine = Engine::new(circuit.netlist, cfg.clocking()?, vec![tone])?;
    let shooting = match cfg.init {
        InitialState::Shooting => engine.steady_state_map(k).ok(),
        InitialState::Zero => None,
    };
    let osc0 = engine.oscillator_slice(&engine.initial_state());
    let rec = Recorder {
        engine: &mut engine,
        record_periods: k,
        max_periods: cfg.max_periods,
        steady_tol: cfg.steady_tol,
        init: cfg.init,
    }
    .run(&osc0, shooting.as_ref())?;
    Ok(assemble_result(cfg, &mut engine, &circuit.named, &circuit.caps, rec, ex.freq))
}

fn assemble_result(
    cfg: &NPathConfig,
    engine: &mut Engine,
    named: &[(String, usize)],
    caps: &[usize],
    rec: Record,
    f_exc: f64,
) -> SimResult {
    let h = engine.clock.h();
    let steps = engine.clock.steps_per_period();
    let t: Vec<f64> = (0..rec.states.len()).map(|i| (rec.t0_step + i) as f64 * h).collect();
    let span = rec.states.len() as f64 * h;
    let f_bb = f_exc - cfg.f_lo;
    // Path k samples the RF at LO phase 2 pi (k + 1/2) / N.
    let rot: Vec<C64> = (0..caps.len())
        .map(|k| C64::from_polar(1.0, -TAU * (k as f64 + 0.5) / cfg.n_paths as f64))
        .collect();

    let mut waveforms = BTreeMap::new();
    for (name, id) in named {
        waveforms.insert(name.clone(), rec.states.iter().map(|x| x[*id]).collect::<Vec<_>>());
    }
    let mut v1 = Vec::with_capacity(rec.states.len());
    let mut v2 = Vec::with_capacity(rec.states.len());
    let mut sums = vec![C64::new(0.0, 0.0); named.len()];
    let (mut s1, mut s2, mut sbb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (i, x) in rec.states.iter().enumerate() {
        let q = (rec.t0_step + i) % steps;
        let (l, r) = engine.clock.active(q);
        v1.push(l.map_or(0.0, |k| x[caps[k]]));
        v2.push(r.map_or(0.0, |k| x[caps[k]]));
        let turn = C64::from_polar(1.0, -TAU * f_exc * t[i]);
        let w = engine.step_integral(q, x, f_exc);
        for (acc, (_, id)) in sums.iter_mut().zip(named) {
            *acc += turn * w[*id];
        }
        if let Some(k) = l {
            s1 += turn * w[caps[k]];
        }
        if let Some(k) = r {
            s2 += turn * w[caps[k]];
        }
        let w_bb = if f_bb == f_exc { w } else { engine.step_integral(q, x, f_bb) };
        let z: C64 = rot.iter().zip(caps).map(|(r, &c)| r * w_bb[c]).sum();
        sbb += z * C64::from_polar(1.0, -TAU * f_bb * t[i]);
    }
    waveforms.insert("v1".into(), v1);
    waveforms.insert("v2".into(), v2);
    let mut phasors: BTreeMap<String, C64> = named
        .iter()
        .zip(&sums)
        .map(|((name, _), &s)| (name.clone(), window_phasor(s, span, f_exc)))
        .collect();
    phasors.insert("v1".into(), window_phasor(s1, span, f_exc));
    phasors.insert("v2".into(), window_phasor(s2, span, f_exc));
    let end_values = named.iter().map(|(name, id)| (name.clone(), rec.end[*id])).collect();
    let bb_scale = if cfg.n_paths == 2 { 1.0 } else { 2.0 } / cfg.n_paths as f64;
    let bb_phasor = sbb * bb_scale / span;
    SimResult {
        t,
        waveforms,
        end_values,
        steady_state: rec.steady,
        periods_run: rec.periods_run,
        record_periods: rec.states.len() / steps,
        last_delta: rec.last_delta,
        excitation_freq: f_exc,
        phasors,
        bb_phasor,
    }
}

/// Magnitude ratio in dB and phase difference in degrees (wrapped to +-180).
pub fn compare(oracle: C64, reference: C64) -> (f64, f64) {
    let db = 20.0 * (oracle.norm() / reference.norm()).log10();
    let mut deg = (oracle.arg() - reference.arg()).to_degrees();
    while deg > 180.0 {
        deg -= 360.0;
    }
    while deg < -180.0 {
        deg += 360.0;
    }
    (db, deg)
}

/// Staircase fundamental relative to the held value for `n` equal slots.
pub fn staircase_gain(n_paths: usize) -> f64 {
    let x = PI / n_paths as f64;
    x.sin() / x
}
