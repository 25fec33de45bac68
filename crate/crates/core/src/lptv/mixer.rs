use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::engine::{Branch, Clocking, Engine, Gate, Netlist, Tone};
use super::{InitialState, Recorder};
use crate::error::{invalid, Error, Result};
use crate::netcore::db20;
use crate::tol;

/// NRZ passive-mixer conversion ratio `(2/pi) sin(pi D) / (2D)`.
pub fn mixer_conversion_ratio(n_paths: usize, duty: f64) -> Result<f64> {
    if n_paths < 2 {
        return Err(invalid("n_paths", "need at least 2 paths"));
    }
    if !(duty > 0.0 && duty <= 0.5) {
        return Err(invalid("duty", "must lie in (0, 0.5]"));
    }
    if duty * n_paths as f64 > 1.0 + 1e-12 {
        return Err(Error::OverlappingClocks);
    }
    Ok(2.0 / PI * (PI * duty).sin() / (2.0 * duty))
}

/// Plain N-path mixer: a source behind `r_source` commutated onto N capacitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixerConfig {
    pub n_paths: usize,
    pub duty: f64,
    pub r_source: f64,
    pub c_bb: f64,
    pub f_lo: f64,
    pub substeps: usize,
}

impl Default for MixerConfig {
    fn default() -> Self {
        MixerConfig {
            n_paths: 8,
            duty: 0.125,
            r_source: 50.0,
            c_bb: 1e-9,
            f_lo: 750e6,
            substeps: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixerResult {
    pub n_paths: usize,
    pub duty: f64,
    pub simulated: f64,
    pub simulated_db: f64,
    pub closed_form: f64,
    pub closed_form_db: f64,
    pub periods_run: usize,
}

/// Drives the mixer with a tone at `f_lo` centered on path 0's window and
/// returns the held BB voltage of that path relative to the RF amplitude.
pub fn simulate_mixer(cfg: &MixerConfig) -> Result<MixerResult> {
    let closed = mixer_conversion_ratio(cfg.n_paths, cfg.duty)?;
    if !(cfg.r_source > 0.0 && cfg.c_bb > 0.0 && cfg.f_lo > 0.0) || cfg.substeps == 0 {
        return Err(invalid("mixer", "component values must be positive"));
    }
    let slot_on = cfg.duty * (cfg.n_paths * cfg.substeps) as f64;
    if (slot_on - slot_on.round()).abs() > 1e-9 || slot_on.round() < 1.0 {
        return Err(invalid("duty", "conduction window does not land on the time grid"));
    }
    let mut n = Netlist::default();
    let src = n.add_source();
    let caps: Vec<usize> = (0..cfg.n_paths).map(|k| n.add_node(format!("cap{k}"), cfg.c_bb)).collect();
    for (k, &c) in caps.iter().enumerate() {
        n.branches.push(Branch { a: Some(c), b: None, r: cfg.r_source, emf: Some(src), gate: Gate::Left(k) });
    }
    let clock = Clocking {
        n_paths: cfg.n_paths,
        period: 1.0 / cfg.f_lo,
        m: cfg.substeps,
        on_steps: slot_on.round() as usize,
        shift_steps: 0,
    };
    let amp = C64::from_polar(1.0, -PI * cfg.duty);
    let mut engine = Engine::new(n, clock, vec![Tone { source: src, amp, freq: cfg.f_lo }])?;
    let shooting = engine.steady_state_map(1)?;
    let osc0 = engine.oscillator_slice(&engine.initial_state());
    let rec = Recorder {
        engine: &mut engine,
        record_periods: 1,
        max_periods: 2000,
        steady_tol: tol::STEADY_STATE_REL,
        init: InitialState::Shooting,
    }
    .run(&osc0, Some(&shooting))?;
    let held = rec.states.iter().map(|x| x[caps[0]]).sum::<f64>() / rec.states.len() as f64;
    Ok(MixerResult {
        n_paths: cfg.n_paths,
        duty: cfg.duty,
        simulated: held,
        simulated_db: db20(held.abs()),
        closed_form: closed,
        closed_form_db: db20(closed),
        periods_run: rec.periods_run,
    })
}
