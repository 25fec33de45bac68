//! Parameter documents for each subcommand and the run manifest.

use std::fs;
use std::path::Path;

use circrx::balnet::{Band, BankSpec};
use circrx::circmodel::{CirculatorParams, NetworkOptions};
use circrx::lptv::{Excitation, MixerConfig, NPathConfig, NoiseMcConfig, NoiseSource, Port};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("circrx ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub resolved_config: Value,
    pub seed: u64,
    pub tool_version: String,
}

/// Reads `path` (or `{}`), accepting either a bare config or a manifest whose
/// command matches. Returns the config and the manifest's seed, if any.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, command: &str) -> Result<(T, Option<u64>), CliError> {
    let value: Value = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    let (doc, seed) = match value {
        Value::Object(ref m) if m.contains_key("resolved_config") => {
            let man: Manifest = parse(value)?;
            if man.command != command {
                return Err(CliError::Config(format!("manifest is for `{}`, not `{command}`", man.command)));
            }
            (man.resolved_config, Some(man.seed))
        }
        v => (v, None),
    };
    Ok((parse(doc)?, seed))
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.into_inner().to_string())
        } else {
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub f_start: f64,
    pub f_stop: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.n_points == 0 || matches!(self.f_stop.partial_cmp(&self.f_start), None | Some(std::cmp::Ordering::Less)) {
            return Err(CliError::Config("grid needs n_points >= 1 and f_stop >= f_start".into()));
        }
        if self.n_points == 1 {
            return Ok(vec![self.f_start]);
        }
        let step = (self.f_stop - self.f_start) / (self.n_points - 1) as f64;
        Ok((0..self.n_points).map(|i| self.f_start + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub params: CirculatorParams,
    pub network: NetworkOptions,
    pub grid: Grid,
    /// Also write the TX/ANT two-port as `tx_ant.s2p`.
    pub touchstone: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            params: CirculatorParams::default(),
            network: NetworkOptions::default(),
            grid: Grid { f_start: 650e6, f_stop: 850e6, n_points: 201 },
            touchstone: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceConfig {
    /// `zbal` is ignored; the bank is the balance network.
    pub params: CirculatorParams,
    pub network: NetworkOptions,
    pub band: Band,
    pub bank: BankSpec,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            params: CirculatorParams::default(),
            network: NetworkOptions { bal_shunt_c: 0.5e-12, ..Default::default() },
            band: Band::default(),
            bank: BankSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarlo {
    pub npath: NPathConfig,
    pub mc: NoiseMcConfig,
    pub sources: Vec<NoiseSource>,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { npath: NPathConfig::default(), mc: NoiseMcConfig::default(), sources: NoiseSource::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// `zbal` sets the operating point reported in the summary.
    pub params: CirculatorParams,
    pub temperature: f64,
    /// Resistive balance impedances for the curve, ohm.
    pub zbal_grid: Vec<f64>,
    /// Time-domain cross-check; skipped when absent.
    pub montecarlo: Option<MonteCarlo>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            params: CirculatorParams::default(),
            temperature: circrx::tol::T0_KELVIN,
            zbal_grid: vec![5.0, 10.0, 20.0, 25.0, 35.0, 50.0, 75.0, 100.0, 200.0, 500.0, 1e3, 1e4, 1e5],
            montecarlo: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LptvConfig {
    pub npath: NPathConfig,
    pub excitation: Excitation,
    /// Base mixer for the gain check; `n_paths` and `duty` are swept.
    pub mixer: MixerConfig,
    pub mixer_paths: Vec<usize>,
}

impl Default for LptvConfig {
    fn default() -> Self {
        LptvConfig {
            npath: NPathConfig::default(),
            excitation: Excitation { port: Port::Tx, amplitude: 1.0, freq: 750e6, phase_deg: 0.0 },
            mixer: MixerConfig::default(),
            mixer_paths: vec![2, 4, 8],
        }
    }
}
