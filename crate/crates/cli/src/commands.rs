//! One function per subcommand. Each returns its files; nothing touches disk here.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use circrx::balnet::{bank_impedance, tune};
use circrx::circmodel::{
    ant_excitation, balance_condition, frequency_sweep_with, isolation_row, solve_network, tx_ant_sparams, tx_excitation,
    CirculatorParams, Drive, IsolationRow,
};
use circrx::fddemo::{run_demo, DemoConfig};
use circrx::linkbudget::{link_range, LinkConfig};
use circrx::lptv::{compare, noise_montecarlo, simulate, simulate_mixer, Excitation, Load, MixerConfig, NPathConfig, Port};
use circrx::netcore::{db20, Termination};
use circrx::noisemodel::{noise_at_gyrator, noise_factor, nf_vs_zbal_curve};
use circrx::touchstone::write_s2p;
use circrx::C64;
use serde::Serialize;

use crate::artifacts::Artifacts;
use crate::config::{load, BalanceConfig, LptvConfig, Manifest, NoiseConfig, SweepConfig, TOOL_VERSION};
use crate::error::CliError;
use crate::{Format, LptvAction};

const DEFAULT_SEED: u64 = 1;

pub struct Context<'a> {
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub format: Format,
}

impl Context<'_> {
    fn load<T: serde::de::DeserializeOwned>(&self, command: &str) -> Result<(T, Option<u64>), CliError> {
        load(self.config, command)
    }
}

/// Files plus a short human-readable report for stdout.
#[derive(Debug, Default)]
pub struct Output {
    pub files: Artifacts,
    pub report: String,
}

impl Output {
    fn manifest<T: Serialize>(&mut self, command: &str, cfg: &T, seed: u64) -> Result<(), CliError> {
        let m = Manifest {
            command: command.into(),
            resolved_config: serde_json::to_value(cfg)?,
            seed,
            tool_version: TOOL_VERSION.into(),
        };
        self.files.json("manifest.json", &m)
    }

    pub fn commit(self, dir: &Path) -> Result<Vec<String>, CliError> {
        print!("{}", self.report);
        self.files.commit(dir)
    }
}

pub fn sweep(ctx: &Context) -> Result<Output, CliError> {
    let (cfg, mseed): (SweepConfig, _) = ctx.load("sweep")?;
    let seed = ctx.seed.or(mseed).unwrap_or(DEFAULT_SEED);
    let grid = cfg.grid.points()?;
    let report = frequency_sweep_with(&cfg.params, &cfg.network, &grid)?;
    let mut out = Output::default();
    out.files.table("sweep", &report.rows, ctx.format)?;
    if cfg.touchstone {
        let points = grid
            .iter()
            .map(|&f| Ok((f, tx_ant_sparams(&cfg.params, &cfg.network, f)?)))
            .collect::<Result<Vec<_>, circrx::Error>>()?;
        let mut buf = Vec::new();
        write_s2p(&mut buf, &points)?;
        out.files.add("tx_ant.s2p", buf);
    }
    #[derive(Serialize)]
    struct Summary {
        mean_isolation_db: f64,
        mean_gain_db: f64,
        balance_point: Option<circrx::circmodel::BalancePoint>,
    }
    let s = Summary {
        mean_isolation_db: report.mean_isolation_db(),
        mean_gain_db: report.mean_gain_db(),
        balance_point: balance_condition(&cfg.params).ok(),
    };
    let _ = writeln!(out.report, "mean TX-BB isolation {:.2} dB, mean ANT-BB gain {:.2} dB", s.mean_isolation_db, s.mean_gain_db);
    out.files.json("summary.json", &s)?;
    out.manifest("sweep", &cfg, seed)?;
    Ok(out)
}

#[derive(Serialize)]
struct BalanceRow {
    f_hz: f64,
    untuned_isolation_db: f64,
    tuned_isolation_db: f64,
    untuned_gain_db: f64,
    tuned_gain_db: f64,
}

pub fn balance(ctx: &Context) -> Result<Output, CliError> {
    let (cfg, mseed): (BalanceConfig, _) = ctx.load("balance")?;
    let seed = ctx.seed.or(mseed).unwrap_or(DEFAULT_SEED);
    let result = tune(&cfg.params, &cfg.network, &cfg.band, &cfg.bank)?;
    let bank = cfg.bank.bank(result.codes.r_code, result.codes.c_code);
    let v = C64::new(2.0, 0.0);
    let row = |p: &CirculatorParams, f: f64| -> Result<IsolationRow, circrx::Error> {
        let tx = solve_network(p, &cfg.network, f, Drive::Tx(v))?;
        let ant = solve_network(p, &cfg.network, f, Drive::Ant(v))?;
        Ok(isolation_row(f, &tx, &ant, v))
    };
    let open = cfg.params.with_zbal(Termination::Open);
    let rows = cfg
        .band
        .grid()?
        .into_iter()
        .map(|f| {
            let before = row(&open, f)?;
            let after = row(&open.with_zbal(bank_impedance(&bank, f)?), f)?;
            Ok(BalanceRow {
                f_hz: f,
                untuned_isolation_db: before.tx_to_bb_isolation_db,
                tuned_isolation_db: after.tx_to_bb_isolation_db,
                untuned_gain_db: before.ant_to_bb_gain_db,
                tuned_gain_db: after.ant_to_bb_gain_db,
            })
        })
        .collect::<Result<Vec<_>, circrx::Error>>()?;
    let mut out = Output::default();
    out.files.table("balance_sweep", &rows, ctx.format)?;
    out.files.json("balance.json", &result)?;
    let _ = writeln!(
        out.report,
        "codes r={} c={}: isolation {:.2} dB (untuned {:.2} dB), gain penalty {:.2} dB, NF penalty {:.3} dB",
        result.codes.r_code,
        result.codes.c_code,
        result.avg_isolation_db,
        result.untuned_isolation_db,
        result.gain_penalty_db,
        result.nf_penalty_db
    );
    out.manifest("balance", &cfg, seed)?;
    Ok(out)
}

pub fn noise(ctx: &Context) -> Result<Output, CliError> {
    let (mut cfg, mseed): (NoiseConfig, _) = ctx.load("noise")?;
    let seed = ctx.seed.or(mseed).or(cfg.montecarlo.as_ref().map(|m| m.mc.seed)).unwrap_or(DEFAULT_SEED);
    if let Some(m) = cfg.montecarlo.as_mut() {
        m.mc.seed = seed;
    }
    let rows = nf_vs_zbal_curve(&cfg.params, &cfg.zbal_grid)?;
    let nf = |z| noise_factor(&cfg.params.with_zbal(z)).map(|r| r.nf_db);
    let nf_open = nf(Termination::Open)?;
    let nf_50 = nf(Termination::resistor(cfg.params.z0))?;
    #[derive(Serialize)]
    struct Summary {
        breakdown: circrx::noisemodel::NoiseBreakdown,
        nf: circrx::noisemodel::NoiseFactorResult,
        nf_open_db: f64,
        nf_matched_db: f64,
        degradation_db: f64,
    }
    let s = Summary {
        breakdown: noise_at_gyrator(&cfg.params, cfg.temperature)?,
        nf: noise_factor(&cfg.params)?,
        nf_open_db: nf_open,
        nf_matched_db: nf_50,
        degradation_db: nf_50 - nf_open,
    };
    let mut out = Output::default();
    out.files.table("noise", &rows, ctx.format)?;
    out.files.json("noise_summary.json", &s)?;
    let _ = writeln!(out.report, "NF open {nf_open:.2} dB, Zbal = Z0 {nf_50:.2} dB, degradation {:.2} dB", nf_50 - nf_open);
    if let Some(m) = &cfg.montecarlo {
        let r = noise_montecarlo(&m.npath, &m.mc, &m.sources)?;
        for e in &r.per_source {
            let _ = writeln!(out.report, "{:?}: coefficient {:.4e} ({:.2} dB) +- {:.1}%", e.source, e.coefficient, e.coefficient_db, 100.0 * e.rel_std_err);
        }
        out.files.json("noise_mc.json", &r)?;
    }
    out.manifest("noise", &cfg, seed)?;
    Ok(out)
}

#[derive(Serialize)]
struct PhasorOut {
    re: f64,
    im: f64,
    mag_db: f64,
    phase_deg: f64,
}

impl From<C64> for PhasorOut {
    fn from(z: C64) -> Self {
        PhasorOut { re: z.re, im: z.im, mag_db: db20(z.norm()), phase_deg: z.arg().to_degrees() }
    }
}

#[derive(Serialize)]
struct MixerRow {
    n_paths: usize,
    duty: f64,
    closed_form_db: f64,
    simulated_db: f64,
    error_db: f64,
}

#[derive(Serialize)]
struct CompareRow {
    drive: Port,
    node: &'static str,
    closed_form_mag: f64,
    closed_form_deg: f64,
    oracle_mag: f64,
    oracle_deg: f64,
    /// NaN where the closed form is a null.
    error_db: f64,
    error_deg: f64,
}

fn termination(load: Load, f: f64) -> Termination {
    match load {
        Load::Open(_) => Termination::Open,
        Load::R(r) => Termination::resistor(r),
        Load::Rc { r, c } => Termination::Z(1.0 / C64::new(1.0 / r, TAU * f * c)),
    }
}

/// Closed-form parameters matching an oracle configuration at `f_lo`.
fn closed_form_params(n: &NPathConfig) -> Result<CirculatorParams, CliError> {
    let zant = match n.terminations.ant {
        Load::Open(_) => return Err(CliError::Config("npath.terminations.ant must be resistive for compare".into())),
        l => termination(l, n.f_lo),
    };
    let zant = zant.impedance().unwrap_or(C64::new(n.z0, 0.0));
    Ok(CirculatorParams { z0: n.z0, rsw: n.r_sw, zant, zbal: termination(n.terminations.bal, n.f_lo), f0: n.f_lo })
}

pub fn lptv(ctx: &Context, action: LptvAction) -> Result<Output, CliError> {
    let (cfg, mseed): (LptvConfig, _) = ctx.load("lptv")?;
    let seed = ctx.seed.or(mseed).unwrap_or(DEFAULT_SEED);
    let mut out = Output::default();
    match action {
        LptvAction::Simulate => {
            let r = simulate(&cfg.npath, &cfg.excitation)?;
            match ctx.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    r.write_csv(&mut buf)?;
                    out.files.add("waveforms.csv", buf);
                }
                Format::Json => out.files.json("waveforms.json", &r)?,
            }
            #[derive(Serialize)]
            struct Phasors {
                steady_state: bool,
                periods_run: usize,
                last_delta: f64,
                excitation_freq: f64,
                nodes: BTreeMap<String, PhasorOut>,
                bb_envelope: PhasorOut,
            }
            let p = Phasors {
                steady_state: r.steady_state,
                periods_run: r.periods_run,
                last_delta: r.last_delta,
                excitation_freq: r.excitation_freq,
                nodes: r.phasors.iter().map(|(k, v)| (k.clone(), PhasorOut::from(*v))).collect(),
                bb_envelope: r.bb_phasor.into(),
            };
            let _ = writeln!(out.report, "steady state after {} periods (delta {:.2e})", r.periods_run, r.last_delta);
            out.files.json("phasors.json", &p)?;
        }
        LptvAction::Eq2Check => {
            let rows = cfg
                .mixer_paths
                .iter()
                .map(|&n| {
                    let m = simulate_mixer(&MixerConfig { n_paths: n, duty: 1.0 / n as f64, ..cfg.mixer })?;
                    Ok(MixerRow {
                        n_paths: n,
                        duty: m.duty,
                        closed_form_db: m.closed_form_db,
                        simulated_db: m.simulated_db,
                        error_db: m.simulated_db - m.closed_form_db,
                    })
                })
                .collect::<Result<Vec<_>, circrx::Error>>()?;
            let _ = writeln!(out.report, "{:>7} {:>7} {:>12} {:>12}", "n_paths", "duty", "closed_dB", "oracle_dB");
            for r in &rows {
                let _ = writeln!(out.report, "{:>7} {:>7.4} {:>12.2} {:>12.2}", r.n_paths, r.duty, r.closed_form_db, r.simulated_db);
            }
            out.files.table("eq2_check", &rows, ctx.format)?;
        }
        LptvAction::Compare => {
            let p = closed_form_params(&cfg.npath)?;
            let one = C64::new(1.0, 0.0);
            let mut rows = Vec::new();
            for (port, cf) in [(Port::Tx, tx_excitation(&p, one)?), (Port::Ant, ant_excitation(&p, one)?)] {
                let ex = Excitation { port, amplitude: 1.0, freq: cfg.npath.f_lo, phase_deg: 0.0 };
                let r = simulate(&cfg.npath, &ex)?;
                for (node, v) in cf.named() {
                    let o = r.phasor(node);
                    let (error_db, error_deg) = if v.norm() < 1e-9 { (f64::NAN, f64::NAN) } else { compare(o, v) };
                    rows.push(CompareRow {
                        drive: port,
                        node,
                        closed_form_mag: v.norm(),
                        closed_form_deg: v.arg().to_degrees(),
                        oracle_mag: o.norm(),
                        oracle_deg: o.arg().to_degrees(),
                        error_db,
                        error_deg,
                    });
                }
            }
            let worst = rows.iter().filter(|r| r.error_db.is_finite()).fold((0.0f64, 0.0f64), |(a, b), r| (a.max(r.error_db.abs()), b.max(r.error_deg.abs())));
            let _ = writeln!(out.report, "worst magnitude error {:.3} dB, worst phase error {:.2} deg", worst.0, worst.1);
            out.files.table("compare", &rows, ctx.format)?;
        }
    }
    out.manifest("lptv", &cfg, seed)?;
    Ok(out)
}

#[derive(Serialize)]
struct SnippetRow {
    n: usize,
    before_re: f64,
    before_im: f64,
    after_re: f64,
    after_im: f64,
}

pub fn demo(ctx: &Context) -> Result<Output, CliError> {
    let (mut cfg, mseed): (DemoConfig, _) = ctx.load("demo")?;
    let seed = ctx.seed.or(mseed).unwrap_or(cfg.ofdm.seed);
    cfg.ofdm.seed = seed;
    let r = run_demo(&cfg)?;
    let mut out = Output::default();
    for (stem, psd) in [("psd_before", &r.psd_before), ("psd_after", &r.psd_after)] {
        match ctx.format {
            Format::Csv => {
                let mut buf = Vec::new();
                psd.write_csv(&mut buf)?;
                out.files.add(format!("{stem}.csv"), buf);
            }
            Format::Json => out.files.json(&format!("{stem}.json"), psd)?,
        }
    }
    let snippet: Vec<SnippetRow> = r
        .snippet
        .iter()
        .enumerate()
        .map(|(n, (b, a))| SnippetRow { n, before_re: b.re, before_im: b.im, after_re: a.re, after_im: a.im })
        .collect();
    out.files.table("snippet", &snippet, ctx.format)?;
    out.files.json("metrics.json", &r.summary)?;
    let s = &r.summary;
    let _ = writeln!(
        out.report,
        "digital SIC {:.1} dB, residual floor {:.1} dBm/Hz (injected {:.1}), tone SNR after {} -> {}",
        s.metrics.sic_main_db,
        s.residual_floor_dbm_per_hz,
        s.injected_floor_dbm_per_hz,
        s.tone_snr_after_db.map_or("n/a".into(), |v| format!("{v:.1} dB")),
        if s.recovered { "recovered" } else { "not recovered" }
    );
    out.manifest("demo", &cfg, seed)?;
    Ok(out)
}

pub fn link(ctx: &Context) -> Result<Output, CliError> {
    let (cfg, mseed): (LinkConfig, _) = ctx.load("link")?;
    let seed = ctx.seed.or(mseed).unwrap_or(DEFAULT_SEED);
    let r = link_range(&cfg)?;
    let mut out = Output::default();
    out.files.table("link", &[r], ctx.format)?;
    out.report = r.to_table();
    out.manifest("link", &cfg, seed)?;
    Ok(out)
}
