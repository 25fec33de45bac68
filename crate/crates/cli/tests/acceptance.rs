//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use circrx::balnet::{tune, Band, BankSpec};
use circrx::circmodel::{ant_excitation, balance_condition, tx_excitation, CirculatorParams, NetworkOptions};
use circrx::fddemo::{run_demo, DemoConfig};
use circrx::linkbudget::{link_range, noise_floor, LinkConfig};
use circrx::lptv::{
    compare, harmonic_recombine, harmonic_rejection_db, mixer_conversion_ratio, progression, recombination_gain_db, simulate,
    simulate_mixer, weights, Excitation, LineSpec, MixerConfig, NPathConfig, Port, RecombineTarget,
};
use circrx::netcore::Termination;
use circrx::noisemodel::noise_factor;
use circrx::sic::{build_basis, cancel, relative_power_db, train, BasisSpec};
use circrx::waveform::{apply_channel, ofdm_like, ChannelModel, NlTerm, OfdmLikeConfig};
use num_complex::Complex64 as C64;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}

fn balance() -> Outcome {
    let p = CirculatorParams::default();
    let b = balance_condition(&p).map_err(|e| e.to_string())?;
    let one = C64::new(1.0, 0.0);
    let tx = tx_excitation(&p.with_zbal(Termination::Z(b.zbal)), one).map_err(|e| e.to_string())?;
    let leak = tx.v1.norm();
    let ideal = balance_condition(&CirculatorParams { rsw: 0.0, ..p }).map_err(|e| e.to_string())?;
    check(
        b.zbal == C64::new(50.0, 0.0) && leak < 1e-12 && ideal.zbal == C64::new(0.0, 0.0),
        format!("Zbal {} ohm, |v1|/|v_tx| {leak:.1e}, Rsw = 0 gives {}", b.zbal, ideal.zbal),
    )
}

fn nf_anchor() -> Outcome {
    let p = CirculatorParams::default();
    let open = noise_factor(&p).map_err(|e| e.to_string())?.nf_db;
    let matched = noise_factor(&p.with_zbal(Termination::resistor(50.0))).map_err(|e| e.to_string())?.nf_db;
    let deg = matched - open;
    check(
        (open - 0.29).abs() < 0.005 && (matched - 3.30).abs() < 0.005 && (deg - 3.0).abs() <= 0.1,
        format!("NF open {open:.3} dB, Zbal = 50 {matched:.3} dB, degradation {deg:.3} dB"),
    )
}

fn mixer_gain() -> Outcome {
    let two = db20(mixer_conversion_ratio(2, 0.5).map_err(|e| e.to_string())?);
    let eight = db20(mixer_conversion_ratio(8, 0.125).map_err(|e| e.to_string())?);
    let mut worst = 0.0f64;
    for n in [2, 4, 8] {
        let m = simulate_mixer(&MixerConfig { n_paths: n, duty: 1.0 / n as f64, ..Default::default() }).map_err(|e| e.to_string())?;
        worst = worst.max((m.simulated_db - m.closed_form_db).abs());
    }
    check(
        (two + 3.92).abs() <= 0.005 && (eight + 0.22).abs() <= 0.005 && worst <= 0.1,
        format!("2-path {two:.3} dB, 8-path {eight:.3} dB, oracle worst {worst:.4} dB"),
    )
}

fn recombination() -> Outcome {
    let w = weights(RecombineTarget::I);
    let gain = recombination_gain_db(&w);
    let power = |h: i32| -> Result<f64, String> {
        let y = harmonic_recombine(&progression(h, 256, 5.0), RecombineTarget::I).map_err(|e| e.to_string())?;
        Ok(y.iter().map(|v| v.norm_sqr()).sum())
    };
    let fund = power(1)?;
    let streams = [3, 5].map(|h| power(h).map(|p| 10.0 * (fund / p).log10()));
    let (r3, r5) = (streams[0].clone()?, streams[1].clone()?);
    let weights_min = harmonic_rejection_db(&w, 3).min(harmonic_rejection_db(&w, 5));
    check(
        (gain - 12.04).abs() <= 0.01 && r3 > 120.0 && r5 > 120.0 && weights_min > 120.0,
        format!("gain {gain:.4} dB, rejection 3rd {r3:.0} dB, 5th {r5:.0} dB"),
    )
}

fn oracle_vs_closed_form() -> Outcome {
    let base = NPathConfig { c_bb: 1.6e-9, line: LineSpec::Matched { sections: 32, q: None }, substeps: 6, ..Default::default() };
    let fine = NPathConfig { substeps: 12, ..base.clone() };
    let p = CirculatorParams::default();
    let one = C64::new(1.0, 0.0);
    let (mut mag, mut phase, mut halving) = (0.0f64, 0.0f64, 0.0f64);
    for (port, cf) in [(Port::Tx, tx_excitation(&p, one)), (Port::Ant, ant_excitation(&p, one))] {
        let cf = cf.map_err(|e| e.to_string())?;
        let ex = Excitation { port, amplitude: 1.0, freq: p.f0, phase_deg: 0.0 };
        let a = simulate(&base, &ex).map_err(|e| e.to_string())?;
        let b = simulate(&fine, &ex).map_err(|e| e.to_string())?;
        for (node, v) in cf.named() {
            // nodes the closed form nulls carry no magnitude to compare
            if v.norm() < 1e-9 {
                continue;
            }
            let (d, deg) = compare(a.phasor(node), v);
            mag = mag.max(d.abs());
            phase = phase.max(deg.abs());
            halving = halving.max(db20(b.phasor(node).norm() / a.phasor(node).norm()).abs());
        }
    }
    check(
        mag <= 0.5 && phase <= 5.0 && halving < 0.05,
        format!("worst {mag:.3} dB / {phase:.2} deg, step halving {halving:.4} dB"),
    )
}

fn balance_tuning() -> Outcome {
    let opts = NetworkOptions { bal_shunt_c: 0.5e-12, ..Default::default() };
    let r = tune(&CirculatorParams::default(), &opts, &Band::default(), &BankSpec::default()).map_err(|e| e.to_string())?;
    let gain = r.avg_isolation_db - r.untuned_isolation_db;
    check(
        gain >= 15.0 && r.gain_penalty_db <= 3.0,
        format!(
            "isolation {:.2} dB vs untuned {:.2} dB (+{gain:.2}), gain penalty {:.2} dB",
            r.avg_isolation_db, r.untuned_isolation_db, r.gain_penalty_db
        ),
    )
}

fn link() -> Outcome {
    let floor = noise_floor(20e6, 8.0).map_err(|e| e.to_string())?;
    let r = link_range(&LinkConfig::default()).map_err(|e| e.to_string())?;
    check(
        (floor + 93.0).abs() <= 0.05 && (r.budget_db - 71.0).abs() <= 0.05 && (90.0..=115.0).contains(&r.range_m),
        format!("floor {floor:.3} dBm, budget {:.3} dB, range {:.1} m", r.budget_db, r.range_m),
    )
}

fn exact_recovery() -> Outcome {
    let x = ofdm_like(&OfdmLikeConfig { length: 14_000, sync_len: 0, seed: 9, ..Default::default() }).map_err(|e| e.to_string())?;
    let ch = ChannelModel {
        linear: vec![C64::new(0.8, 0.1), C64::new(-0.05, 0.03), C64::new(0.01, 0.0)],
        terms: vec![
            NlTerm { order: 3, delay: 2, coeff: C64::new(0.02, -0.01) },
            NlTerm { order: 5, delay: 4, coeff: C64::new(-0.003, 0.002) },
        ],
        noise_floor_db_per_hz: None,
    };
    let y = apply_channel(&x, &ch, 0).map_err(|e| e.to_string())?;
    let spec = BasisSpec::default();
    let basis = build_basis(&x, &spec).map_err(|e| e.to_string())?;
    let model = train(&y, &basis, 12_800).map_err(|e| e.to_string())?;
    let r = cancel(&y, &basis, &model).map_err(|e| e.to_string())?;
    let held = relative_power_db(&r.samples[12_800..], &y.samples[12_800..]);
    check(held < -120.0, format!("{} coefficients, residual {held:.1} dB of SI", spec.n_columns()))
}

fn demo_scale() -> Result<(Outcome, Outcome), String> {
    let out = run_demo(&DemoConfig::default()).map_err(|e| e.to_string())?;
    let s = &out.summary;
    let gap = s.residual_floor_dbm_per_hz - s.injected_floor_dbm_per_hz;
    let b = check(
        s.metrics.sic_main_db >= 38.0 && gap.abs() <= 3.0,
        format!("digital SIC {:.1} dB, residual floor {gap:+.2} dB from injected", s.metrics.sic_main_db),
    );
    let below = s.tone_below_si_db.unwrap_or(f64::NAN);
    let snr = s.tone_snr_after_db.unwrap_or(f64::NAN);
    let c = check(below >= 10.0 && snr >= 10.0, format!("tone {below:.1} dB under SI, SNR after {snr:.1} dB"));
    Ok((b, c))
}

fn run_cli_demo(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_circrx"))
        .arg("--out")
        .arg(dir)
        .args(["--seed", "7", "demo"])
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let path = e.map_err(|e| e.to_string())?.path();
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            Ok((path.file_name().unwrap().to_string_lossy().into_owned(), bytes))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = run_cli_demo(&tmp.path().join("a"))?;
    let b = run_cli_demo(&tmp.path().join("b"))?;
    let payloads = a.iter().filter(|(n, _)| n.ends_with(".csv") || n.ends_with(".json")).count();
    check(a == b && payloads > 0, format!("{payloads} payload files, identical: {}", a == b))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, start: Instant, outcome: Outcome| {
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {id:<3} {name}: {detail} ({secs:.1} s)");
    };
    let t = Instant::now();
    report("1", "balance condition", t, balance());
    let t = Instant::now();
    report("2", "NF anchor", t, nf_anchor());
    let t = Instant::now();
    report("3", "mixer gain", t, mixer_gain());
    let t = Instant::now();
    report("4", "harmonic recombination", t, recombination());
    let t = Instant::now();
    report("5", "oracle vs closed form", t, oracle_vs_closed_form());
    let t = Instant::now();
    report("6", "balance tuning", t, balance_tuning());
    let t = Instant::now();
    report("7", "link budget", t, link());
    let t = Instant::now();
    report("8a", "SIC exact recovery", t, exact_recovery());
    let t = Instant::now();
    match demo_scale() {
        Ok((b, c)) => {
            report("8b", "SIC demo scale", t, b);
            report("8c", "desired tone recovery", t, c);
        }
        Err(e) => {
            report("8b", "SIC demo scale", t, Err(e.clone()));
            report("8c", "desired tone recovery", t, Err(e));
        }
    }
    let t = Instant::now();
    report("9", "determinism", t, determinism());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
