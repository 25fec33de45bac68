//! Noise circulation through the balance network and the resulting noise factor.
//!
//! Four thermal sources reach the gyrator node: the antenna, the switches on
//! either side of the gyrator, and the balance network. With
//! `k = 1 + Rsw/Z0` and `G` the balance reflection coefficient their power
//! transfer coefficients are
//!
//! ```text
//! ant, sw_right : |1 + G/k|^2 / 4
//! sw_left       : |1 - G/k|^2 / 4
//! bal           : |1 - G|^2   / 4
//! ```

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::circmodel::CirculatorParams;
use crate::error::{invalid, Error, Result};
use crate::netcore::{db10, reflection, Termination};
use crate::tol::{BOLTZMANN, T0_KELVIN};

/// Reflection coefficient of the balance network; open gives 1.
pub fn gamma_of(zbal: Termination, z0: f64) -> C64 {
    reflection(zbal, z0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub ant: f64,
    pub sw_left: f64,
    pub sw_right: f64,
    pub bal: f64,
}

impl Coefficients {
    pub fn new(gamma: C64, rsw: f64, z0: f64) -> Self {
        let k = 1.0 + rsw / z0;
        let right = (1.0 + gamma / k).norm_sqr() / 4.0;
        Coefficients {
            ant: right,
            sw_left: (1.0 - gamma / k).norm_sqr() / 4.0,
            sw_right: right,
            bal: (1.0 - gamma).norm_sqr() / 4.0,
        }
    }
}

/// Noise voltage densities at the gyrator node, V^2/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBreakdown {
    pub ant: f64,
    pub sw_left: f64,
    pub sw_right: f64,
    pub bal: f64,
    #[serde(with = "crate::cplx")]
    pub gamma_bal: C64,
    pub temperature: f64,
    pub coefficients: Coefficients,
}

impl NoiseBreakdown {
    pub fn total(&self) -> f64 {
        self.ant + self.sw_left + self.sw_right + self.bal
    }
}

fn require_nominal(p: &CirculatorParams) -> Result<()> {
    p.validate()?;
    if (p.zant - p.z0).norm() > 1e-9 * p.z0 {
        return Err(Error::NonNominalAntenna { zant: p.zant });
    }
    Ok(())
}

/// Resistance that thermalizes in the balance network; zero for open.
fn bal_resistance(zbal: Termination) -> f64 {
    zbal.impedance().map_or(0.0, |z| z.re)
}

pub fn noise_at_gyrator(p: &CirculatorParams, temperature: f64) -> Result<NoiseBreakdown> {
    require_nominal(p)?;
    if !(temperature >= 0.0) {
        return Err(invalid("temperature", "must be non-negative"));
    }
    let gamma = gamma_of(p.zbal, p.z0);
    let c = Coefficients::new(gamma, p.rsw, p.z0);
    let four_kt = 4.0 * BOLTZMANN * temperature;
    Ok(NoiseBreakdown {
        ant: four_kt * p.z0 * c.ant,
        sw_left: four_kt * p.rsw * c.sw_left,
        sw_right: four_kt * p.rsw * c.sw_right,
        bal: four_kt * bal_resistance(p.zbal) * c.bal,
        gamma_bal: gamma,
        temperature,
        coefficients: c,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseFactorResult {
    pub f: f64,
    pub nf_db: f64,
    /// `1`, left switch, right switch, balance network.
    pub terms: [f64; 4],
}

pub fn noise_factor(p: &CirculatorParams) -> Result<NoiseFactorResult> {
    require_nominal(p)?;
    let gamma = gamma_of(p.zbal, p.z0);
    let s = p.rsw / p.z0;
    let k = 1.0 + s;
    let left = s * ((k - gamma) / (k + gamma)).norm_sqr();
    let bal = match p.zbal {
        // 1 - G = 2 Z0 / (Z + Z0) vanishes faster than Re(Z) grows
        Termination::Open => 0.0,
        Termination::Z(z) => (z.re / p.z0) * (k * (1.0 - gamma) / (k + gamma)).norm_sqr(),
    };
    let terms = [1.0, left, s, bal];
    let f: f64 = terms.iter().sum();
    Ok(NoiseFactorResult {
        f,
        nf_db: db10(f),
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseCurveRow {
    pub zbal_ohm: f64,
    pub ant: f64,
    pub sw_left: f64,
    pub sw_right: f64,
    pub bal: f64,
    pub nf_db: f64,
}

/// Transfer coefficients and NF over a grid of resistive balance impedances.
pub fn nf_vs_zbal_curve(p: &CirculatorParams, grid: &[f64]) -> Result<Vec<NoiseCurveRow>> {
    require_nominal(p)?;
    grid.iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(invalid("zbal grid", format!("{r} is not positive")));
            }
            let q = p.with_zbal(Termination::resistor(r));
            let c = Coefficients::new(gamma_of(q.zbal, q.z0), q.rsw, q.z0);
            Ok(NoiseCurveRow {
                zbal_ohm: r,
                ant: c.ant,
                sw_left: c.sw_left,
                sw_right: c.sw_right,
                bal: c.bal,
                nf_db: noise_factor(&q)?.nf_db,
            })
        })
        .collect()
}

/// Total noise at the gyrator referred to the antenna-only part at `T0`.
pub fn noise_factor_from_breakdown(b: &NoiseBreakdown) -> f64 {
    b.total() / b.ant
}

pub fn default_temperature() -> f64 {
    T0_KELVIN
}
