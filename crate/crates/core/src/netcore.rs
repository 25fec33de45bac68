//! Two-port network algebra in chain (ABCD) form.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tol;

pub const J: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// A one-port termination: either a finite impedance or an open circuit.
///
/// Open is kept as its own variant so that "no network" never becomes a huge
/// number in a denominator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Termination {
    #[default]
    Open,
    Z(C64),
}

impl Termination {
    pub fn resistor(r: f64) -> Self {
        Termination::Z(C64::new(r, 0.0))
    }

    /// Admittance, zero for open.
    pub fn admittance(self) -> C64 {
        match self {
            Termination::Open => ZERO,
            Termination::Z(z) => z.inv(),
        }
    }

    pub fn impedance(self) -> Option<C64> {
        match self {
            Termination::Open => None,
            Termination::Z(z) => Some(z),
        }
    }

    /// `z0 / Z`, zero for open.
    pub fn normalized_admittance(self, z0: f64) -> C64 {
        self.admittance() * z0
    }

    /// Parallel combination with a shunt admittance.
    pub fn with_shunt(self, y: C64) -> Self {
        let total = self.admittance() + y;
        if total == ZERO {
            Termination::Open
        } else {
            Termination::Z(total.inv())
        }
    }

    pub fn is_passive(self) -> bool {
        match self {
            Termination::Open => true,
            Termination::Z(z) => z.re >= 0.0 && z.is_finite(),
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Open => write!(f, "open"),
            Termination::Z(z) => write!(f, "{}{:+}j", z.re, z.im),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TerminationRepr {
    Word(String),
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Serialize for Termination {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Termination::Open => TerminationRepr::Word("open".into()),
            Termination::Z(z) => TerminationRepr::Complex { re: z.re, im: z.im },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Termination {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match TerminationRepr::deserialize(d)? {
            TerminationRepr::Word(w) if w.eq_ignore_ascii_case("open") => Ok(Termination::Open),
            TerminationRepr::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"open\", a number or {{re, im}}, got \"{w}\""
            ))),
            TerminationRepr::Real(r) => Ok(Termination::resistor(r)),
            TerminationRepr::Complex { re, im } => Ok(Termination::Z(C64::new(re, im))),
        }
    }
}

/// Chain matrix `[V1; I1] = [[a, b], [c, d]] [V2; I2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Abcd {
    pub const IDENTITY: Abcd = Abcd {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Abcd { a, b, c, d }
    }

    pub fn series(z: C64) -> Self {
        Abcd { b: z, ..Self::IDENTITY }
    }

    pub fn shunt(y: C64) -> Self {
        Abcd { c: y, ..Self::IDENTITY }
    }

    /// Ideal gyrator with `V1 = -j V2` and `I1 = -j I2`: forward transmission
    /// `+j`, reverse `-j`.
    pub fn gyrator() -> Self {
        Abcd {
            a: -J,
            b: ZERO,
            c: ZERO,
            d: -J,
        }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Input impedance with `load` on port 2.
    pub fn input_impedance(&self, load: Termination) -> Result<Termination> {
        let (num, den) = match load {
            Termination::Open => (self.a, self.c),
            Termination::Z(z) => (self.a * z + self.b, self.c * z + self.d),
        };
        if den.norm() <= tol::SINGULAR_REL * num.norm() {
            return Ok(Termination::Open);
        }
        Ok(Termination::Z(num / den))
    }
}

impl Mul for Abcd {
    type Output = Abcd;
    fn mul(self, o: Abcd) -> Abcd {
        Abcd {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// Scattering parameters with a real reference impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams {
    pub s11: C64,
    pub s12: C64,
    pub s21: C64,
    pub s22: C64,
    pub zref: f64,
}

impl SParams {
    pub fn det(&self) -> C64 {
        self.s11 * self.s22 - self.s12 * self.s21
    }

    /// Largest singular value of the 2x2 S matrix.
    pub fn max_singular_value(&self) -> f64 {
        let fro2 = self.s11.norm_sqr() + self.s12.norm_sqr() + self.s21.norm_sqr() + self.s22.norm_sqr();
        let det2 = self.det().norm_sqr();
        let disc = (fro2 * fro2 - 4.0 * det2).max(0.0);
        ((fro2 + disc.sqrt()) / 2.0).sqrt()
    }

    pub fn is_passive(&self) -> bool {
        self.max_singular_value() <= 1.0 + tol::PASSIVITY
    }

    /// Deviation of `S^H S` from identity (max abs entry).
    pub fn unitarity_error(&self) -> f64 {
        let [s11, s12, s21, s22] = [self.s11, self.s12, self.s21, self.s22];
        let m11 = s11.norm_sqr() + s21.norm_sqr() - 1.0;
        let m22 = s12.norm_sqr() + s22.norm_sqr() - 1.0;
        let m12 = s11.conj() * s12 + s21.conj() * s22;
        m11.abs().max(m22.abs()).max(m12.norm())
    }
}

/// Chain product of `sections` in order.
pub fn cascade(sections: &[Abcd]) -> Result<Abcd> {
    let (first, rest) = sections.split_first().ok_or(Error::NoSections)?;
    Ok(rest.iter().fold(*first, |acc, &m| acc * m))
}

/// Ideal transmission line of characteristic impedance `zc` and electrical length `theta`.
pub fn tline_abcd(zc: f64, theta: f64) -> Abcd {
    debug_assert!(zc > 0.0);
    let (s, c) = theta.sin_cos();
    Abcd {
        a: C64::new(c, 0.0),
        b: J * (zc * s),
        c: J * (s / zc),
        d: C64::new(c, 0.0),
    }
}

/// Shunt-C / series-L / shunt-C section, optionally with inductor loss `2 pi f L / q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiSection {
    pub l: f64,
    pub c: f64,
    #[serde(default)]
    pub q: Option<f64>,
}

impl PiSection {
    /// Section that matches a line of impedance `zc` and length `theta` at `f0`.
    pub fn for_line(zc: f64, theta: f64, f0: f64) -> Self {
        let w = TAU * f0;
        let (s, c) = theta.sin_cos();
        PiSection {
            l: zc * s / w,
            c: (1.0 - c) / (zc * s * w),
            q: None,
        }
    }

    /// Quarter-wave equivalent at `f0`: `wL = zc`, `wC = 1/zc`.
    pub fn quarter_wave(zc: f64, f0: f64) -> Self {
        Self::for_line(zc, FRAC_PI_2, f0)
    }

    /// Quarter-wave equivalent built around a given inductor.
    pub fn quarter_wave_from_l(l: f64, f0: f64) -> Self {
        let zc = TAU * f0 * l;
        PiSection { l, c: 1.0 / (TAU * f0 * zc), q: None }
    }

    pub fn with_q(mut self, q: Option<f64>) -> Self {
        self.q = q;
        self
    }

    /// Inductor loss resistance at `f`.
    pub fn series_resistance(&self, f: f64) -> f64 {
        match self.q {
            Some(q) if q > 0.0 => TAU * f * self.l / q,
            _ => 0.0,
        }
    }

    pub fn abcd(&self, f: f64) -> Abcd {
        clc_pi_abcd(self.l, self.c, f, self.q)
    }
}

/// ABCD of a CLC pi-section at frequency `f`.
pub fn clc_pi_abcd(l: f64, c: f64, f: f64, q: Option<f64>) -> Abcd {
    let w = TAU * f;
    let r = match q {
        Some(q) if q > 0.0 => w * l / q,
        _ => 0.0,
    };
    let y = J * (w * c);
    Abcd::shunt(y) * Abcd::series(C64::new(r, w * l)) * Abcd::shunt(y)
}

pub fn s_from_abcd(m: Abcd, zref: f64) -> Result<SParams> {
    if zref <= 0.0 || !zref.is_finite() {
        return Err(invalid("zref", "must be positive"));
    }
    let bz = m.b / zref;
    let cz = m.c * zref;
    let den = m.a + bz + cz + m.d;
    let scale = m.a.norm() + bz.norm() + cz.norm() + m.d.norm();
    if den.norm() <= tol::SINGULAR_REL * scale || !den.is_finite() {
        return Err(Error::DegenerateNetwork);
    }
    Ok(SParams {
        s11: (m.a + bz - cz - m.d) / den,
        s12: 2.0 * m.det() / den,
        s21: 2.0 / den,
        s22: (-m.a + bz - cz + m.d) / den,
        zref,
    })
}

pub fn abcd_from_s(s: SParams) -> Result<Abcd> {
    if s.s21.norm() <= tol::SINGULAR_REL {
        return Err(Error::DegenerateNetwork);
    }
    let z = s.zref;
    let k = 2.0 * s.s21;
    let p = s.s12 * s.s21;
    Ok(Abcd {
        a: ((1.0 + s.s11) * (1.0 - s.s22) + p) / k,
        b: z * ((1.0 + s.s11) * (1.0 + s.s22) - p) / k,
        c: ((1.0 - s.s11) * (1.0 - s.s22) - p) / (k * z),
        d: ((1.0 - s.s11) * (1.0 + s.s22) + p) / k,
    })
}

/// Reflection coefficient of `t` against `z0`; open gives 1.
pub fn reflection(t: Termination, z0: f64) -> C64 {
    match t {
        Termination::Open => ONE,
        Termination::Z(z) => (z - z0) / (z + z0),
    }
}

pub fn vswr(t: Termination, z0: f64) -> f64 {
    let g = reflection(t, z0).norm();
    if g >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + g) / (1.0 - g)
    }
}

pub fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}

pub fn db10(x: f64) -> f64 {
    10.0 * x.log10()
}
