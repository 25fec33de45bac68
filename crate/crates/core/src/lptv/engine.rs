//! Piecewise-LTI switched network with exact state-transition stepping.
//!
//! State is `[node voltages | inductor currents | oscillator pairs]`. Every
//! non-ground node carries a capacitance to ground. Sinusoidal sources live in the
//! state as rotating `(cos, sin)` pairs, so one transition matrix per switch
//! topology advances the whole system by one time step with no discretization
//! error. Fourier integrals over a step are exact as well, so phasors do not
//! depend on the step size.

use std::collections::HashMap;
use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

pub type NodeId = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Always,
    Left(usize),
    Right(usize),
}

/// Resistor from `a` to `b` carrying `(v_a - v_b - e) / r`, where `e` is the
/// voltage of source `emf` (if any).
#[derive(Debug, Clone)]
pub struct Branch {
    pub a: NodeId,
    pub b: NodeId,
    pub r: f64,
    pub emf: Option<usize>,
    pub gate: Gate,
}

/// Inductor from `a` to `b` with series loss `r`.
#[derive(Debug, Clone)]
pub struct Inductor {
    pub a: NodeId,
    pub b: NodeId,
    pub l: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Netlist {
    pub node_names: Vec<String>,
    pub caps: Vec<f64>,
    pub branches: Vec<Branch>,
    pub inductors: Vec<Inductor>,
    pub n_sources: usize,
}

impl Netlist {
    pub fn add_node(&mut self, name: impl Into<String>, c: f64) -> usize {
        self.node_names.push(name.into());
        self.caps.push(c);
        self.caps.len() - 1
    }

    pub fn add_source(&mut self) -> usize {
        self.n_sources += 1;
        self.n_sources - 1
    }
}

/// Sinusoid `Re(amp * exp(j 2 pi f t))` driving one source.
#[derive(Debug, Clone, Copy)]
pub struct Tone {
    pub source: usize,
    pub amp: C64,
    pub freq: f64,
}

/// Clocking of the two switch sets on a uniform grid of `n_paths * m` steps per period.
#[derive(Debug, Clone, Copy)]
pub struct Clocking {
    pub n_paths: usize,
    pub period: f64,
    /// Steps per path slot.
    pub m: usize,
    /// Steps each path conducts within its slot (`m` for duty `1/N`).
    pub on_steps: usize,
    /// Delay of the right set in steps (negative leads).
    pub shift_steps: i64,
}

impl Clocking {
    pub fn steps_per_period(&self) -> usize {
        self.n_paths * self.m
    }

    pub fn h(&self) -> f64 {
        self.period / self.steps_per_period() as f64
    }

    fn slot(&self, q: i64) -> Option<usize> {
        let q = q.rem_euclid(self.steps_per_period() as i64) as usize;
        (q % self.m < self.on_steps).then_some(q / self.m)
    }

    /// Active (left, right) paths during step `q` of a period.
    pub fn active(&self, q: usize) -> (Option<usize>, Option<usize>) {
        (self.slot(q as i64), self.slot(q as i64 - self.shift_steps))
    }
}

type Key = (Option<usize>, Option<usize>);

pub struct Engine {
    pub netlist: Netlist,
    pub clock: Clocking,
    pub tones: Vec<Tone>,
    n_nodes: usize,
    n_circuit: usize,
    n_state: usize,
    base: DMatrix<f64>,
    cache: HashMap<Key, DMatrix<f64>>,
    integrals: HashMap<(Key, u64), DMatrix<f64>>,
}

impl Engine {
    pub fn new(netlist: Netlist, clock: Clocking, tones: Vec<Tone>) -> Result<Self> {
        let n_nodes = netlist.caps.len();
        if let Some(i) = netlist.caps.iter().position(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(invalid("capacitance", format!("node {} needs C > 0", netlist.node_names[i])));
        }
        for br in &netlist.branches {
            if !(br.r > 0.0 && br.r.is_finite()) {
                return Err(invalid("resistance", "branch resistances must be positive"));
            }
            if br.emf.is_some_and(|s| s >= netlist.n_sources) {
                return Err(invalid("emf", "unknown source"));
            }
        }
        for ind in &netlist.inductors {
            if !(ind.l > 0.0 && ind.r >= 0.0) {
                return Err(invalid("inductance", "must be positive with non-negative loss"));
            }
        }
        for t in &tones {
            if t.source >= netlist.n_sources {
                return Err(invalid("tone", "unknown source"));
            }
        }
        let n_circuit = n_nodes + netlist.inductors.len();
        let n_state = n_circuit + 2 * tones.len();
        let mut engine = Engine {
            netlist,
            clock,
            tones,
            n_nodes,
            n_circuit,
            n_state,
            base: DMatrix::zeros(n_state, n_state),
            cache: HashMap::new(),
            integrals: HashMap::new(),
        };
        engine.base = engine.assemble(|g| g == Gate::Always);
        Ok(engine)
    }

    pub fn n_state(&self) -> usize {
        self.n_state
    }

    pub fn n_circuit(&self) -> usize {
        self.n_circuit
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    fn stamp_branch(&self, a: &mut DMatrix<f64>, br: &Branch) {
        let g = 1.0 / br.r;
        let osc: Vec<usize> = match br.emf {
            Some(s) => self
                .tones
                .iter()
                .enumerate()
                .filter(|(_, t)| t.source == s)
                .map(|(i, _)| self.n_circuit + 2 * i)
                .collect(),
            None => Vec::new(),
        };
        // dv_a/dt -= i/C_a, dv_b/dt += i/C_b with i = g (v_a - v_b - e)
        for (node, sign) in [(br.a, -1.0), (br.b, 1.0)] {
            let Some(n) = node else { continue };
            let k = sign * g / self.netlist.caps[n];
            if let Some(p) = br.a {
                a[(n, p)] += k;
            }
            if let Some(q) = br.b {
                a[(n, q)] -= k;
            }
            for &c in &osc {
                a[(n, c)] -= k;
            }
        }
    }

    fn assemble(&self, include: impl Fn(Gate) -> bool) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n_state, self.n_state);
        for br in self.netlist.branches.iter().filter(|b| include(b.gate)) {
            self.stamp_branch(&mut a, br);
        }
        if include(Gate::Always) {
            for (j, ind) in self.netlist.inductors.iter().enumerate() {
                let row = self.n_nodes + j;
                if let Some(p) = ind.a {
                    a[(row, p)] += 1.0 / ind.l;
                    a[(p, row)] -= 1.0 / self.netlist.caps[p];
                }
                if let Some(q) = ind.b {
                    a[(row, q)] -= 1.0 / ind.l;
                    a[(q, row)] += 1.0 / self.netlist.caps[q];
                }
                a[(row, row)] -= ind.r / ind.l;
            }
            for (i, t) in self.tones.iter().enumerate() {
                let c = self.n_circuit + 2 * i;
                let w = TAU * t.freq;
                a[(c, c + 1)] = -w;
                a[(c + 1, c)] = w;
            }
        }
        a
    }

    fn system(&self, key: Key) -> DMatrix<f64> {
        let gated = self.assemble(|g| match g {
            Gate::Always => false,
            Gate::Left(k) => key.0 == Some(k),
            Gate::Right(k) => key.1 == Some(k),
        });
        &self.base + gated
    }

    fn transition(&mut self, key: Key) -> &DMatrix<f64> {
        if !self.cache.contains_key(&key) {
            let a = self.system(key) * self.clock.h();
            self.cache.insert(key, a.exp());
        }
        &self.cache[&key]
    }

    /// `[Re W; Im W]` with `W = int_0^h exp(A s) exp(-j w s) ds`, from the
    /// block exponential `exp([[R, E], [0, 0]] h)` where `R` is the real form of
    /// `A - j w I`.
    fn integral_map(&mut self, key: Key, freq: f64) -> &DMatrix<f64> {
        let id = (key, freq.to_bits());
        if !self.integrals.contains_key(&id) {
            let n = self.n_state;
            let a = self.system(key);
            let w = TAU * freq;
            let mut g = DMatrix::zeros(3 * n, 3 * n);
            g.view_mut((0, 0), (n, n)).copy_from(&a);
            g.view_mut((n, n), (n, n)).copy_from(&a);
            for i in 0..n {
                g[(i, n + i)] = w;
                g[(n + i, i)] = -w;
                g[(i, 2 * n + i)] = 1.0;
            }
            let e = (g * self.clock.h()).exp();
            self.integrals.insert(id, e.view((0, 2 * n), (2 * n, n)).into_owned());
        }
        &self.integrals[&id]
    }

    /// `int x(t0 + s) exp(-j 2 pi freq s) ds` over step `q`, given `x = x(t0)`.
    pub fn step_integral(&mut self, q: usize, x: &DVector<f64>, freq: f64) -> DVector<C64> {
        let key = self.clock.active(q);
        let n = self.n_state;
        let v = self.integral_map(key, freq) * x;
        DVector::from_fn(n, |i, _| C64::new(v[i], v[n + i]))
    }

    /// Single component of [`Engine::step_integral`].
    pub fn step_integral_at(&mut self, q: usize, x: &DVector<f64>, freq: f64, row: usize) -> C64 {
        let key = self.clock.active(q);
        let n = self.n_state;
        let w = self.integral_map(key, freq);
        C64::new(w.row(row).dot(&x.transpose()), w.row(n + row).dot(&x.transpose()))
    }

    /// State transition over one full LO period.
    pub fn period_map(&mut self) -> DMatrix<f64> {
        let mut p = DMatrix::identity(self.n_state, self.n_state);
        for q in 0..self.clock.steps_per_period() {
            let key = self.clock.active(q);
            p = self.transition(key) * p;
        }
        p
    }

    /// Initial oscillator states for the configured tones.
    pub fn initial_state(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.n_state);
        for (i, t) in self.tones.iter().enumerate() {
            x[self.n_circuit + 2 * i] = t.amp.re;
            x[self.n_circuit + 2 * i + 1] = t.amp.im;
        }
        x
    }

    /// Linear map from oscillator state to the circuit state that repeats after
    /// `periods` LO periods (shooting solution).
    pub fn steady_state_map(&mut self, periods: usize) -> Result<DMatrix<f64>> {
        let p = matrix_power(&self.period_map(), periods);
        let nc = self.n_circuit;
        let no = self.n_state - nc;
        let lhs = DMatrix::identity(nc, nc) - p.view((0, 0), (nc, nc));
        let rhs = p.view((0, nc), (nc, no)).into_owned();
        let lu = lhs.lu();
        lu.solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Singular("no periodic steady state (undamped mode)".into()))
    }

    /// Advances `x` one step at period position `q`.
    pub fn step(&mut self, q: usize, x: &DVector<f64>) -> DVector<f64> {
        let key = self.clock.active(q);
        self.transition(key) * x
    }

    pub fn oscillator_slice(&self, x: &DVector<f64>) -> DVector<f64> {
        x.rows(self.n_circuit, self.n_state - self.n_circuit).into_owned()
    }
}

fn matrix_power(m: &DMatrix<f64>, mut e: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}
