//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the amplitude index (little-endian): `|x_{n-1} … x_1 x_0⟩` lives at
//! index `Σ x_q 2^q`.

use crate::pauli::{Axis, PauliHamiltonian};
use crate::qrac::Mat2;
use crate::seed;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{requested} qubits requested but the simulator is capped at {cap}")]
    Capacity { requested: usize, cap: usize },
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitIndex { qubit: usize, n: usize },
    #[error("circuit takes {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("unsupported ansatz: {0}")]
    Ansatz(String),
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn new(n: usize) -> Result<Self, SimError> {
        check_capacity(n, MAX_QUBITS)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Normalizes the given amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        let n = amps.len().trailing_zeros() as usize;
        check_capacity(n, MAX_QUBITS)?;
        let mut s = Self { n, amps };
        let norm = s.norm();
        assert!(norm > 0.0, "zero vector");
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Tensor product `⊗_q |φ_q⟩` with `factors[q]` on qubit `q`.
    pub fn product(factors: &[[Complex64; 2]]) -> Result<Self, SimError> {
        let n = factors.len();
        check_capacity(n, MAX_QUBITS)?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for (q, f) in factors.iter().enumerate() {
            let mut next = vec![ZERO; amps.len() * 2];
            for (i, a) in amps.iter().enumerate() {
                next[i] = a * f[0];
                next[i | (1 << q)] = a * f[1];
            }
            amps = next;
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, q: usize) -> Result<(), SimError> {
        if q >= self.n {
            return Err(SimError::QubitIndex { qubit: q, n: self.n });
        }
        Ok(())
    }

    /// Arbitrary single-qubit unitary.
    pub fn apply_1q(&mut self, q: usize, u: &Mat2) -> Result<(), SimError> {
        self.check(q)?;
        let bit = 1 << q;
        for block in self.amps.chunks_exact_mut(2 * bit) {
            let (lo, hi) = block.split_at_mut(bit);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = u[0][0] * a + u[0][1] * b;
                *y = u[1][0] * a + u[1][1] * b;
            }
        }
        Ok(())
    }

    pub fn rx(&mut self, q: usize, theta: f64) -> Result<(), SimError> {
        self.apply_1q(q, &rotation(Axis::X, theta))
    }

    pub fn ry(&mut self, q: usize, theta: f64) -> Result<(), SimError> {
        self.apply_1q(q, &rotation(Axis::Y, theta))
    }

    pub fn rz(&mut self, q: usize, theta: f64) -> Result<(), SimError> {
        self.apply_1q(q, &rotation(Axis::Z, theta))
    }

    pub fn h(&mut self, q: usize) -> Result<(), SimError> {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_1q(q, &[[s, s], [s, -s]])
    }

    /// `exp(-iθ X⊗X/2)` on qubits `a`, `b`.
    pub fn rxx(&mut self, a: usize, b: usize, theta: f64) -> Result<(), SimError> {
        self.check(a)?;
        self.check(b)?;
        assert_ne!(a, b, "RXX needs two distinct qubits");
        let mask = (1 << a) | (1 << b);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let ms = Complex64::new(0.0, -s);
        for i in 0..self.amps.len() {
            let j = i ^ mask;
            if i < j {
                let (x, y) = (self.amps[i], self.amps[j]);
                self.amps[i] = x * c + y * ms;
                self.amps[j] = y * c + x * ms;
            }
        }
        Ok(())
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check(control)?;
        self.check(target)?;
        assert_ne!(control, target, "CX needs two distinct qubits");
        let (c, t) = (1 << control, 1 << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<(), SimError> {
        self.check(a)?;
        self.check(b)?;
        let mask = (1 << a) | (1 << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Reduced single-qubit Bloch vectors `(⟨X_q⟩, ⟨Y_q⟩, ⟨Z_q⟩)` for every qubit.
    pub fn bloch_vectors(&self) -> Vec<[f64; 3]> {
        (0..self.n)
            .map(|q| {
                let bit = 1 << q;
                let mut v = [0.0; 3];
                for i in (0..self.amps.len()).filter(|i| i & bit == 0) {
                    let (a, b) = (self.amps[i], self.amps[i | bit]);
                    let cross = a.conj() * b;
                    v[0] += 2.0 * cross.re;
                    v[1] += 2.0 * cross.im;
                    v[2] += a.norm_sqr() - b.norm_sqr();
                }
                v
            })
            .collect()
    }

    /// `exp(-iγ C)` for a diagonal operator given by its diagonal.
    pub fn evolve_diagonal(&mut self, diagonal: &[f64], gamma: f64) {
        assert_eq!(diagonal.len(), self.amps.len(), "diagonal length mismatch");
        for (a, &c) in self.amps.iter_mut().zip(diagonal) {
            *a *= Complex64::from_polar(1.0, -gamma * c);
        }
    }

    /// [`Self::evolve_diagonal`] with one phase computed per distinct level.
    pub fn evolve_levels(&mut self, diagonal: &DiagonalLevels, gamma: f64) {
        assert_eq!(diagonal.index.len(), self.amps.len(), "diagonal length mismatch");
        let phases: Vec<Complex64> = diagonal.levels.iter().map(|&c| Complex64::from_polar(1.0, -gamma * c)).collect();
        for (a, &k) in self.amps.iter_mut().zip(&diagonal.index) {
            *a *= phases[k as usize];
        }
    }
}

/// A diagonal stored as its distinct values plus one level index per basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalLevels {
    pub levels: Vec<f64>,
    pub index: Vec<u32>,
}

impl DiagonalLevels {
    pub fn new(diagonal: &[f64]) -> Self {
        let mut levels = diagonal.to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup_by(|a, b| a.total_cmp(b).is_eq());
        let index = diagonal
            .iter()
            .map(|c| levels.binary_search_by(|l| l.total_cmp(c)).expect("level present") as u32)
            .collect();
        Self { levels, index }
    }

    pub fn values(&self) -> Vec<f64> {
        self.index.iter().map(|&k| self.levels[k as usize]).collect()
    }
}

fn check_capacity(n: usize, cap: usize) -> Result<(), SimError> {
    if n > cap {
        return Err(SimError::Capacity { requested: n, cap });
    }
    Ok(())
}

/// `exp(-iθA/2)`.
pub fn rotation(axis: Axis, theta: f64) -> Mat2 {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match axis {
        Axis::X => [[re(c), im(-s)], [im(-s), re(c)]],
        Axis::Y => [[re(c), re(-s)], [re(s), re(c)]],
        Axis::Z => [[Complex64::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, Complex64::from_polar(1.0, theta / 2.0)]],
    }
}

/// Diagonal of a Z-only Hamiltonian over all `2^n` basis states, offset included.
pub fn diagonal_values(h: &PauliHamiltonian) -> Vec<f64> {
    assert!(h.is_diagonal(), "Hamiltonian has off-diagonal terms");
    let mut diag = vec![h.offset; 1 << h.n_qubits];
    for t in &h.terms {
        let mask = t.phase_mask();
        for (i, d) in diag.iter_mut().enumerate() {
            if (i & mask).count_ones() % 2 == 0 {
                *d += t.coeff;
            } else {
                *d -= t.coeff;
            }
        }
    }
    diag
}

/// Largest number of distinct phase bits a group keeps as a lookup table.
const TABLE_BITS: usize = 8;

#[derive(Debug, Clone)]
enum Weights {
    /// Indexed by the bits of `i` at `positions`, packed low to high.
    Table { positions: Vec<usize>, table: Vec<Complex64> },
    /// One weight per amplitude index.
    Full(Vec<Complex64>),
}

/// Terms grouped by flip mask so each group costs one pass over the amplitudes.
#[derive(Debug, Clone)]
pub struct Observable {
    n: usize,
    offset: f64,
    diagonal: Option<Vec<f64>>,
    groups: Vec<(usize, Weights)>,
}

impl Observable {
    pub fn compile(h: &PauliHamiltonian) -> Self {
        if h.is_diagonal() && h.n_qubits <= MAX_QUBITS && h.terms.len() > 1 {
            return Self { n: h.n_qubits, offset: 0.0, diagonal: Some(diagonal_values(h)), groups: Vec::new() };
        }
        // (flip mask, [(coeff · i^{#Y}, sign mask)])
        let mut grouped: BTreeMap<usize, Vec<(Complex64, usize)>> = BTreeMap::new();
        for t in &h.terms {
            let phase = Complex64::i().powu(t.y_count() as u32);
            grouped.entry(t.flip_mask()).or_default().push((phase * t.coeff, t.phase_mask()));
        }
        let groups = grouped
            .into_iter()
            .map(|(flip, terms)| {
                let union = terms.iter().fold(0, |u, &(_, m)| u | m);
                let weights = if (union.count_ones() as usize) <= TABLE_BITS {
                    let positions: Vec<usize> = (0..usize::BITS as usize).filter(|b| union >> b & 1 == 1).collect();
                    let table = (0..1usize << positions.len())
                        .map(|pattern| {
                            let i = spread(pattern, &positions);
                            terms.iter().map(|&(c, m)| if (i & m).count_ones() % 2 == 0 { c } else { -c }).sum()
                        })
                        .collect();
                    Weights::Table { positions, table }
                } else {
                    Weights::Full(
                        (0..1usize << h.n_qubits)
                            .map(|i| terms.iter().map(|&(c, m)| if (i & m).count_ones() % 2 == 0 { c } else { -c }).sum())
                            .collect(),
                    )
                };
                (flip, weights)
            })
            .collect();
        Self { n: h.n_qubits, offset: h.offset, diagonal: None, groups }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn expectation(&self, state: &Statevector) -> f64 {
        assert!(self.n <= state.n, "observable acts on qubit {} of a {}-qubit state", self.n, state.n);
        let amps = &state.amps;
        if let Some(diag) = &self.diagonal {
            return amps.iter().zip(diag).map(|(a, d)| a.norm_sqr() * d).sum();
        }
        let mut total = self.offset;
        for (flip, weights) in &self.groups {
            let acc = match weights {
                Weights::Table { positions, table } => {
                    let mut sums = vec![ZERO; table.len()];
                    match positions[..] {
                        [] => sums[0] = amps.iter().enumerate().map(|(i, a)| amps[i ^ flip].conj() * a).sum(),
                        [b] => {
                            for (i, a) in amps.iter().enumerate() {
                                sums[i >> b & 1] += amps[i ^ flip].conj() * a;
                            }
                        }
                        [b0, b1] => {
                            for (i, a) in amps.iter().enumerate() {
                                sums[(i >> b0 & 1) | (i >> b1 & 1) << 1] += amps[i ^ flip].conj() * a;
                            }
                        }
                        _ => {
                            for (i, a) in amps.iter().enumerate() {
                                sums[gather(i, positions)] += amps[i ^ flip].conj() * a;
                            }
                        }
                    }
                    sums.iter().zip(table).map(|(s, w)| s * w).sum::<Complex64>()
                }
                Weights::Full(w) => amps.iter().zip(w).enumerate().map(|(i, (a, w))| amps[i ^ flip].conj() * a * w).sum(),
            };
            total += acc.re;
        }
        total
    }
}

/// Places bit `t` of `pattern` at `positions[t]`.
fn spread(pattern: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |i, (t, &b)| i | (pattern >> t & 1) << b)
}

/// Inverse of [`spread`].
fn gather(i: usize, positions: &[usize]) -> usize {
    positions.iter().enumerate().fold(0, |p, (t, &b)| p | (i >> b & 1) << t)
}

/// `⟨ψ|H|ψ⟩`, offset included, without materializing a matrix.
pub fn expectation(state: &Statevector, h: &PauliHamiltonian) -> f64 {
    Observable::compile(h).expectation(state)
}

/// Measures every qubit after rotating it by `to_computational[q]` (identity when `None`).
///
/// Returns counts per outcome index; deterministic for a fixed seed.
pub fn sample(
    state: &Statevector,
    to_computational: &[Option<Mat2>],
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<usize, usize>, SimError> {
    let mut rotated = state.clone();
    for (q, u) in to_computational.iter().enumerate() {
        if let Some(u) = u {
            rotated.apply_1q(q, u)?;
        }
    }
    let mut rng = seed::rng(seed);
    Ok(draw(&rotated.probabilities(), shots, &mut rng))
}

pub(crate) fn draw(probs: &[f64], shots: usize, rng: &mut impl Rng) -> BTreeMap<usize, usize> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut counts = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        let idx = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        *counts.entry(idx).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    /// `scale · params[slot]`
    Param { slot: usize, scale: f64 },
}

impl Angle {
    fn resolve(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(a) => a,
            Angle::Param { slot, scale } => scale * params[slot],
        }
    }

    fn param(slot: usize) -> Self {
        Angle::Param { slot, scale: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Rx,
    Ry,
    Rz,
    Rxx,
    H,
    Cx,
    Cz,
    /// `exp(-iγ C)` with `C` the circuit's cost diagonal.
    CostEvolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Op {
    pub gate: Gate,
    pub qubits: Vec<usize>,
    pub angle: Option<Angle>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<Op>,
    pub num_params: usize,
    pub cost_diagonal: Option<Arc<DiagonalLevels>>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new(), num_params: 0, cost_diagonal: None }
    }

    fn next_param(&mut self) -> Angle {
        self.num_params += 1;
        Angle::param(self.num_params - 1)
    }

    pub fn push(&mut self, gate: Gate, qubits: Vec<usize>, angle: Option<Angle>) {
        self.ops.push(Op { gate, qubits, angle });
    }

    /// Appends a rotation with a fresh parameter.
    pub fn rotate(&mut self, axis: Axis, q: usize) {
        let angle = self.next_param();
        let gate = match axis {
            Axis::X => Gate::Rx,
            Axis::Y => Gate::Ry,
            Axis::Z => Gate::Rz,
        };
        self.push(gate, vec![q], Some(angle));
    }

    pub fn run(&self, params: &[f64]) -> Result<Statevector, SimError> {
        let mut state = Statevector::new(self.n_qubits)?;
        self.apply(&mut state, params)?;
        Ok(state)
    }

    pub fn apply(&self, state: &mut Statevector, params: &[f64]) -> Result<(), SimError> {
        if params.len() != self.num_params {
            return Err(SimError::ParamCount { expected: self.num_params, got: params.len() });
        }
        for op in &self.ops {
            let theta = op.angle.map(|a| a.resolve(params)).unwrap_or(0.0);
            let q = &op.qubits;
            match op.gate {
                Gate::Rx => state.rx(q[0], theta)?,
                Gate::Ry => state.ry(q[0], theta)?,
                Gate::Rz => state.rz(q[0], theta)?,
                Gate::Rxx => state.rxx(q[0], q[1], theta)?,
                Gate::H => state.h(q[0])?,
                Gate::Cx => state.cx(q[0], q[1])?,
                Gate::Cz => state.cz(q[0], q[1])?,
                Gate::CostEvolution => {
                    let diag = self.cost_diagonal.as_ref().expect("cost evolution without a cost diagonal");
                    state.evolve_levels(diag, theta);
                }
            }
        }
        Ok(())
    }

    /// One gate per line, e.g. `RXX q0 q1 p4`.
    pub fn netlist(&self) -> String {
        let mut out = String::new();
        for op in &self.ops {
            let name = match op.gate {
                Gate::Rx => "RX",
                Gate::Ry => "RY",
                Gate::Rz => "RZ",
                Gate::Rxx => "RXX",
                Gate::H => "H",
                Gate::Cx => "CX",
                Gate::Cz => "CZ",
                Gate::CostEvolution => "COST",
            };
            out.push_str(name);
            for q in &op.qubits {
                write!(out, " q{q}").unwrap();
            }
            match op.angle {
                Some(Angle::Fixed(a)) => write!(out, " {a}").unwrap(),
                Some(Angle::Param { slot, scale }) if scale == 1.0 => write!(out, " p{slot}").unwrap(),
                Some(Angle::Param { slot, scale }) => write!(out, " {scale}*p{slot}").unwrap(),
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Brickwork,
    Su2,
    Pauli2design,
    Realamp,
    Qaoa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    Linear,
    Circular,
    Full,
}

impl Entanglement {
    pub const ALL: [Entanglement; 3] = [Entanglement::Linear, Entanglement::Circular, Entanglement::Full];

    pub fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Linear => (1..n).map(|q| (q - 1, q)).collect(),
            Entanglement::Circular => {
                let mut p: Vec<_> = (1..n).map(|q| (q - 1, q)).collect();
                if n > 2 {
                    p.push((n - 1, 0));
                }
                p
            }
            Entanglement::Full => (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Brickwork => "brickwork",
            Family::Su2 => "su2",
            Family::Pauli2design => "pauli2design",
            Family::Realamp => "realamp",
            Family::Qaoa => "qaoa",
        })
    }
}

impl fmt::Display for Entanglement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entanglement::Linear => "linear",
            Entanglement::Circular => "circular",
            Entanglement::Full => "full",
        })
    }
}

impl FromStr for Family {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        Ok(match s {
            "brickwork" => Family::Brickwork,
            "su2" => Family::Su2,
            "pauli2design" => Family::Pauli2design,
            "realamp" => Family::Realamp,
            "qaoa" => Family::Qaoa,
            other => return Err(SimError::Ansatz(format!("unknown family `{other}`"))),
        })
    }
}

impl FromStr for Entanglement {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        Ok(match s {
            "linear" => Entanglement::Linear,
            "circular" => Entanglement::Circular,
            "full" => Entanglement::Full,
            other => return Err(SimError::Ansatz(format!("unknown entanglement `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub family: Family,
    pub layers: usize,
    /// Ignored by brickwork and qaoa.
    pub entanglement: Entanglement,
    /// Axis draw for pauli2design.
    pub seed: u64,
}

impl AnsatzSpec {
    pub fn brickwork(layers: usize) -> Self {
        Self { family: Family::Brickwork, layers, entanglement: Entanglement::Linear, seed: 0 }
    }

    pub fn qaoa(layers: usize) -> Self {
        Self { family: Family::Qaoa, layers, entanglement: Entanglement::Linear, seed: 0 }
    }

    pub fn new(family: Family, layers: usize, entanglement: Entanglement) -> Self {
        Self { family, layers, entanglement, seed: 0 }
    }

    pub fn label(&self) -> String {
        match self.family {
            Family::Brickwork | Family::Qaoa => format!("{}/{}", self.family, self.layers),
            _ => format!("{}-{}/{}", self.family, self.entanglement, self.layers),
        }
    }
}

/// Builds the parameterized circuit; `cost` is required for qaoa and must be diagonal.
pub fn build_ansatz(spec: &AnsatzSpec, n: usize, cost: Option<&PauliHamiltonian>) -> Result<Circuit, SimError> {
    if n == 0 {
        return Err(SimError::Ansatz("an ansatz needs at least one qubit".into()));
    }
    check_capacity(n, MAX_QUBITS)?;
    let mut c = Circuit::new(n);
    match spec.family {
        Family::Brickwork => {
            for layer in 0..spec.layers {
                let axis = Axis::from_index(layer % 3);
                for q in 0..n {
                    c.rotate(axis, q);
                }
                let mut a = layer % 2;
                while a + 1 < n {
                    let angle = c.next_param();
                    c.push(Gate::Rxx, vec![a, a + 1], Some(angle));
                    a += 2;
                }
            }
        }
        Family::Su2 | Family::Realamp | Family::Pauli2design => {
            let mut axes_rng = seed::rng(spec.seed);
            let rotations: Vec<Axis> = match spec.family {
                Family::Su2 => vec![Axis::Y, Axis::Z],
                Family::Realamp => vec![Axis::Y],
                _ => Vec::new(),
            };
            let mut rotation_layer = |c: &mut Circuit| {
                for q in 0..n {
                    if rotations.is_empty() {
                        c.rotate(Axis::from_index(axes_rng.gen_range(0..3)), q);
                    } else {
                        for &axis in &rotations {
                            c.rotate(axis, q);
                        }
                    }
                }
            };
            if spec.family == Family::Pauli2design {
                for q in 0..n {
                    c.push(Gate::Ry, vec![q], Some(Angle::Fixed(std::f64::consts::FRAC_PI_4)));
                }
            }
            rotation_layer(&mut c);
            let gate = if spec.family == Family::Pauli2design { Gate::Cz } else { Gate::Cx };
            for _ in 0..spec.layers {
                for (a, b) in spec.entanglement.pairs(n) {
                    c.push(gate, vec![a, b], None);
                }
                rotation_layer(&mut c);
            }
        }
        Family::Qaoa => {
            let cost = cost.ok_or_else(|| SimError::Ansatz("qaoa needs a cost Hamiltonian".into()))?;
            if !cost.is_diagonal() {
                return Err(SimError::Ansatz("qaoa cost Hamiltonian must be diagonal".into()));
            }
            if cost.n_qubits != n {
                return Err(SimError::Ansatz(format!("cost acts on {} qubits, ansatz on {n}", cost.n_qubits)));
            }
            c.cost_diagonal = Some(Arc::new(DiagonalLevels::new(&diagonal_values(cost))));
            for q in 0..n {
                c.push(Gate::H, vec![q], None);
            }
            for _ in 0..spec.layers {
                let gamma = c.next_param();
                c.push(Gate::CostEvolution, Vec::new(), Some(gamma));
                let Angle::Param { slot, .. } = c.next_param() else { unreachable!() };
                for q in 0..n {
                    c.push(Gate::Rx, vec![q], Some(Angle::Param { slot, scale: 2.0 }));
                }
            }
        }
    }
    Ok(c)
}
