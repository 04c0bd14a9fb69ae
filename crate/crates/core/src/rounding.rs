//! From a relaxed quantum state back to classical bits.

use crate::encode::{Binarization, QubitLayout, QuboEncoding};
use crate::model::IntegerProgram;
use crate::presolve::Reduction;
use crate::qrac::{magic_bases, Mat2, QracState};
use num_complex::Complex64;
use crate::rational::Rational;
use crate::seed;
use crate::sim::{self, SimError, Statevector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

/// Expectations this close to zero count as ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pauli,
    Magic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    #[default]
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub shots: usize,
    pub seed: u64,
    pub tie_rule: TieRule,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self { shots: 1024, seed: 0, tie_rule: TieRule::Zero }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliRounding {
    /// One bit per spin.
    pub bits: Vec<u8>,
    /// `⟨P_i⟩` per spin.
    pub expectations: Vec<f64>,
}

/// Bit `i` is the sign of `⟨P_i⟩` on its slot: `0` if positive, `1` if negative.
pub fn pauli_round(state: &Statevector, layout: &QubitLayout, config: &RoundingConfig) -> PauliRounding {
    assert_eq!(state.n_qubits(), layout.qubit_count, "state and layout disagree on qubit count");
    let bloch = state.bloch_vectors();
    let mut rng = seed::rng(seed::derive(config.seed, "pauli-ties", 0));
    let expectations: Vec<f64> = layout.slots.iter().map(|s| bloch[s.qubit][s.axis.index()]).collect();
    let bits = expectations
        .iter()
        .map(|&e| {
            if e > TIE_TOL {
                0
            } else if e < -TIE_TOL {
                1
            } else {
                match config.tie_rule {
                    TieRule::Zero => 0,
                    TieRule::Random => rng.gen_range(0..2),
                }
            }
        })
        .collect();
    PauliRounding { bits, expectations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagicRounding {
    /// One decoded bitstring (over spins) per shot, in shot order.
    pub shots: Vec<Vec<u8>>,
    /// How often each of the four bases was drawn across all qubits and shots.
    pub basis_histogram: [usize; 4],
}

impl MagicRounding {
    /// Per-variable majority over shots (ties to 0).
    pub fn majority(&self) -> Vec<u8> {
        majority(&self.shots)
    }

    /// Most frequent whole bitstring (ties to the lexicographically smallest).
    pub fn joint_mode(&self) -> Vec<u8> {
        let mut counts: BTreeMap<&[u8], usize> = BTreeMap::new();
        for s in &self.shots {
            *counts.entry(s.as_slice()).or_insert(0) += 1;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        counts.into_iter().find(|(_, c)| *c == best).map(|(k, _)| k.to_vec()).unwrap_or_default()
    }
}

pub fn majority(shots: &[Vec<u8>]) -> Vec<u8> {
    let Some(first) = shots.first() else { return Vec::new() };
    (0..first.len())
        .map(|i| {
            let ones = shots.iter().filter(|s| s[i] == 1).count();
            u8::from(2 * ones > shots.len())
        })
        .collect()
}

/// Measures every qubit in a uniformly drawn magic basis per shot and decodes three bits per qubit.
///
/// Shots sharing a basis configuration are sampled from one rotated copy of the state.
pub fn magic_round(state: &Statevector, layout: &QubitLayout, config: &RoundingConfig) -> Result<MagicRounding, SimError> {
    let nq = layout.qubit_count;
    assert_eq!(state.n_qubits(), nq, "state and layout disagree on qubit count");
    let bases = magic_bases();
    let rotations: Vec<Mat2> = bases.iter().map(|b| b.to_computational()).collect();
    let occupancy = layout.occupancy();

    let mut draw = seed::rng(seed::derive(config.seed, "magic-bases", 0));
    let mut configs: BTreeMap<Vec<u8>, Vec<usize>> = BTreeMap::new();
    let mut histogram = [0usize; 4];
    for shot in 0..config.shots {
        let choice: Vec<u8> = (0..nq).map(|_| draw.gen_range(0..4u8)).collect();
        for &k in &choice {
            histogram[k as usize] += 1;
        }
        configs.entry(choice).or_default().push(shot);
    }

    let mut shots = vec![Vec::new(); config.shots];
    for (choice, members) in &configs {
        let us: Vec<Option<Mat2>> = choice.iter().map(|&k| Some(rotations[k as usize])).collect();
        let counts = sim::sample(state, &us, members.len(), seed::derive(config.seed, "magic-shot", members[0] as u64))?;
        let outcomes = counts.into_iter().flat_map(|(outcome, c)| std::iter::repeat_n(outcome, c));
        for (&shot, outcome) in members.iter().zip(outcomes) {
            let mut bits = vec![0u8; layout.num_spins()];
            for (q, slots) in occupancy.iter().enumerate() {
                let decoded = bases[choice[q] as usize].decode(((outcome >> q) & 1) as u8);
                for (axis, spin) in slots.iter().enumerate() {
                    if let Some(spin) = spin {
                        bits[*spin] = decoded[axis];
                    }
                }
            }
            shots[shot] = bits;
        }
    }
    Ok(MagicRounding { shots, basis_histogram: histogram })
}

/// Maps QUBO bitstrings back to assignments of the original program.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    pub original: IntegerProgram,
    pub binarization: Binarization,
    /// Present when the QUBO encodes a residual program of the binarized original.
    pub reduction: Option<Reduction>,
    pub encoding: QuboEncoding,
}

impl Decoder {
    /// Strips slack, undoes fixing and binarization.
    pub fn decode(&self, bits: &[u8]) -> Vec<i64> {
        let decision = self.encoding.decision_bits(bits);
        let binary = match &self.reduction {
            Some(r) => r.lift_solution(&decision),
            None => decision,
        };
        self.binarization.decode(&binary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Index of the winning candidate.
    pub index: usize,
    pub bits: Vec<u8>,
    /// Over the original program's variables.
    pub assignment: Vec<i64>,
    pub objective: Rational,
    pub feasible: bool,
    /// Penalized QUBO value of `bits` (maximize orientation).
    pub qubo_value: Rational,
}

/// Best feasible candidate by original objective, else the best penalized QUBO value (flagged
/// infeasible). Ties keep the earliest candidate.
pub fn select_best(candidates: &[Vec<u8>], decoder: &Decoder) -> Selection {
    assert!(!candidates.is_empty(), "select_best needs at least one candidate");
    let ip = &decoder.original;
    let mut seen: HashSet<&[u8]> = HashSet::new();
    let mut best_feasible: Option<Selection> = None;
    let mut best_penalized: Option<Selection> = None;
    for (index, bits) in candidates.iter().enumerate() {
        if !seen.insert(bits.as_slice()) {
            continue;
        }
        let assignment = decoder.decode(bits);
        let in_bounds = ip.variables.iter().zip(&assignment).all(|(v, &x)| x >= v.lower && x <= v.upper);
        let feasible = in_bounds && ip.evaluate(&assignment).map(|e| e.feasible).unwrap_or(false);
        let objective = ip.objective_value(&assignment);
        let qubo_value = decoder.encoding.qubo.value(bits);
        let candidate = Selection { index, bits: bits.clone(), assignment, objective, feasible, qubo_value };
        if feasible {
            if best_feasible.as_ref().is_none_or(|b| ip.sense.better(&candidate.objective, &b.objective)) {
                best_feasible = Some(candidate);
            }
        } else if best_feasible.is_none() && best_penalized.as_ref().is_none_or(|b| candidate.qubo_value > b.qubo_value) {
            best_penalized = Some(candidate);
        }
    }
    best_feasible.or(best_penalized).expect("at least one candidate was scored")
}

/// Product of single-qubit QRAC states encoding `x` under `layout`; empty slots encode 0.
pub fn qrac_product_state(layout: &QubitLayout, x: &[u8]) -> Result<Statevector, SimError> {
    assert_eq!(x.len(), layout.num_spins(), "bitstring length");
    let factors: Vec<[Complex64; 2]> = layout
        .occupancy()
        .iter()
        .map(|slots| {
            let bits: Vec<u8> = slots.iter().map(|s| s.map_or(0, |v| x[v])).collect();
            QracState::encode_partial(&bits).amplitudes
        })
        .collect();
    Statevector::product(&factors)
}
