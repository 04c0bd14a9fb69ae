//! Weighted sums of Pauli strings.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        })
    }
}

/// `coeff · ⊗_{(q, a) ∈ ops} a_q`; `ops` is sorted by qubit and holds each qubit at most once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, mut ops: Vec<(usize, Axis)>) -> Self {
        ops.sort();
        debug_assert!(ops.windows(2).all(|w| w[0].0 != w[1].0), "repeated qubit in Pauli string");
        Self { coeff, ops }
    }

    /// Bit mask of qubits carrying X or Y (the amplitude-index flip).
    pub fn flip_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, a)| *a != Axis::Z)
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    /// Bit mask of qubits carrying Y or Z (the sign pattern).
    pub fn phase_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, a)| *a != Axis::X)
            .fold(0, |m, (q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> usize {
        self.ops.iter().filter(|(_, a)| *a == Axis::Y).count()
    }

    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|(_, a)| *a == Axis::Z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub n_qubits: usize,
    pub terms: Vec<PauliTerm>,
    pub offset: f64,
}

impl PauliHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>, offset: f64) -> Self {
        let mut h = Self { n_qubits, terms, offset };
        h.canonicalize();
        h
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new(), offset: 0.0 }
    }

    /// Merges repeated strings, drops zero weights and sorts by qubit indices then axes.
    pub fn canonicalize(&mut self) {
        let mut merged: BTreeMap<Vec<(usize, Axis)>, f64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            if t.ops.is_empty() {
                self.offset += t.coeff;
            } else {
                *merged.entry(t.ops).or_insert(0.0) += t.coeff;
            }
        }
        let mut terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(ops, coeff)| PauliTerm { coeff, ops })
            .collect();
        terms.sort_by(|a, b| {
            let qa: Vec<usize> = a.ops.iter().map(|o| o.0).collect();
            let qb: Vec<usize> = b.ops.iter().map(|o| o.0).collect();
            qa.cmp(&qb).then_with(|| a.ops.cmp(&b.ops))
        });
        self.terms = terms;
    }

    pub fn max_locality(&self) -> usize {
        self.terms.iter().map(|t| t.ops.len()).max().unwrap_or(0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_diagonal)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliTerm { coeff: t.coeff * factor, ops: t.ops.clone() })
                .collect(),
            offset: self.offset * factor,
        }
    }

    /// Stable text form: one `coeff axis@qubit [axis@qubit]` line per term, then `offset <value>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            write!(out, "{}", t.coeff).unwrap();
            for (q, a) in &t.ops {
                write!(out, " {a}@{q}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "offset {}", self.offset).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_merges_and_sorts() {
        let h = PauliHamiltonian::new(
            3,
            vec![
                PauliTerm::new(1.0, vec![(2, Axis::Z)]),
                PauliTerm::new(0.5, vec![(1, Axis::X), (0, Axis::Y)]),
                PauliTerm::new(2.0, vec![(0, Axis::X)]),
                PauliTerm::new(-1.0, vec![(2, Axis::Z)]),
                PauliTerm::new(1.5, vec![]),
            ],
            0.25,
        );
        assert_eq!(h.dump(), "2 X@0\n0.5 Y@0 X@1\noffset 1.75\n");
        assert_eq!(h.max_locality(), 2);
    }

    #[test]
    fn masks() {
        let t = PauliTerm::new(1.0, vec![(0, Axis::X), (1, Axis::Y), (3, Axis::Z)]);
        assert_eq!(t.flip_mask(), 0b0011);
        assert_eq!(t.phase_mask(), 0b1010);
        assert_eq!(t.y_count(), 1);
        assert!(!t.is_diagonal());
    }
}
