//! From integer programs to quantum Hamiltonians.
//!
//! The chain is `binarize → to_qubo → to_ising → build_instance_graph → color_ldf →
//! assign_qubits → relax_hamiltonian`, with [`diagonal_hamiltonian`] as the one-spin-per-qubit
//! alternative used by QAOA.

mod binarize;
mod graph;
mod hamiltonian;
mod qubo;

pub use binarize::{binarize, Binarization};
pub use graph::{assign_qubits, build_instance_graph, color_ldf, InstanceGraph, QubitLayout, Slot};
pub use hamiltonian::{diagonal_hamiltonian, relax_hamiltonian};
pub use qubo::{to_ising, to_qubo, IsingHamiltonian, Penalty, Qubo, QuboEncoding, SlackBlock};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("variable `{name}` is not binary; binarize the program first")]
    NotBinary { name: String },
    #[error("constraint {index} (`{name}`) cannot be satisfied by any point of the variable box")]
    InfeasibleOverBox { index: usize, name: String },
    #[error("spins {a} and {b} are coupled but share qubit {qubit}")]
    SharedQubit { a: usize, b: usize, qubit: usize },
    #[error("layout covers {layout} spins but the Ising model has {ising}")]
    LayoutSize { layout: usize, ising: usize },
}

/// Number of bits needed to represent every integer in `0..=upper`.
pub fn bit_width(upper: u64) -> usize {
    (u64::BITS - upper.leading_zeros()) as usize
}
