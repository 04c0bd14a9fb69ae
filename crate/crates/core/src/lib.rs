//! Quantum-relaxation pipeline for constrained binary optimization.
//!
//! The crate turns a bounded integer program into a local quantum Hamiltonian and back:
//!
//! 1. [`model`] builds and evaluates integer programs (multiple knapsack, risk-aware procurement).
//! 2. [`presolve`] solves the LP relaxation with a two-phase simplex and fixes near-integral
//!    variables, producing a smaller residual program.
//! 3. [`encode`] binarizes, applies the quadratic penalty method, maps to Ising form, colors the
//!    instance graph largest-degree-first and packs up to three spins per qubit.
//! 4. [`sim`] and [`variational`] search for a high-energy state of the relaxed Hamiltonian on a
//!    dense statevector with a derivative-free trust-region optimizer.
//! 5. [`rounding`] recovers classical candidates with Pauli or magic rounding.
//!
//! [`oracle`] provides exact reference optima and [`harness`] wires everything into the
//! reproducible experiments.

pub mod encode;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod presolve;
pub mod qrac;
pub mod rational;
pub mod rounding;
pub mod seed;
pub mod sim;
pub mod variational;

pub use model::{IntegerProgram, LinearConstraint, Relation, Sense, Variable};
pub use pauli::{Axis, PauliHamiltonian, PauliTerm};
pub use rational::Rational;
