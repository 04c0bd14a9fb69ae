use super::{EncodeError, IsingHamiltonian, QubitLayout};
use crate::pauli::{Axis, PauliHamiltonian, PauliTerm};
use crate::rational::to_f64;

/// Relaxed Hamiltonian: `s_i → √3·P_i`, `s_i s_j → 3·P_i P_j` with `P_i` the spin's slot Pauli.
///
/// QRAC product states of any bitstring reproduce the Ising value exactly as an expectation, so the
/// maximum eigenvalue upper-bounds the classical optimum.
pub fn relax_hamiltonian(ising: &IsingHamiltonian, layout: &QubitLayout) -> Result<PauliHamiltonian, EncodeError> {
    if layout.num_spins() != ising.n {
        return Err(EncodeError::LayoutSize { layout: layout.num_spins(), ising: ising.n });
    }
    let sqrt3 = 3f64.sqrt();
    let slot = |i: usize| (layout.slots[i].qubit, layout.slots[i].axis);
    let mut terms = Vec::with_capacity(ising.h.len() + ising.j.len());
    for (&i, h) in &ising.h {
        terms.push(PauliTerm::new(sqrt3 * to_f64(h), vec![slot(i)]));
    }
    for (&(a, b), j) in &ising.j {
        let (qa, qb) = (slot(a), slot(b));
        if qa.0 == qb.0 {
            return Err(EncodeError::SharedQubit { a, b, qubit: qa.0 });
        }
        terms.push(PauliTerm::new(3.0 * to_f64(j), vec![qa, qb]));
    }
    Ok(PauliHamiltonian::new(layout.qubit_count, terms, to_f64(&ising.offset)))
}

/// One qubit per spin, `Z` axis, unscaled coefficients; the computational basis diagonalizes it.
pub fn diagonal_hamiltonian(ising: &IsingHamiltonian) -> PauliHamiltonian {
    let terms = ising
        .h
        .iter()
        .map(|(&i, h)| PauliTerm::new(to_f64(h), vec![(i, Axis::Z)]))
        .chain(
            ising
                .j
                .iter()
                .map(|(&(a, b), j)| PauliTerm::new(to_f64(j), vec![(a, Axis::Z), (b, Axis::Z)])),
        )
        .collect();
    PauliHamiltonian::new(ising.n, terms, to_f64(&ising.offset))
}
