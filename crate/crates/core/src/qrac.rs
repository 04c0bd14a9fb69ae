//! The (3,1)-quantum random access code: three bits in one qubit.
//!
//! `ρ(x1,x2,x3) = (I + ((-1)^x1 X + (-1)^x2 Y + (-1)^x3 Z)/√3) / 2`, decoded bit-by-bit with the
//! X, Y and Z projective measurements, each succeeding with probability `1/2 + 1/(2√3)`.

use crate::pauli::Axis;
use num_complex::Complex64;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Success probability of decoding any single encoded bit.
pub fn decode_success() -> f64 {
    0.5 + 0.5 / 3f64.sqrt()
}

/// `(cos θ̃, sin θ̃)` with `cos² θ̃ = 1/2 + 1/(2√3)`.
fn half_angle() -> (f64, f64) {
    let c2 = decode_success();
    (c2.sqrt(), (1.0 - c2).sqrt())
}

pub fn pauli_matrix(axis: Axis) -> Mat2 {
    match axis {
        Axis::X => [[ZERO, ONE], [ONE, ZERO]],
        Axis::Y => [[ZERO, -I], [I, ZERO]],
        Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
    }
}

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn maximally_mixed() -> Mat2 {
    let h = Complex64::new(0.5, 0.0);
    [[h, ZERO], [ZERO, h]]
}

pub fn outer(a: &[Complex64; 2], b: &[Complex64; 2]) -> Mat2 {
    [[a[0] * b[0].conj(), a[0] * b[1].conj()], [a[1] * b[0].conj(), a[1] * b[1].conj()]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

/// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a density matrix.
pub fn bloch_of(rho: &Mat2) -> [f64; 3] {
    Axis::ALL.map(|a| trace(&mat_mul(&pauli_matrix(a), rho)).re)
}

/// One encoded qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QracState {
    pub bits: [u8; 3],
    /// `|0⟩` amplitude real and nonnegative.
    pub amplitudes: [Complex64; 2],
}

impl QracState {
    pub fn encode(bits: [u8; 3]) -> Self {
        let (c, s) = half_angle();
        let angle = match (bits[0] & 1, bits[1] & 1) {
            (0, 0) => 0.25,
            (0, _) => -0.25,
            (_, 0) => 0.75,
            _ => -0.75,
        } * std::f64::consts::PI;
        let phase = Complex64::from_polar(1.0, angle);
        let (a0, a1) = if bits[2] & 1 == 0 { (c, s) } else { (s, c) };
        Self { bits, amplitudes: [Complex64::new(a0, 0.0), phase * a1] }
    }

    /// Encodes up to three bits; missing trailing bits are 0.
    pub fn encode_partial(bits: &[u8]) -> Self {
        assert!(bits.len() <= 3, "a (3,1) code holds at most three bits");
        let mut full = [0u8; 3];
        full[..bits.len()].copy_from_slice(bits);
        Self::encode(full)
    }

    pub fn density(&self) -> Mat2 {
        outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn bloch(&self) -> [f64; 3] {
        bloch_of(&self.density())
    }

    /// Density from the Bloch form directly, independent of the amplitude table.
    pub fn density_from_bits(bits: [u8; 3]) -> Mat2 {
        let r = 1.0 / 3f64.sqrt();
        let mut rho = identity();
        for axis in Axis::ALL {
            let sign = if bits[axis.index()] & 1 == 0 { r } else { -r };
            let p = pauli_matrix(axis);
            for (row, prow) in rho.iter_mut().zip(&p) {
                for (v, pv) in row.iter_mut().zip(prow) {
                    *v += pv * sign;
                }
            }
        }
        rho.map(|row| row.map(|v| v * 0.5))
    }
}

/// All eight encodings in bit order `x1 x2 x3` (x1 most significant).
pub fn all_states() -> Vec<QracState> {
    (0..8u8).map(|k| QracState::encode([(k >> 2) & 1, (k >> 1) & 1, k & 1])).collect()
}

/// Two-outcome projective measurement along one Pauli axis; effect `b` projects onto the
/// `(-1)^b` eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Povm {
    pub axis: Axis,
    pub effects: [Mat2; 2],
}

impl Povm {
    pub fn new(axis: Axis) -> Self {
        let p = pauli_matrix(axis);
        let id = identity();
        let effect = |sign: f64| {
            let mut m = [[ZERO; 2]; 2];
            for r in 0..2 {
                for c in 0..2 {
                    m[r][c] = (id[r][c] + p[r][c] * sign) * 0.5;
                }
            }
            m
        };
        Self { axis, effects: [effect(1.0), effect(-1.0)] }
    }
}

/// `Tr(E^axis_bit ρ)`.
pub fn decode_probability(rho: &Mat2, axis: Axis, bit: u8) -> f64 {
    let povm = Povm::new(axis);
    trace(&mat_mul(&povm.effects[(bit & 1) as usize], rho)).re
}

/// Orthonormal basis `{ψ(label), ψ(¬label)}`; outcome 0 decodes to `label`, outcome 1 to its
/// complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicBasis {
    pub label: [u8; 3],
    pub vectors: [[Complex64; 2]; 2],
}

impl MagicBasis {
    pub fn decode(&self, outcome: u8) -> [u8; 3] {
        if outcome & 1 == 0 {
            self.label
        } else {
            self.label.map(|b| 1 - b)
        }
    }

    /// Unitary taking the basis onto the computational basis (rows are the conjugated vectors).
    pub fn to_computational(&self) -> Mat2 {
        self.vectors.map(|v| v.map(|a| a.conj()))
    }
}

/// The four antipodal pairs of QRAC states, labels `000, 001, 010, 011`.
pub fn magic_bases() -> [MagicBasis; 4] {
    std::array::from_fn(|k| {
        let label = [0, ((k >> 1) & 1) as u8, (k & 1) as u8];
        let complement = label.map(|b| 1 - b);
        MagicBasis {
            label,
            vectors: [QracState::encode(label).amplitudes, QracState::encode(complement).amplitudes],
        }
    })
}
