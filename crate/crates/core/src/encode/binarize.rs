use super::bit_width;
use crate::model::{IntegerProgram, LinearConstraint, Relation, Variable};
use crate::rational::{int, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How each source variable `v ∈ [lo, hi]` is written as `lo + Σ_k 2^k b_k`.
///
/// Decoding never clips: a bit pattern above `hi - lo` decodes to a value above `hi`, which the
/// binary program excludes through its `<name>_ub` constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binarization {
    /// `bits[v]`: `(binary id, weight)` pairs, least significant first.
    pub bits: Vec<Vec<(usize, i64)>>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub binary_vars: usize,
    /// Constant from nonzero lower bounds: original objective = binary objective + offset.
    #[serde(with = "crate::rational::serde_rational")]
    pub objective_offset: Rational,
}

impl Binarization {
    pub fn identity(n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| vec![(i, 1)]).collect(),
            lower: vec![0; n],
            upper: vec![1; n],
            binary_vars: n,
            objective_offset: Rational::zero(),
        }
    }

    pub fn source_vars(&self) -> usize {
        self.bits.len()
    }

    pub fn decode(&self, bits: &[i64]) -> Vec<i64> {
        self.bits
            .iter()
            .zip(&self.lower)
            .map(|(slots, lo)| lo + slots.iter().map(|&(b, w)| w * bits[b]).sum::<i64>())
            .collect()
    }

    /// Inverse of [`Binarization::decode`] for in-bound values.
    pub fn encode(&self, values: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.binary_vars];
        for ((slots, lo), v) in self.bits.iter().zip(&self.lower).zip(values) {
            let shifted = v - lo;
            for &(b, w) in slots {
                out[b] = (shifted / w) & 1;
            }
        }
        out
    }
}

/// Replaces each integer variable by `⌈log2(hi - lo + 1)⌉` weighted bits.
///
/// Binary variables pass through as a single bit. When `2^k - 1 > hi - lo` an extra
/// `Σ 2^k b_k ≤ hi - lo` row (named `<name>_ub`) is appended after the original constraints.
pub fn binarize(ip: &IntegerProgram) -> (IntegerProgram, Binarization) {
    let mut variables = Vec::new();
    let mut bits = Vec::with_capacity(ip.num_vars());
    let mut bound_rows = Vec::new();
    for v in &ip.variables {
        let range = (v.upper - v.lower) as u64;
        if v.is_binary() {
            let id = variables.len();
            variables.push(Variable::binary(id, v.name.clone()));
            bits.push(vec![(id, 1)]);
            continue;
        }
        // A fixed-value variable still gets one bit (pinned by its bound row) so no row empties.
        let width = bit_width(range).max(1);
        let slots: Vec<(usize, i64)> = (0..width)
            .map(|k| {
                let id = variables.len();
                variables.push(Variable::binary(id, format!("{}#b{k}", v.name)));
                (id, 1i64 << k)
            })
            .collect();
        if (1u64 << width) - 1 > range {
            bound_rows.push(LinearConstraint::new(
                format!("{}_ub", v.name),
                slots.iter().map(|&(b, w)| (b, int(w))),
                Relation::Le,
                int(range as i64),
            ));
        }
        bits.push(slots);
    }
    let lower: Vec<i64> = ip.variables.iter().map(|v| v.lower).collect();

    let expand = |coeffs: &BTreeMap<usize, Rational>| -> (Vec<(usize, Rational)>, Rational) {
        let mut constant = Rational::zero();
        let mut terms = Vec::new();
        for (&id, c) in coeffs {
            constant += c * int(lower[id]);
            terms.extend(bits[id].iter().map(|&(b, w)| (b, c * int(w))));
        }
        (terms, constant)
    };

    let (obj_terms, objective_offset) = expand(&ip.objective);
    let mut constraints: Vec<LinearConstraint> = ip
        .constraints
        .iter()
        .map(|c| {
            let (terms, constant) = expand(&c.coeffs);
            LinearConstraint::new(c.name.clone(), terms, c.relation, c.rhs - constant)
        })
        .collect();
    constraints.extend(bound_rows);

    let binary_vars = variables.len();
    let program = IntegerProgram::new(ip.sense, obj_terms.into_iter().collect(), constraints, variables)
        .expect("binarized program is well formed");
    let map = Binarization {
        bits,
        lower,
        upper: ip.variables.iter().map(|v| v.upper).collect(),
        binary_vars,
        objective_offset,
    };
    (program, map)
}
