use super::{bit_width, EncodeError};
use crate::model::{IntegerProgram, Relation, Sense};
use crate::rational::{self, denominator_lcm, int, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `constant + Σ linear_i x_i + Σ_{i<j} quadratic_ij x_i x_j`, always to be maximized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    pub n: usize,
    pub linear: BTreeMap<usize, Rational>,
    pub quadratic: BTreeMap<(usize, usize), Rational>,
    pub constant: Rational,
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, value: Rational) {
    if value.is_zero() {
        return;
    }
    *map.entry(key).or_insert_with(Rational::zero) += value;
}

fn prune<K: Ord + Clone>(map: &mut BTreeMap<K, Rational>) {
    map.retain(|_, v| !v.is_zero());
}

impl Qubo {
    pub fn new(n: usize) -> Self {
        Self { n, ..Default::default() }
    }

    pub fn add_linear(&mut self, i: usize, value: Rational) {
        accumulate(&mut self.linear, i, value);
    }

    /// Adds `value · x_i x_j`; `i == j` folds into the linear part since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: Rational) {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => self.add_linear(i, value),
            std::cmp::Ordering::Less => accumulate(&mut self.quadratic, (i, j), value),
            std::cmp::Ordering::Greater => accumulate(&mut self.quadratic, (j, i), value),
        }
    }

    fn prune(&mut self) {
        prune(&mut self.linear);
        prune(&mut self.quadratic);
    }

    pub fn value(&self, x: &[u8]) -> Rational {
        let lin: Rational = self.linear.iter().filter(|(&i, _)| x[i] == 1).map(|(_, v)| *v).sum();
        let quad: Rational = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] == 1 && x[j] == 1)
            .map(|(_, v)| *v)
            .sum();
        self.constant + lin + quad
    }

    pub fn value_f64(&self, x: &[u8]) -> f64 {
        rational::to_f64(&self.value(x))
    }
}

/// Ising form over spins `s_i = (-1)^{x_i}`: `offset + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IsingHamiltonian {
    pub n: usize,
    pub h: BTreeMap<usize, Rational>,
    pub j: BTreeMap<(usize, usize), Rational>,
    pub offset: Rational,
}

impl IsingHamiltonian {
    pub fn value(&self, spins: &[i8]) -> Rational {
        let s = |i: usize| int(spins[i] as i64);
        let field: Rational = self.h.iter().map(|(&i, v)| v * s(i)).sum();
        let coupling: Rational = self.j.iter().map(|(&(a, b), v)| v * s(a) * s(b)).sum();
        self.offset + field + coupling
    }

    pub fn value_of_bits(&self, x: &[u8]) -> Rational {
        let spins: Vec<i8> = x.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect();
        self.value(&spins)
    }
}

/// Exact substitution `x = (1 - s) / 2`.
pub fn to_ising(q: &Qubo) -> IsingHamiltonian {
    let half = rational::ratio(1, 2);
    let quarter = rational::ratio(1, 4);
    let mut ising = IsingHamiltonian { n: q.n, offset: q.constant, ..Default::default() };
    for (&i, a) in &q.linear {
        ising.offset += a * half;
        accumulate(&mut ising.h, i, -(a * half));
    }
    for (&(i, j), b) in &q.quadratic {
        ising.offset += b * quarter;
        accumulate(&mut ising.h, i, -(b * quarter));
        accumulate(&mut ising.h, j, -(b * quarter));
        accumulate(&mut ising.j, (i, j), b * quarter);
    }
    prune(&mut ising.h);
    prune(&mut ising.j);
    ising
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Penalty {
    /// `1 + Σ |objective coefficients|`.
    #[default]
    Auto,
    #[serde(with = "crate::rational::serde_rational")]
    Fixed(Rational),
}

/// Slack bits of one inequality: `slack = Σ_k 2^k x_{first + k}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackBlock {
    pub constraint: usize,
    pub first: usize,
    pub bits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboEncoding {
    pub qubo: Qubo,
    /// Variables `0..decision_vars` are the program's own; slack bits follow.
    pub decision_vars: usize,
    pub slack: Vec<SlackBlock>,
    /// Constraints that hold on every point of the box and contribute no penalty.
    pub redundant: Vec<usize>,
    pub penalty: Rational,
    pub sense: Sense,
}

impl QuboEncoding {
    pub fn num_vars(&self) -> usize {
        self.qubo.n
    }

    /// Program objective recovered from a QUBO value of a constraint-satisfying point.
    pub fn objective_from_qubo(&self, value: &Rational) -> Rational {
        value * int(self.sense.sign())
    }

    pub fn decision_bits(&self, x: &[u8]) -> Vec<i64> {
        x[..self.decision_vars].iter().map(|&b| b as i64).collect()
    }

    /// Completes a decision assignment with the slack bits that zero every satisfied row.
    ///
    /// Rows that are violated get slack 0.
    pub fn complete_slack(&self, ip: &IntegerProgram, decision: &[i64]) -> Vec<u8> {
        let mut x: Vec<u8> = decision.iter().map(|&v| v as u8).collect();
        x.resize(self.qubo.n, 0);
        for block in &self.slack {
            let (coeffs, rhs) = integral_row(ip, block.constraint);
            let lhs: i128 = coeffs.iter().map(|(&id, a)| a * decision[id] as i128).sum();
            let slack = (rhs - lhs).max(0);
            for k in 0..block.bits {
                x[block.first + k] = ((slack >> k) & 1) as u8;
            }
        }
        x
    }
}

/// Row scaled to integer coefficients and normalized to `Σ a x ≤ rhs` (or `=`), integer rhs.
///
/// Returns `None` for the rhs of an equality that no integer point can meet.
fn integral_row_checked(ip: &IntegerProgram, index: usize) -> (BTreeMap<usize, i128>, Option<i128>) {
    let c = &ip.constraints[index];
    let scale = Rational::from_integer(denominator_lcm(c.coeffs.values()));
    let sign = if c.relation == Relation::Ge { -1 } else { 1 };
    let coeffs = c
        .coeffs
        .iter()
        .map(|(&id, a)| (id, (a * scale).to_integer() * sign))
        .collect();
    let rhs = c.rhs * scale * Rational::from_integer(sign);
    let rhs = match c.relation {
        Relation::Eq => rhs.is_integer().then(|| rhs.to_integer()),
        _ => Some(rhs.floor().to_integer()),
    };
    (coeffs, rhs)
}

fn integral_row(ip: &IntegerProgram, index: usize) -> (BTreeMap<usize, i128>, i128) {
    let (coeffs, rhs) = integral_row_checked(ip, index);
    (coeffs, rhs.expect("row encoded earlier"))
}

/// Quadratic penalty encoding of a binary program.
///
/// Every row is scaled to integer coefficients; `≥` rows are negated into `≤` rows; inequalities
/// gain binary-expanded slack `s ∈ [0, rhs - min lhs]`; each resulting equality `g = 0` adds
/// `-M·g²`. The objective is sign-normalized so the QUBO is always maximized.
pub fn to_qubo(ip: &IntegerProgram, penalty: Penalty) -> Result<QuboEncoding, EncodeError> {
    if let Some(v) = ip.variables.iter().find(|v| !v.is_binary()) {
        return Err(EncodeError::NotBinary { name: v.name.clone() });
    }
    let sign = int(ip.sense.sign());
    let m = match penalty {
        Penalty::Auto => int(1) + ip.objective.values().map(|c| c.abs()).sum::<Rational>(),
        Penalty::Fixed(m) => m,
    };
    let n = ip.num_vars();
    let mut qubo = Qubo::new(n);
    for (&i, c) in &ip.objective {
        qubo.add_linear(i, c * sign);
    }

    let mut slack = Vec::new();
    let mut redundant = Vec::new();
    let mut next = n;
    for (index, c) in ip.constraints.iter().enumerate() {
        let infeasible = || EncodeError::InfeasibleOverBox { index, name: c.name.clone() };
        let (coeffs, rhs) = integral_row_checked(ip, index);
        let rhs = rhs.ok_or_else(infeasible)?;
        let min_lhs: i128 = coeffs.values().filter(|a| **a < 0).sum();
        let max_lhs: i128 = coeffs.values().filter(|a| **a > 0).sum();
        let mut terms: Vec<(usize, i128)> = coeffs.into_iter().collect();
        match c.relation {
            Relation::Eq => {
                if rhs < min_lhs || rhs > max_lhs {
                    return Err(infeasible());
                }
            }
            Relation::Le | Relation::Ge => {
                if max_lhs <= rhs {
                    redundant.push(index);
                    continue;
                }
                if min_lhs > rhs {
                    return Err(infeasible());
                }
                let bits = bit_width((rhs - min_lhs) as u64);
                terms.extend((0..bits).map(|k| (next + k, 1i128 << k)));
                slack.push(SlackBlock { constraint: index, first: next, bits });
                next += bits;
            }
        }
        qubo.n = next;
        // -M (Σ a_v z_v - rhs)^2 with z_v^2 = z_v.
        for (a, &(u, au)) in terms.iter().enumerate() {
            let au = Rational::from_integer(au);
            qubo.add_linear(u, -m * (au * au - int(2) * Rational::from_integer(rhs) * au));
            for &(v, av) in &terms[a + 1..] {
                qubo.add_quadratic(u, v, -m * int(2) * au * Rational::from_integer(av));
            }
        }
        qubo.constant -= m * Rational::from_integer(rhs * rhs);
    }
    qubo.n = next;
    qubo.prune();
    Ok(QuboEncoding { qubo, decision_vars: n, slack, redundant, penalty: m, sense: ip.sense })
}
