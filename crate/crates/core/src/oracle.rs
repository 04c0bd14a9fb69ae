//! Exact reference optima: exhaustive enumeration and LP-based branch-and-bound.

use crate::model::{IntegerProgram, Relation, Sense};
use crate::presolve::{solve_lp, LpStatus, PresolveError};
use crate::rational::{denominator_lcm, to_f64, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest enumeration (`log2` of the box size) the brute-force mode accepts.
pub const MAX_BRUTE_BITS: u32 = 28;
/// `Auto` enumerates boxes up to this size and branches above it.
pub const AUTO_BRUTE_BITS: u32 = 22;
pub const RESTART_INTERVAL: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("box has 2^{bits:.1} points; brute force is limited to 2^{MAX_BRUTE_BITS}")]
    TooLarge { bits: f64 },
    #[error(transparent)]
    Lp(#[from] PresolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Auto,
    Brute,
    Bnb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    /// Node budget exhausted before the search closed.
    Unsolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub optimum: Option<Rational>,
    pub argmax: Option<Vec<i64>>,
    pub nodes_explored: u64,
    pub method: OracleMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub method: OracleMethod,
    pub node_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { method: OracleMethod::Auto, node_budget: 2_000_000 }
    }
}

fn box_bits(ip: &IntegerProgram) -> f64 {
    ip.variables.iter().map(|v| ((v.upper - v.lower + 1) as f64).log2()).sum()
}

pub fn solve_exact(ip: &IntegerProgram, config: &OracleConfig) -> Result<OracleResult, OracleError> {
    let bits = box_bits(ip);
    match config.method {
        OracleMethod::Brute => brute(ip),
        OracleMethod::Bnb => bnb(ip, config.node_budget),
        OracleMethod::Auto if bits <= AUTO_BRUTE_BITS as f64 => brute(ip),
        OracleMethod::Auto => bnb(ip, config.node_budget),
    }
}

/// A row scaled to integers: `Σ a_j x_j (rel) b`.
struct IntRow {
    relation: Relation,
    rhs: i128,
}

/// Reflected mixed-radix Gray enumeration: each step moves one variable by ±1 and updates only the
/// rows touching it.
fn brute(ip: &IntegerProgram) -> Result<OracleResult, OracleError> {
    let bits = box_bits(ip);
    if bits > MAX_BRUTE_BITS as f64 {
        return Err(OracleError::TooLarge { bits });
    }
    let n = ip.num_vars();
    let lower: Vec<i64> = ip.variables.iter().map(|v| v.lower).collect();
    let span: Vec<i64> = ip.variables.iter().map(|v| v.upper - v.lower).collect();

    let mut rows = Vec::with_capacity(ip.constraints.len());
    let mut columns: Vec<Vec<(usize, i128)>> = vec![Vec::new(); n];
    let mut lhs = Vec::with_capacity(ip.constraints.len());
    for (r, c) in ip.constraints.iter().enumerate() {
        let lr = Rational::from_integer(denominator_lcm(c.coeffs.values().chain([&c.rhs])));
        let mut value = 0i128;
        for (&j, a) in &c.coeffs {
            let a = (a * lr).to_integer();
            columns[j].push((r, a));
            value += a * lower[j] as i128;
        }
        rows.push(IntRow { relation: c.relation, rhs: (c.rhs * lr).to_integer() });
        lhs.push(value);
    }
    let holds = |row: &IntRow, v: i128| match row.relation {
        Relation::Le => v <= row.rhs,
        Relation::Ge => v >= row.rhs,
        Relation::Eq => v == row.rhs,
    };
    let mut violated = rows.iter().zip(&lhs).filter(|(row, &v)| !holds(row, v)).count();

    let ol = Rational::from_integer(denominator_lcm(ip.objective.values()));
    let mut obj_coeff = vec![0i128; n];
    for (&j, c) in &ip.objective {
        obj_coeff[j] = (c * ol).to_integer();
    }
    let sign = ip.sense.sign() as i128;
    let mut obj: i128 = (0..n).map(|j| obj_coeff[j] * lower[j] as i128).sum();

    let mut x = lower.clone();
    let mut dir = vec![1i64; n];
    let mut best: Option<(i128, Vec<i64>)> = None;
    let mut nodes = 0u64;
    loop {
        nodes += 1;
        if violated == 0 && best.as_ref().is_none_or(|(b, _)| sign * obj > sign * *b) {
            best = Some((obj, x.clone()));
        }
        let Some(j) = (0..n).find(|&j| {
            let next = x[j] - lower[j] + dir[j];
            (0..=span[j]).contains(&next)
        }) else {
            break;
        };
        for d in dir.iter_mut().take(j) {
            *d = -*d;
        }
        let step = dir[j];
        x[j] += step;
        obj += obj_coeff[j] * step as i128;
        for &(r, a) in &columns[j] {
            let before = holds(&rows[r], lhs[r]);
            lhs[r] += a * step as i128;
            let after = holds(&rows[r], lhs[r]);
            match (before, after) {
                (true, false) => violated += 1,
                (false, true) => violated -= 1,
                _ => {}
            }
        }
    }
    Ok(finish(ip, best.map(|(_, x)| x), nodes, OracleMethod::Brute, false))
}

fn finish(ip: &IntegerProgram, best: Option<Vec<i64>>, nodes: u64, method: OracleMethod, unsolved: bool) -> OracleResult {
    let status = if unsolved {
        OracleStatus::Unsolved
    } else if best.is_some() {
        OracleStatus::Optimal
    } else {
        OracleStatus::Infeasible
    };
    let optimum = (!unsolved).then(|| best.as_ref().map(|x| ip.objective_value(x))).flatten();
    OracleResult { status, optimum, argmax: if unsolved { None } else { best }, nodes_explored: nodes, method }
}

struct Node {
    lower: Vec<i64>,
    upper: Vec<i64>,
    /// Parent LP bound in maximize orientation.
    bound: f64,
}

/// Depth-first branch-and-bound on the most fractional LP variable; the open list is re-sorted by
/// bound every [`RESTART_INTERVAL`] nodes.
fn bnb(ip: &IntegerProgram, budget: u64) -> Result<OracleResult, OracleError> {
    let sign = ip.sense.sign() as f64;
    let integral_objective = ip.objective.values().all(|c| c.is_integer());
    let mut incumbent: Option<(Rational, Vec<i64>)> = None;
    let mut stack = vec![Node {
        lower: ip.variables.iter().map(|v| v.lower).collect(),
        upper: ip.variables.iter().map(|v| v.upper).collect(),
        bound: f64::INFINITY,
    }];
    let mut nodes = 0u64;
    while let Some(node) = stack.pop() {
        if nodes >= budget {
            return Ok(finish(ip, None, nodes, OracleMethod::Bnb, true));
        }
        nodes += 1;
        if nodes % RESTART_INTERVAL == 0 {
            // Best bound last so it pops first.
            stack.push(node);
            stack.sort_by(|a, b| a.bound.total_cmp(&b.bound));
            continue;
        }
        let relaxed = ip.with_bounds(&node.lower, &node.upper);
        let lp = solve_lp(&relaxed)?;
        if lp.status != LpStatus::Optimal {
            continue;
        }
        let bound = sign * lp.objective;
        debug_assert!(bound <= node.bound + 1e-6, "child LP bound exceeds its parent's");
        let prune_at = if integral_objective { (bound + 1e-6).floor() } else { bound };
        if let Some((best, _)) = &incumbent {
            if prune_at <= sign * to_f64(best) + 1e-9 {
                continue;
            }
        }
        let fractional = lp
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| (j, (v - v.round()).abs()))
            .filter(|&(_, f)| f > 1e-6)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match fractional {
            None => {
                let x: Vec<i64> = lp.values.iter().map(|v| v.round() as i64).collect();
                let eval = ip.evaluate(&x).expect("rounded LP point lies in the box");
                if eval.feasible && incumbent.as_ref().is_none_or(|(b, _)| ip.sense.better(&eval.objective, b)) {
                    incumbent = Some((eval.objective, x));
                }
            }
            Some((j, _)) => {
                let v = lp.values[j];
                let mut down = Node { lower: node.lower.clone(), upper: node.upper.clone(), bound };
                down.upper[j] = v.floor() as i64;
                let mut up = Node { lower: node.lower, upper: node.upper, bound };
                up.lower[j] = v.ceil() as i64;
                // Explore the side the LP leans towards first.
                if v - v.floor() >= 0.5 {
                    stack.push(down);
                    stack.push(up);
                } else {
                    stack.push(up);
                    stack.push(down);
                }
            }
        }
    }
    Ok(finish(ip, incumbent.map(|(_, x)| x), nodes, OracleMethod::Bnb, false))
}

/// `|opt - found| / |opt|`; with `opt = 0` the gap is 0 on a match and 1 otherwise.
pub fn optimality_gap(found: &Rational, opt: &Rational, _sense: Sense) -> f64 {
    if opt.is_zero() {
        return if found == opt { 0.0 } else { 1.0 };
    }
    to_f64(&((opt - found).abs() / opt.abs()))
}
