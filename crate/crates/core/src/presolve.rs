//! LP relaxation and variable fixing.

use crate::model::{IntegerProgram, LinearConstraint, ModelError, Relation, Sense};
use crate::rational::{self, int, to_f64, Rational};
use crate::seed;
use num_traits::Zero;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Primal feasibility and pivoting tolerance.
pub const LP_TOL: f64 = 1e-9;
pub const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresolveError {
    #[error("cycling suspected: no optimum after {0} pivots")]
    CyclingSuspected(usize),
    #[error("LP relaxation is {0:?}; fixing needs an optimal LP solution")]
    NotOptimal(LpStatus),
    #[error("variable `{name}` is not binary; binarize before fixing")]
    NotBinary { name: String },
    #[error("fixing-infeasible: constraint `{name}` reduces to {lhs} {rel} {rhs}")]
    FixingInfeasible { name: String, lhs: String, rel: String, rhs: String },
    #[error("invalid fixing policy `{0}`")]
    Policy(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            let f = row[c];
            if i != r && f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Sets the reduced-cost row for maximizing `costs · x`.
    fn price(&mut self, costs: &[f64]) {
        self.obj = costs.to_vec();
        self.obj.resize(self.width + 1, 0.0);
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = self.obj[b];
            if cb != 0.0 {
                for (v, rv) in self.obj.iter_mut().zip(&self.rows[r]) {
                    *v -= cb * rv;
                }
            }
        }
    }

    /// Bland's rule primal simplex; `allowed` masks entering columns.
    fn optimize(&mut self, allowed: &[bool]) -> Result<bool, PresolveError> {
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(PresolveError::CyclingSuspected(self.pivots));
            }
            let Some(c) = (0..self.width).find(|&j| allowed[j] && self.obj[j] > LP_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > LP_TOL {
                    let ratio = self.rhs(r) / a;
                    best = match best {
                        None => Some((ratio, r)),
                        Some((br, bi)) => {
                            if ratio < br - LP_TOL || (ratio <= br + LP_TOL && self.basis[r] < self.basis[bi]) {
                                Some((ratio, r))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((_, r)) => self.pivot(r, c),
            }
        }
    }
}

/// Two-phase dense primal simplex on the LP relaxation (bounds kept as explicit rows).
pub fn solve_lp(ip: &IntegerProgram) -> Result<LpSolution, PresolveError> {
    let n = ip.num_vars();
    let lower: Vec<f64> = ip.variables.iter().map(|v| v.lower as f64).collect();

    // Rows over shifted variables x' = x - lower >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &ip.constraints {
        let mut a = vec![0.0; n];
        let mut shift = 0.0;
        for (&j, v) in &c.coeffs {
            a[j] = to_f64(v);
            shift += a[j] * lower[j];
        }
        rows.push((a, c.relation, to_f64(&c.rhs) - shift));
    }
    for (j, v) in ip.variables.iter().enumerate() {
        let mut a = vec![0.0; n];
        a[j] = 1.0;
        rows.push((a, Relation::Le, (v.upper - v.lower) as f64));
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + slack_count + art_count;
    let mut tableau = Tableau { rows: Vec::with_capacity(m), obj: Vec::new(), basis: vec![0; m], width, pivots: 0 };
    let (mut s, mut a) = (n, n + slack_count);
    for (r, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
        let mut row = coeffs;
        row.resize(width + 1, 0.0);
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                tableau.basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                row[a] = 1.0;
                tableau.basis[r] = a;
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                tableau.basis[r] = a;
                a += 1;
            }
        }
        tableau.rows.push(row);
    }
    let is_art = |j: usize| j >= n + slack_count;

    if art_count > 0 {
        let costs: Vec<f64> = (0..width).map(|j| if is_art(j) { -1.0 } else { 0.0 }).collect();
        tableau.price(&costs);
        tableau.optimize(&vec![true; width])?;
        let infeasibility: f64 = (0..m).filter(|&r| is_art(tableau.basis[r])).map(|r| tableau.rhs(r)).sum();
        if infeasibility > 1e-7 {
            return Ok(LpSolution { status: LpStatus::Infeasible, values: Vec::new(), objective: 0.0, pivots: tableau.pivots });
        }
        for r in 0..m {
            if is_art(tableau.basis[r]) {
                if let Some(c) = (0..n + slack_count).find(|&j| tableau.rows[r][j].abs() > LP_TOL) {
                    tableau.pivot(r, c);
                }
            }
        }
    }

    let sign = ip.sense.sign() as f64;
    let mut costs = vec![0.0; width];
    for (&j, c) in &ip.objective {
        costs[j] = sign * to_f64(c);
    }
    tableau.price(&costs);
    let allowed: Vec<bool> = (0..width).map(|j| !is_art(j)).collect();
    if !tableau.optimize(&allowed)? {
        return Ok(LpSolution { status: LpStatus::Unbounded, values: Vec::new(), objective: 0.0, pivots: tableau.pivots });
    }

    let mut shifted = vec![0.0; n];
    for (r, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            shifted[b] = tableau.rhs(r);
        }
    }
    let values: Vec<f64> = ip
        .variables
        .iter()
        .zip(&shifted)
        .map(|(v, x)| (v.lower as f64 + x).clamp(v.lower as f64, v.upper as f64))
        .collect();
    let objective = ip.objective.iter().map(|(&j, c)| to_f64(c) * values[j]).sum();
    Ok(LpSolution { status: LpStatus::Optimal, values, objective, pivots: tableau.pivots })
}

/// Which LP-relaxed binaries get fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FixingPolicy {
    /// Fix to 0 below `delta`, to 1 above `1 - delta`.
    Delta { delta: f64 },
    /// Fix the `⌈percent·n⌉` variables closest to an integer.
    Percentage { percent: f64 },
    /// Fix a seeded random `⌈percent·n⌉`-subset to its rounded LP values.
    Random { percent: f64 },
}

impl FixingPolicy {
    fn validate(&self) -> Result<(), PresolveError> {
        let ok = match *self {
            FixingPolicy::Delta { delta } => delta > 0.0 && delta < 0.5,
            FixingPolicy::Percentage { percent } | FixingPolicy::Random { percent } => percent > 0.0 && percent <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(PresolveError::Policy(self.to_string()))
        }
    }
}

impl fmt::Display for FixingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixingPolicy::Delta { delta } => write!(f, "delta:{delta}"),
            FixingPolicy::Percentage { percent } => write!(f, "percent:{percent}"),
            FixingPolicy::Random { percent } => write!(f, "random:{percent}"),
        }
    }
}

impl FromStr for FixingPolicy {
    type Err = PresolveError;

    /// `delta:0.1`, `percent:0.9` or `random:0.9`.
    fn from_str(s: &str) -> Result<Self, PresolveError> {
        let bad = || PresolveError::Policy(s.to_string());
        let (mode, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        let policy = match mode.trim() {
            "delta" => FixingPolicy::Delta { delta: value },
            "percent" | "percentage" => FixingPolicy::Percentage { percent: value },
            "random" => FixingPolicy::Random { percent: value },
            _ => return Err(bad()),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Fixed values plus the smaller program over the remaining variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub policy: FixingPolicy,
    pub original_vars: usize,
    /// Original id → fixed value.
    pub fixed: BTreeMap<usize, i64>,
    pub residual: IntegerProgram,
    /// Residual id → original id.
    pub lift: Vec<usize>,
    /// Objective contribution of the fixed variables.
    pub offset: Rational,
}

impl Reduction {
    /// Full assignment from one over the residual variables.
    pub fn lift_solution(&self, residual: &[i64]) -> Vec<i64> {
        assert_eq!(residual.len(), self.lift.len(), "residual assignment length");
        let mut full = vec![i64::MIN; self.original_vars];
        for (&id, &v) in &self.fixed {
            full[id] = v;
        }
        for (&id, &v) in self.lift.iter().zip(residual) {
            assert_eq!(full[id], i64::MIN, "variable {id} is both fixed and free");
            full[id] = v;
        }
        assert!(full.iter().all(|&v| v != i64::MIN), "reduction does not cover every variable");
        full
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "version": crate::model::SCHEMA_VERSION,
            "policy": self.policy,
            "original_vars": self.original_vars,
            "fixed": self.fixed.iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
            "lift": self.lift,
            "offset": rational::format(&self.offset),
            "residual": self.residual.to_json_value(),
        })
    }
}

/// Fixes binaries of `ip` according to `policy` and substitutes them out.
pub fn fix_variables(
    ip: &IntegerProgram,
    lp: &LpSolution,
    policy: FixingPolicy,
    seed: u64,
) -> Result<Reduction, PresolveError> {
    policy.validate()?;
    if lp.status != LpStatus::Optimal {
        return Err(PresolveError::NotOptimal(lp.status));
    }
    if let Some(v) = ip.variables.iter().find(|v| !v.is_binary()) {
        return Err(PresolveError::NotBinary { name: v.name.clone() });
    }
    let n = ip.num_vars();
    let rounded = |j: usize| if lp.values[j] >= 0.5 { 1 } else { 0 };
    let quota = |percent: f64| ((percent * n as f64) - 1e-9).ceil().clamp(0.0, n as f64) as usize;
    let mut fixed = BTreeMap::new();
    match policy {
        FixingPolicy::Delta { delta } => {
            for (j, &x) in lp.values.iter().enumerate() {
                if x < delta + LP_TOL {
                    fixed.insert(j, 0);
                } else if x > 1.0 - delta - LP_TOL {
                    fixed.insert(j, 1);
                }
            }
        }
        FixingPolicy::Percentage { percent } => {
            let mut order: Vec<usize> = (0..n).collect();
            let distance = |j: usize| (lp.values[j] - lp.values[j].round()).abs();
            order.sort_by(|&a, &b| distance(a).total_cmp(&distance(b)).then(a.cmp(&b)));
            for &j in &order[..quota(percent)] {
                fixed.insert(j, rounded(j));
            }
        }
        FixingPolicy::Random { percent } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut seed::rng(seed));
            for &j in &order[..quota(percent)] {
                fixed.insert(j, rounded(j));
            }
        }
    }
    substitute(ip, fixed, policy)
}

fn substitute(ip: &IntegerProgram, fixed: BTreeMap<usize, i64>, policy: FixingPolicy) -> Result<Reduction, PresolveError> {
    let lift: Vec<usize> = (0..ip.num_vars()).filter(|j| !fixed.contains_key(j)).collect();
    let mut new_id = vec![usize::MAX; ip.num_vars()];
    for (k, &j) in lift.iter().enumerate() {
        new_id[j] = k;
    }
    let mut offset = Rational::zero();
    let mut objective = BTreeMap::new();
    for (&j, c) in &ip.objective {
        match fixed.get(&j) {
            Some(&v) => offset += c * int(v),
            None => {
                objective.insert(new_id[j], *c);
            }
        }
    }
    let mut constraints = Vec::new();
    for c in &ip.constraints {
        let mut constant = Rational::zero();
        let mut terms = Vec::new();
        for (&j, a) in &c.coeffs {
            match fixed.get(&j) {
                Some(&v) => constant += a * int(v),
                None => terms.push((new_id[j], *a)),
            }
        }
        if terms.is_empty() {
            if !c.relation.holds(&constant, &c.rhs) {
                return Err(PresolveError::FixingInfeasible {
                    name: c.name.clone(),
                    lhs: rational::format(&constant),
                    rel: serde_json::to_value(c.relation).unwrap().as_str().unwrap().to_string(),
                    rhs: rational::format(&c.rhs),
                });
            }
            continue;
        }
        constraints.push(LinearConstraint::new(c.name.clone(), terms, c.relation, c.rhs - constant));
    }
    let variables = lift
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let v = &ip.variables[j];
            crate::model::Variable { id: k, ..v.clone() }
        })
        .collect();
    let residual = IntegerProgram::new(ip.sense, objective, constraints, variables)?;
    Ok(Reduction { policy, original_vars: ip.num_vars(), fixed, residual, lift, offset })
}

/// Returns `true` when the LP objective bounds `ilp_optimum` in the direction of `sense`.
pub fn bounds_optimum(sense: Sense, lp_objective: f64, ilp_optimum: &Rational, tol: f64) -> bool {
    let opt = to_f64(ilp_optimum);
    match sense {
        Sense::Maximize => lp_objective >= opt - tol,
        Sense::Minimize => lp_objective <= opt + tol,
    }
}
