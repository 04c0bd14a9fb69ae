//! Bounded integer programs and the two problem families built on them.
//!
//! An [`IntegerProgram`] is the single source of truth for feasibility: every solver in the crate
//! eventually maps its answer back to an assignment of the original program and calls
//! [`IntegerProgram::evaluate`], which works in exact rational arithmetic.

mod mkp;
mod procurement;

pub use mkp::{build_mkp, generate_mkp, GeneratedMkp, MkpInstance, MkpParams, NonTriviality};
pub use procurement::{
    build_procurement, generate_procurement, GeneratedProcurement, ProcurementInstance,
    ProcurementParams, ABSENT_PART_COST,
};

use crate::rational::{self, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable {id} (`{name}`) has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { id: usize, name: String, lower: i64, upper: i64 },
    #[error("variable ids must be dense: position {position} holds id {id}")]
    NonDenseIds { position: usize, id: usize },
    #[error("{context} references unknown variable id {id}")]
    UnknownVariable { context: String, id: usize },
    #[error("constraint {index} (`{name}`) has no coefficients")]
    EmptyConstraint { index: usize, name: String },
    #[error("assignment has {got} values but the program has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("variable `{name}` = {value} lies outside its bounds [{lower}, {upper}]")]
    OutOfBounds { name: String, value: i64, lower: i64, upper: i64 },
    #[error("instance is trivial: {0}")]
    Trivial(NonTriviality),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("no valid instance found after {attempts} samples")]
    ResampleBudget { attempts: usize },
    #[error("malformed program JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// +1 for maximization, -1 for minimization.
    pub fn sign(self) -> i64 {
        match self {
            Sense::Maximize => 1,
            Sense::Minimize => -1,
        }
    }

    /// `true` when `a` is strictly better than `b` under this sense.
    pub fn better(self, a: &Rational, b: &Rational) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    #[serde(skip)]
    pub id: usize,
    pub name: String,
    #[serde(rename = "lo")]
    pub lower: i64,
    #[serde(rename = "hi")]
    pub upper: i64,
}

impl Variable {
    pub fn binary(id: usize, name: impl Into<String>) -> Self {
        Self { id, name: name.into(), lower: 0, upper: 1 }
    }

    pub fn integer(id: usize, name: impl Into<String>, lower: i64, upper: i64) -> Self {
        Self { id, name: name.into(), lower, upper }
    }

    pub fn is_binary(&self) -> bool {
        self.lower == 0 && self.upper == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    #[serde(with = "crate::rational::serde_rational_map")]
    pub coeffs: BTreeMap<usize, Rational>,
    #[serde(rename = "rel")]
    pub relation: Relation,
    #[serde(with = "crate::rational::serde_rational")]
    pub rhs: Rational,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
}

impl LinearConstraint {
    pub fn new(
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).fold(
            BTreeMap::new(),
            |mut acc: BTreeMap<usize, Rational>, (id, c)| {
                *acc.entry(id).or_insert_with(Rational::zero) += c;
                acc
            },
        );
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Self { coeffs, relation, rhs, name: name.into() }
    }

    pub fn lhs(&self, assignment: &[i64]) -> Rational {
        self.coeffs
            .iter()
            .map(|(&id, c)| c * Rational::from_integer(assignment[id] as i128))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: usize,
    pub name: String,
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "constraint {} `{}`: {} {} {} does not hold",
            self.constraint,
            self.name,
            rational::format(&self.lhs),
            self.relation,
            rational::format(&self.rhs)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: Rational,
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegerProgram {
    pub sense: Sense,
    pub objective: BTreeMap<usize, Rational>,
    pub constraints: Vec<LinearConstraint>,
    pub variables: Vec<Variable>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    version: u32,
    sense: Sense,
    #[serde(with = "crate::rational::serde_rational_map")]
    objective: BTreeMap<usize, Rational>,
    constraints: Vec<LinearConstraint>,
    vars: Vec<Variable>,
}

impl IntegerProgram {
    pub fn new(
        sense: Sense,
        objective: BTreeMap<usize, Rational>,
        constraints: Vec<LinearConstraint>,
        variables: Vec<Variable>,
    ) -> Result<Self, ModelError> {
        let objective = objective.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let ip = Self { sense, objective, constraints, variables };
        ip.validate()?;
        Ok(ip)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (position, v) in self.variables.iter().enumerate() {
            if v.id != position {
                return Err(ModelError::NonDenseIds { position, id: v.id });
            }
            if v.lower > v.upper {
                return Err(ModelError::InvertedBounds {
                    id: v.id,
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        let n = self.variables.len();
        if let Some(&id) = self.objective.keys().find(|&&id| id >= n) {
            return Err(ModelError::UnknownVariable { context: "objective".into(), id });
        }
        for (index, c) in self.constraints.iter().enumerate() {
            if c.coeffs.is_empty() {
                return Err(ModelError::EmptyConstraint { index, name: c.name.clone() });
            }
            if let Some(&id) = c.coeffs.keys().find(|&&id| id >= n) {
                return Err(ModelError::UnknownVariable {
                    context: format!("constraint {index} `{}`", c.name),
                    id,
                });
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn is_binary(&self) -> bool {
        self.variables.iter().all(Variable::is_binary)
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.is_binary()).count()
    }

    pub fn objective_value(&self, assignment: &[i64]) -> Rational {
        self.objective
            .iter()
            .map(|(&id, c)| c * Rational::from_integer(assignment[id] as i128))
            .sum()
    }

    /// Exact objective and feasibility of `assignment` (indexed by variable id).
    pub fn evaluate(&self, assignment: &[i64]) -> Result<Evaluation, ModelError> {
        if assignment.len() != self.variables.len() {
            return Err(ModelError::AssignmentLength {
                expected: self.variables.len(),
                got: assignment.len(),
            });
        }
        for (v, &value) in self.variables.iter().zip(assignment) {
            if value < v.lower || value > v.upper {
                return Err(ModelError::OutOfBounds {
                    name: v.name.clone(),
                    value,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
        }
        let violations: Vec<Violation> = self
            .constraints
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let lhs = c.lhs(assignment);
                (!c.relation.holds(&lhs, &c.rhs)).then(|| Violation {
                    constraint: i,
                    name: c.name.clone(),
                    lhs,
                    relation: c.relation,
                    rhs: c.rhs,
                })
            })
            .collect();
        Ok(Evaluation {
            objective: self.objective_value(assignment),
            feasible: violations.is_empty(),
            violations,
        })
    }

    pub fn zeros(&self) -> Vec<i64> {
        vec![0; self.variables.len()]
    }

    /// Same program with per-variable bounds replaced by `lower`/`upper`.
    pub fn with_bounds(&self, lower: &[i64], upper: &[i64]) -> Self {
        let mut ip = self.clone();
        for (v, (&lo, &hi)) in ip.variables.iter_mut().zip(lower.iter().zip(upper)) {
            v.lower = lo;
            v.upper = hi;
        }
        ip
    }

    pub fn to_json(&self) -> String {
        let wire = Wire {
            version: SCHEMA_VERSION,
            sense: self.sense,
            objective: self.objective.clone(),
            constraints: self.constraints.clone(),
            vars: self.variables.clone(),
        };
        serde_json::to_string_pretty(&wire).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let wire: Wire = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        if wire.version != SCHEMA_VERSION {
            return Err(ModelError::Json(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                wire.version
            )));
        }
        let variables = wire
            .vars
            .into_iter()
            .enumerate()
            .map(|(id, v)| Variable { id, ..v })
            .collect();
        Self::new(wire.sense, wire.objective, wire.constraints, variables)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("valid json")
    }
}
