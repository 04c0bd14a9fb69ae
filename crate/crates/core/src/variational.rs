//! Parameter search over ansatz circuits and the end-to-end QRAO / QAOA solvers.

use crate::encode::{
    assign_qubits, binarize, build_instance_graph, color_ldf, diagonal_hamiltonian, relax_hamiltonian, to_ising,
    to_qubo, EncodeError, Penalty,
};
use crate::model::IntegerProgram;
use crate::pauli::PauliHamiltonian;
use crate::presolve::Reduction;
use crate::rational::{format as fmt_rational, to_f64};
use crate::rounding::{magic_round, pauli_round, select_best, Decoder, RoundingConfig, Selection};
use crate::seed;
use crate::sim::{self, build_ansatz, AnsatzSpec, Circuit, Observable, SimError, MAX_QUBITS};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Maximize,
    Minimize,
}

/// Linear-approximation trust-region search (COBYLA without constraints).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub max_evals: usize,
    /// Initial trust radius.
    pub rho_begin: f64,
    /// Final trust radius; the search stops once a step of this size fails.
    pub rho_end: f64,
    /// Draws the starting point, uniform in `[-π, π)` per parameter.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_evals: 1000, rho_begin: 1.0, rho_end: 1e-4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub eval_count: usize,
    /// `(evaluation index, value)` for every evaluation.
    pub trace: Vec<(usize, f64)>,
    /// The evaluation budget ran out before the trust radius reached `rho_end`.
    pub exhausted: bool,
}

/// Minimizes `f` from `x0` by linear interpolation on a simplex of `n + 1` points.
pub fn trust_region(mut f: impl FnMut(&[f64]) -> f64, x0: Vec<f64>, config: &OptimizerConfig, goal: Goal) -> VariationalResult {
    assert!(config.max_evals >= 1, "max_evals must be at least 1");
    let sign = match goal {
        Goal::Maximize => -1.0,
        Goal::Minimize => 1.0,
    };
    let mut trace = Vec::new();
    let mut eval = |x: &[f64], trace: &mut Vec<(usize, f64)>| {
        let v = f(x);
        trace.push((trace.len(), v));
        sign * v
    };
    let n = x0.len();
    let mut s = Simplex { base: x0, fbase: 0.0, offsets: Vec::with_capacity(n), values: Vec::with_capacity(n), inverse: Vec::new(), updates: 0 };
    s.fbase = eval(&s.base, &mut trace);
    let budget_left = |trace: &Vec<(usize, f64)>| trace.len() < config.max_evals;
    let mut rho = config.rho_begin;
    let mut exhausted = false;

    'search: {
        if n == 0 {
            break 'search;
        }
        for i in 0..n {
            if !budget_left(&trace) {
                exhausted = true;
                if let Some(j) = s.best_vertex() {
                    for (b, d) in s.base.iter_mut().zip(&s.offsets[j]) {
                        *b += d;
                    }
                    s.fbase = s.values[j];
                }
                break 'search;
            }
            let mut d = vec![0.0; n];
            d[i] = rho;
            let x: Vec<f64> = s.base.iter().zip(&d).map(|(b, d)| b + d).collect();
            s.values.push(eval(&x, &mut trace));
            s.offsets.push(d);
        }
        s.inverse = (0..n).map(|i| unit(n, i, 1.0 / rho)).collect();
        if let Some(j) = s.best_vertex() {
            s.swap_base(j);
        }

        loop {
            if !budget_left(&trace) {
                exhausted = true;
                break;
            }
            let g = s.gradient();
            let gnorm = norm(&g);
            let mut improved = false;
            if gnorm > 0.0 && gnorm.is_finite() {
                let step: Vec<f64> = g.iter().map(|gk| -rho * gk / gnorm).collect();
                let x: Vec<f64> = s.base.iter().zip(&step).map(|(b, d)| b + d).collect();
                let fx = eval(&x, &mut trace);
                let predicted = rho * gnorm;
                improved = s.fbase - fx >= 0.1 * predicted;
                s.absorb(step, fx);
                if improved {
                    continue;
                }
                if !budget_left(&trace) {
                    exhausted = true;
                    break;
                }
            }
            if let Some((j, direction)) = s.geometry_defect(rho, &g) {
                let step: Vec<f64> = direction.iter().map(|v| 0.5 * rho * v).collect();
                let x: Vec<f64> = s.base.iter().zip(&step).map(|(b, d)| b + d).collect();
                let fx = eval(&x, &mut trace);
                s.replace(j, step, fx);
                continue;
            }
            if !improved {
                if rho <= config.rho_end {
                    break;
                }
                rho = (rho * 0.5).max(config.rho_end);
            }
        }
    }

    let (best_index, _) = trace
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &(_, v))| if sign * v < bv { (i, sign * v) } else { (bi, bv) });
    debug_assert!((sign * trace[best_index].1 - s.fbase).abs() <= 1e-12 * s.fbase.abs().max(1.0));
    VariationalResult {
        best_params: s.base,
        best_value: trace[best_index].1,
        eval_count: trace.len(),
        trace,
        exhausted,
    }
}

struct Simplex {
    base: Vec<f64>,
    fbase: f64,
    /// Vertex `j` sits at `base + offsets[j]`.
    offsets: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Rows of the inverse of the matrix whose columns are `offsets`.
    inverse: Vec<Vec<f64>>,
    updates: usize,
}

impl Simplex {
    fn n(&self) -> usize {
        self.offsets.len()
    }

    fn best_vertex(&self) -> Option<usize> {
        let (j, v) = self.values.iter().enumerate().fold((0, f64::INFINITY), |(bj, bv), (j, &v)| if v < bv { (j, v) } else { (bj, bv) });
        (v < self.fbase).then_some(j)
    }

    /// Gradient of the linear interpolant through the vertices.
    fn gradient(&self) -> Vec<f64> {
        let n = self.n();
        let mut g = vec![0.0; n];
        for (row, v) in self.inverse.iter().zip(&self.values) {
            let df = v - self.fbase;
            for (gk, r) in g.iter_mut().zip(row) {
                *gk += r * df;
            }
        }
        g
    }

    /// Makes vertex `j` the base; the old base becomes vertex `j`.
    fn swap_base(&mut self, j: usize) {
        let dj = self.offsets[j].clone();
        for (b, d) in self.base.iter_mut().zip(&dj) {
            *b += d;
        }
        for (k, off) in self.offsets.iter_mut().enumerate() {
            if k != j {
                for (o, d) in off.iter_mut().zip(&dj) {
                    *o -= d;
                }
            }
        }
        self.offsets[j] = dj.iter().map(|d| -d).collect();
        std::mem::swap(&mut self.fbase, &mut self.values[j]);
        let n = self.n();
        let sum: Vec<f64> = (0..n).map(|c| self.inverse.iter().map(|row| row[c]).sum()).collect();
        self.inverse[j] = sum.iter().map(|v| -v).collect();
    }

    /// Replaces vertex `j` by `base + step`; the new point becomes the base if it is better.
    fn replace(&mut self, j: usize, step: Vec<f64>, value: f64) {
        let lambda: Vec<f64> = self.inverse.iter().map(|row| dot(row, &step)).collect();
        let pivot = lambda[j];
        let row_j: Vec<f64> = self.inverse[j].iter().map(|v| v / pivot).collect();
        for (k, row) in self.inverse.iter_mut().enumerate() {
            if k != j {
                for (r, rj) in row.iter_mut().zip(&row_j) {
                    *r -= lambda[k] * rj;
                }
            }
        }
        self.inverse[j] = row_j;
        self.offsets[j] = step;
        self.values[j] = value;
        self.updates += 1;
        if self.updates % (2 * self.n()).max(8) == 0 {
            self.refresh_inverse();
        }
        if value < self.fbase {
            self.swap_base(j);
        }
    }

    /// Replaces the vertex whose removal keeps the simplex best conditioned.
    fn absorb(&mut self, step: Vec<f64>, value: f64) {
        let lambda: Vec<f64> = self.inverse.iter().map(|row| dot(row, &step)).collect();
        let j = argmax(lambda.iter().map(|l| l.abs()));
        self.replace(j, step, value);
    }

    /// A vertex too far from the base or too close to the face spanned by the others, with a unit
    /// direction normal to that face.
    fn geometry_defect(&self, rho: f64, g: &[f64]) -> Option<(usize, Vec<f64>)> {
        let far = argmax(self.offsets.iter().map(|d| norm(d)));
        let j = if norm(&self.offsets[far]) > 2.1 * rho {
            far
        } else {
            let heights: Vec<f64> = self.inverse.iter().map(|row| 1.0 / norm(row)).collect();
            let thin = argmax(heights.iter().map(|h| -h));
            if heights[thin] >= 0.25 * rho {
                return None;
            }
            thin
        };
        let row = &self.inverse[j];
        let r = norm(row);
        let s = if dot(row, g) > 0.0 { -1.0 } else { 1.0 };
        Some((j, row.iter().map(|v| s * v / r).collect()))
    }

    fn refresh_inverse(&mut self) {
        if let Some(inv) = invert_columns(&self.offsets) {
            self.inverse = inv;
        }
    }
}

fn unit(n: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = scale;
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// First index of the maximum.
fn argmax(values: impl Iterator<Item = f64>) -> usize {
    values.enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) }).0
}

/// Rows of `M⁻¹` where `columns[j]` is column `j` of `M`; Gauss-Jordan with partial pivoting.
fn invert_columns(columns: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = columns.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|r| (0..n).map(|c| columns[c][r]).collect()).collect();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| unit(n, i, 1.0)).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        a[col].iter_mut().for_each(|v| *v /= p);
        inv[col].iter_mut().for_each(|v| *v /= p);
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let factor = a[r][col];
                for c in 0..n {
                    a[r][c] -= factor * a[col][c];
                    inv[r][c] -= factor * inv[col][c];
                }
            }
        }
    }
    Some(inv)
}

/// Optimizes `⟨ψ(θ)|H|ψ(θ)⟩` from a seeded random start.
pub fn optimize(circuit: &Circuit, h: &PauliHamiltonian, config: &OptimizerConfig, goal: Goal) -> Result<VariationalResult, SimError> {
    let observable = Observable::compile(h);
    let mut rng = seed::rng(config.seed);
    let x0: Vec<f64> = (0..circuit.num_params).map(|_| rng.gen_range(-PI..PI)).collect();
    // Surface simulator errors once up front; the circuit is fixed so later runs cannot fail.
    circuit.run(&x0)?;
    Ok(trust_region(|x| observable.expectation(&circuit.run(x).expect("validated circuit")), x0, config, goal))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qrao,
    Qaoa,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Qrao => "qrao",
            Method::Qaoa => "qaoa",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{method} needs {qubits} qubits but the cap is {cap}")]
    Capacity { method: Method, qubits: usize, cap: usize },
    #[error("reduction covers {reduction} binaries but the binarized program has {binarized}")]
    ReductionMismatch { reduction: usize, binarized: usize },
}

/// Evaluation budget per restart, by register size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalBudget {
    pub small: usize,
    pub large: usize,
    /// Registers up to this many qubits get `small`.
    pub threshold: usize,
}

impl EvalBudget {
    pub fn uniform(evals: usize) -> Self {
        Self { small: evals, large: evals, threshold: 0 }
    }

    pub fn for_qubits(&self, qubits: usize) -> usize {
        if qubits <= self.threshold {
            self.small
        } else {
            self.large
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub ansatz: AnsatzSpec,
    pub budget: EvalBudget,
    pub rho_begin: f64,
    pub rho_end: f64,
    pub restarts: usize,
    /// Magic-rounding shots for QRAO, computational-basis shots for QAOA.
    pub shots: usize,
    pub tie_rule: crate::rounding::TieRule,
    pub qubit_cap: usize,
    pub seed: u64,
}

impl SolverConfig {
    /// Brickwork with 8 layers, 3 restarts, 1 024 magic shots.
    pub fn qrao(seed: u64) -> Self {
        Self {
            ansatz: AnsatzSpec::brickwork(8),
            budget: EvalBudget { small: 1000, large: 400, threshold: 10 },
            rho_begin: 1.0,
            rho_end: 1e-4,
            restarts: 3,
            shots: 1024,
            tie_rule: Default::default(),
            qubit_cap: MAX_QUBITS,
            seed,
        }
    }

    /// Five QAOA layers, 3 restarts, 4 096 shots.
    pub fn qaoa(seed: u64) -> Self {
        Self { ansatz: AnsatzSpec::qaoa(5), shots: 4096, budget: EvalBudget { small: 1000, large: 300, threshold: 10 }, ..Self::qrao(seed) }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "ansatz": self.ansatz.label(),
            "budget": self.budget,
            "rho_begin": self.rho_begin,
            "rho_end": self.rho_end,
            "restarts": self.restarts,
            "shots": self.shots,
            "tie_rule": self.tie_rule,
            "qubit_cap": self.qubit_cap,
            "seed": self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub best_value: f64,
    pub evals: usize,
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub method: Method,
    pub qubits: usize,
    /// QUBO variables, slack included.
    pub spins: usize,
    pub decision_vars: usize,
    /// Best `⟨H_relax⟩` (QRAO) or best `⟨H_diag⟩` (QAOA), both in the maximize orientation.
    pub relaxed_value: f64,
    pub restarts: Vec<RestartSummary>,
    pub best_params: Vec<f64>,
    /// Best over every candidate.
    pub best: Selection,
    /// QRAO only.
    pub pauli: Option<Selection>,
    /// QRAO only.
    pub magic: Option<Selection>,
    /// QRAO only: the most frequent magic sample.
    pub magic_modal: Option<Selection>,
    pub pauli_expectations: Option<Vec<f64>>,
    pub basis_histogram: Option<[usize; 4]>,
    /// Distinct candidate bitstrings scored.
    pub distinct_candidates: usize,
}

pub fn selection_json(s: &Selection) -> Value {
    json!({
        "candidate": s.index,
        "feasible": s.feasible,
        "objective": fmt_rational(&s.objective),
        "qubo_value": fmt_rational(&s.qubo_value),
        "assignment": s.assignment,
        "bits": s.bits.iter().map(|b| char::from(b'0' + b)).collect::<String>(),
    })
}

impl SolveOutcome {
    pub fn to_json_value(&self) -> Value {
        json!({
            "method": self.method,
            "qubits": self.qubits,
            "spins": self.spins,
            "decision_vars": self.decision_vars,
            "relaxed_value": self.relaxed_value,
            "restarts": self.restarts,
            "best": selection_json(&self.best),
            "pauli": self.pauli.as_ref().map(selection_json),
            "magic": self.magic.as_ref().map(selection_json),
            "magic_modal": self.magic_modal.as_ref().map(selection_json),
            "pauli_expectations": self.pauli_expectations,
            "basis_histogram": self.basis_histogram,
            "distinct_candidates": self.distinct_candidates,
        })
    }
}

/// Decoder plus the binary program whose QUBO gets solved.
fn prepare(original: &IntegerProgram, reduction: Option<&Reduction>) -> Result<(Decoder, IntegerProgram), SolveError> {
    let (binary, binarization) = binarize(original);
    let target = match reduction {
        Some(r) => {
            if r.original_vars != binary.num_vars() {
                return Err(SolveError::ReductionMismatch { reduction: r.original_vars, binarized: binary.num_vars() });
            }
            r.residual.clone()
        }
        None => binary,
    };
    let encoding = to_qubo(&target, Penalty::Auto)?;
    let decoder = Decoder { original: original.clone(), binarization, reduction: reduction.cloned(), encoding };
    Ok((decoder, target))
}

fn best_of_restarts(
    circuit: &Circuit,
    h: &PauliHamiltonian,
    config: &SolverConfig,
    qubits: usize,
    goal: Goal,
) -> Result<(VariationalResult, Vec<RestartSummary>), SolveError> {
    let mut best: Option<VariationalResult> = None;
    let mut summaries = Vec::new();
    for r in 0..config.restarts.max(1) {
        let seed = seed::derive(config.seed, "restart", r as u64);
        let opt = OptimizerConfig { max_evals: config.budget.for_qubits(qubits), rho_begin: config.rho_begin, rho_end: config.rho_end, seed };
        let result = optimize(circuit, h, &opt, goal)?;
        summaries.push(RestartSummary { seed, best_value: result.best_value, evals: result.eval_count, exhausted: result.exhausted });
        let better = best.as_ref().is_none_or(|b| match goal {
            Goal::Maximize => result.best_value > b.best_value,
            Goal::Minimize => result.best_value < b.best_value,
        });
        if better {
            best = Some(result);
        }
    }
    Ok((best.expect("at least one restart"), summaries))
}

/// Solves a program with no QUBO variables left: the only candidate is the empty bitstring.
fn trivial(method: Method, decoder: &Decoder) -> SolveOutcome {
    let best = select_best(&[Vec::new()], decoder);
    SolveOutcome {
        method,
        qubits: 0,
        spins: 0,
        decision_vars: 0,
        relaxed_value: to_f64(&decoder.encoding.qubo.constant),
        restarts: Vec::new(),
        best_params: Vec::new(),
        pauli: (method == Method::Qrao).then(|| best.clone()),
        magic: (method == Method::Qrao).then(|| best.clone()),
        magic_modal: (method == Method::Qrao).then(|| best.clone()),
        best,
        pauli_expectations: None,
        basis_histogram: None,
        distinct_candidates: 1,
    }
}

/// binarize → QUBO → Ising → coloring → relaxed Hamiltonian → variational search → both roundings.
///
/// With a reduction, the residual program is solved and candidates are lifted back through it.
pub fn run_qrao(original: &IntegerProgram, reduction: Option<&Reduction>, config: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    let (decoder, _) = prepare(original, reduction)?;
    let ising = to_ising(&decoder.encoding.qubo);
    if ising.n == 0 {
        return Ok(trivial(Method::Qrao, &decoder));
    }
    let layout = assign_qubits(&color_ldf(&build_instance_graph(&ising)));
    let qubits = layout.qubit_count;
    if qubits > config.qubit_cap {
        return Err(SolveError::Capacity { method: Method::Qrao, qubits, cap: config.qubit_cap });
    }
    let h = relax_hamiltonian(&ising, &layout)?;
    let circuit = build_ansatz(&config.ansatz, qubits, None)?;
    let (best, restarts) = best_of_restarts(&circuit, &h, config, qubits, Goal::Maximize)?;
    let state = circuit.run(&best.best_params)?;

    let rounding = RoundingConfig { shots: config.shots, seed: seed::derive(config.seed, "rounding", 0), tie_rule: config.tie_rule };
    let pauli_out = pauli_round(&state, &layout, &rounding);
    let magic_out = magic_round(&state, &layout, &rounding)?;
    let pauli = select_best(std::slice::from_ref(&pauli_out.bits), &decoder);
    let magic = select_best(&magic_out.shots, &decoder);
    let magic_modal = select_best(&[magic_out.joint_mode()], &decoder);
    let mut all = vec![pauli_out.bits.clone()];
    all.extend(magic_out.shots.iter().cloned());
    let best_overall = select_best(&all, &decoder);
    all.sort();
    all.dedup();

    Ok(SolveOutcome {
        method: Method::Qrao,
        qubits,
        spins: ising.n,
        decision_vars: decoder.encoding.decision_vars,
        relaxed_value: best.best_value,
        restarts,
        best_params: best.best_params,
        best: best_overall,
        pauli: Some(pauli),
        magic: Some(magic),
        magic_modal: Some(magic_modal),
        pauli_expectations: Some(pauli_out.expectations),
        basis_histogram: Some(magic_out.basis_histogram),
        distinct_candidates: all.len(),
    })
}

/// One qubit per QUBO variable; minimizes the cost `-H_diag` and samples the final state.
pub fn run_qaoa(original: &IntegerProgram, reduction: Option<&Reduction>, config: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    let (decoder, _) = prepare(original, reduction)?;
    let ising = to_ising(&decoder.encoding.qubo);
    if ising.n == 0 {
        return Ok(trivial(Method::Qaoa, &decoder));
    }
    let qubits = ising.n;
    let cap = config.qubit_cap.min(MAX_QUBITS);
    if qubits > cap {
        return Err(SolveError::Capacity { method: Method::Qaoa, qubits, cap });
    }
    let cost = diagonal_hamiltonian(&ising).scaled(-1.0);
    let spec = AnsatzSpec { family: sim::Family::Qaoa, ..config.ansatz };
    let circuit = build_ansatz(&spec, qubits, Some(&cost))?;
    let (best, restarts) = best_of_restarts(&circuit, &cost, config, qubits, Goal::Minimize)?;
    let state = circuit.run(&best.best_params)?;

    let counts = sim::sample(&state, &vec![None; qubits], config.shots, seed::derive(config.seed, "qaoa-shots", 0))?;
    let mut outcomes: Vec<(usize, usize)> = counts.into_iter().collect();
    outcomes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let candidates: Vec<Vec<u8>> = outcomes.iter().map(|&(o, _)| (0..qubits).map(|q| ((o >> q) & 1) as u8).collect()).collect();
    let best_overall = select_best(&candidates, &decoder);

    Ok(SolveOutcome {
        method: Method::Qaoa,
        qubits,
        spins: ising.n,
        decision_vars: decoder.encoding.decision_vars,
        relaxed_value: -best.best_value,
        restarts,
        best_params: best.best_params,
        best: best_overall,
        pauli: None,
        magic: None,
        magic_modal: None,
        pauli_expectations: None,
        basis_histogram: None,
        distinct_candidates: candidates.len(),
    })
}

pub fn solve(method: Method, original: &IntegerProgram, reduction: Option<&Reduction>, config: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    match method {
        Method::Qrao => run_qrao(original, reduction, config),
        Method::Qaoa => run_qaoa(original, reduction, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_mkp, generate_mkp, LinearConstraint, MkpParams, Relation, Sense, Variable};
    use crate::oracle::{solve_exact, OracleConfig};
    use crate::pauli::{Axis, PauliTerm};
    use crate::rational::int;

    #[test]
    fn zero_parameters_evaluate_once() {
        let r = trust_region(|_| 4.5, Vec::new(), &OptimizerConfig::default(), Goal::Maximize);
        assert_eq!(r.eval_count, 1);
        assert_eq!(r.best_value, 4.5);
        assert!(!r.exhausted);
    }

    #[test]
    fn budget_spent_during_initial_simplex() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v).sum::<f64>();
        let r = trust_region(f, vec![0.0; 6], &OptimizerConfig { max_evals: 4, ..Default::default() }, Goal::Maximize);
        assert!(r.exhausted);
        assert_eq!(r.eval_count, 4);
        assert_eq!(r.best_value, 3.0);
        assert_eq!(f(&r.best_params), r.best_value);
    }

    #[test]
    fn quadratic_bowl() {
        let target = [0.3, -1.2, 2.0, 0.7];
        let f = |x: &[f64]| x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let r = trust_region(f, vec![0.0; 4], &OptimizerConfig { max_evals: 2000, ..Default::default() }, Goal::Minimize);
        assert!(r.best_value < 1e-6, "{}", r.best_value);
        assert_eq!(r.trace.len(), r.eval_count);
        for (p, t) in r.best_params.iter().zip(&target) {
            assert!((p - t).abs() < 1e-3);
        }
    }

    #[test]
    fn rotated_valley_maximized() {
        let f = |x: &[f64]| -(x[0] + x[1] - 1.0).powi(2) - 10.0 * (x[0] - x[1]).powi(2) + 3.0;
        let r = trust_region(f, vec![-2.0, 2.0], &OptimizerConfig { max_evals: 2000, ..Default::default() }, Goal::Maximize);
        assert!((r.best_value - 3.0).abs() < 1e-6);
        let max_in_trace = r.trace.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_value, max_in_trace);
    }

    #[test]
    fn budget_is_respected() {
        let r = trust_region(|x| x.iter().map(|v| v.sin()).sum(), vec![0.0; 10], &OptimizerConfig { max_evals: 7, ..Default::default() }, Goal::Minimize);
        assert_eq!(r.eval_count, 7);
        assert!(r.exhausted);
    }

    #[test]
    fn single_rx_reaches_minus_one() {
        let mut c = Circuit::new(1);
        c.rotate(Axis::X, 0);
        let h = PauliHamiltonian::new(1, vec![PauliTerm::new(-1.0, vec![(0, Axis::Z)])], 0.0);
        for seed in 0..5 {
            let r = optimize(&c, &h, &OptimizerConfig { max_evals: 200, seed, ..Default::default() }, Goal::Minimize).unwrap();
            assert!((r.best_value + 1.0).abs() < 1e-3, "seed {seed}: {}", r.best_value);
            assert!(r.eval_count <= 200);
        }
    }

    #[test]
    fn optimizer_is_deterministic() {
        let c = build_ansatz(&AnsatzSpec::brickwork(2), 3, None).unwrap();
        let h = PauliHamiltonian::new(
            3,
            vec![PauliTerm::new(1.0, vec![(0, Axis::X), (1, Axis::Y)]), PauliTerm::new(-0.5, vec![(2, Axis::Z)])],
            0.0,
        );
        let config = OptimizerConfig { max_evals: 150, seed: 4, ..Default::default() };
        let a = optimize(&c, &h, &config, Goal::Maximize).unwrap();
        let b = optimize(&c, &h, &config, Goal::Maximize).unwrap();
        assert_eq!(a, b);
        let mut incumbent = f64::NEG_INFINITY;
        for &(_, v) in &a.trace {
            incumbent = incumbent.max(v);
        }
        assert_eq!(incumbent, a.best_value);
    }

    fn single_item() -> IntegerProgram {
        IntegerProgram::new(
            Sense::Maximize,
            [(0, int(5))].into(),
            vec![LinearConstraint::new("cap", [(0, int(2))], Relation::Le, int(3))],
            vec![Variable::binary(0, "x")],
        )
        .unwrap()
    }

    fn quick(seed: u64) -> SolverConfig {
        SolverConfig { budget: EvalBudget::uniform(150), restarts: 1, ..SolverConfig::qrao(seed) }
    }

    #[test]
    fn forced_optimum_is_found() {
        let ip = single_item();
        let qrao = run_qrao(&ip, None, &quick(1)).unwrap();
        assert_eq!(qrao.best.assignment, vec![1]);
        assert!(qrao.best.feasible);
        let qaoa = run_qaoa(&ip, None, &SolverConfig { budget: EvalBudget::uniform(150), restarts: 1, ..SolverConfig::qaoa(1) }).unwrap();
        assert_eq!(qaoa.best.assignment, vec![1]);
        assert_eq!(qaoa.qubits, qaoa.spins);
    }

    #[test]
    fn unconstrained_single_variable() {
        let ip = IntegerProgram::new(Sense::Maximize, [(0, int(2))].into(), vec![], vec![Variable::binary(0, "x")]).unwrap();
        let out = run_qaoa(&ip, None, &SolverConfig { budget: EvalBudget::uniform(100), restarts: 1, ..SolverConfig::qaoa(0) }).unwrap();
        assert_eq!(out.best.assignment, vec![1]);
        assert_eq!(out.qubits, 1);
    }

    #[test]
    fn capacity_error_names_counts() {
        let g = generate_mkp(2, &MkpParams::sized(3, 4)).unwrap();
        let ip = build_mkp(&g.instance).unwrap();
        let err = run_qaoa(&ip, None, &SolverConfig { qubit_cap: 16, ..SolverConfig::qaoa(0) }).unwrap_err();
        let SolveError::Capacity { qubits, cap: 16, .. } = err else { panic!("{err:?}") };
        assert!(qubits > 16);
        assert!(err.to_string().contains(&format!("{qubits} qubits")) && err.to_string().contains("16"));
    }

    #[test]
    fn qrao_on_small_mkp() {
        let g = generate_mkp(3, &MkpParams::sized(2, 2)).unwrap();
        let ip = build_mkp(&g.instance).unwrap();
        let out = run_qrao(&ip, None, &quick(5)).unwrap();
        assert!(out.qubits <= out.spins);
        assert!(out.qubits * 3 >= out.spins);
        assert_eq!(out.restarts.len(), 1);
        let opt = solve_exact(&ip, &OracleConfig::default()).unwrap().optimum.unwrap();
        let magic = out.magic.as_ref().unwrap();
        assert!(magic.feasible);
        assert!(magic.objective <= opt);
        if out.best.feasible {
            assert!(ip.evaluate(&out.best.assignment).unwrap().feasible);
        }
        let again = run_qrao(&ip, None, &quick(5)).unwrap();
        assert_eq!(out.to_json_value(), again.to_json_value());
    }
}
