//! Python bindings. Programs and reports cross the boundary as JSON; results come back as dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use qrelax::encode::binarize;
use qrelax::harness::{self, Experiment, ExperimentConfig};
use qrelax::model::{build_mkp, build_procurement, generate_mkp, generate_procurement, IntegerProgram, MkpParams, ProcurementParams};
use qrelax::oracle::{solve_exact, OracleConfig};
use qrelax::presolve::{fix_variables, solve_lp, FixingPolicy, LpStatus, Reduction};
use qrelax::rational::format as fmt_rational;
use qrelax::sim::{AnsatzSpec, Entanglement, Family};
use qrelax::variational::{solve as run_solver, EvalBudget, Method, SolverConfig};
use serde_json::{json, Value};
use std::path::PathBuf;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "json")?.call_method1("loads", (value.to_string(),))
}

fn parse(program: &str) -> PyResult<IntegerProgram> {
    IntegerProgram::from_json(program).map_err(err)
}

fn reduce(ip: &IntegerProgram, policy: &str, seed: u64) -> Result<(Reduction, f64), String> {
    let policy: FixingPolicy = policy.parse().map_err(|e: qrelax::presolve::PresolveError| e.to_string())?;
    let (binary, _) = binarize(ip);
    let lp = solve_lp(&binary).map_err(|e| e.to_string())?;
    if lp.status != LpStatus::Optimal {
        return Err(format!("LP relaxation is {:?}", lp.status));
    }
    let objective = lp.objective;
    Ok((fix_variables(&binary, &lp, policy, seed).map_err(|e| e.to_string())?, objective))
}

/// Seeded instance as a JSON string. `problem` is `"mkp"` or `"procurement"`.
#[pyfunction]
#[pyo3(signature = (problem, seed=0, bins=None, items=None))]
fn generate(problem: &str, seed: u64, bins: Option<usize>, items: Option<usize>) -> PyResult<String> {
    let ip = match problem {
        "mkp" => {
            let mut params = MkpParams::default();
            if let Some(b) = bins {
                params.bins = b..=b;
            }
            if let Some(i) = items {
                params.items = i..=i;
            }
            build_mkp(&generate_mkp(seed, &params).map_err(err)?.instance).map_err(err)?
        }
        "procurement" => build_procurement(&generate_procurement(seed, &ProcurementParams::default()).map_err(err)?.instance).map_err(err)?,
        other => return Err(err(format!("unknown problem `{other}` (expected mkp or procurement)"))),
    };
    Ok(ip.to_json())
}

/// Objective value and feasibility of an assignment.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, program: &str, assignment: Vec<i64>) -> PyResult<Bound<'py, PyAny>> {
    let ip = parse(program)?;
    let e = ip.evaluate(&assignment).map_err(err)?;
    to_py(py, &json!({
        "objective": fmt_rational(&e.objective),
        "feasible": e.feasible,
        "violations": e.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    }))
}

/// Exact optimum; `optimum` is an exact rational string.
#[pyfunction]
#[pyo3(signature = (program, node_budget=None))]
fn exact<'py>(py: Python<'py>, program: &str, node_budget: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let ip = parse(program)?;
    let mut config = OracleConfig::default();
    if let Some(b) = node_budget {
        config.node_budget = b;
    }
    let r = py.detach(|| solve_exact(&ip, &config)).map_err(err)?;
    to_py(py, &json!({
        "status": r.status,
        "optimum": r.optimum.as_ref().map(fmt_rational),
        "assignment": r.argmax,
        "nodes": r.nodes_explored,
    }))
}

/// `(QUBO variables, QRAO qubits)` after binarization.
#[pyfunction]
fn qubit_counts(program: &str) -> PyResult<(usize, usize)> {
    harness::qubit_counts(&parse(program)?).map_err(err)
}

/// Binarize, solve the LP relaxation and fix variables with `policy` (`"percent:0.9"`, ...).
#[pyfunction]
#[pyo3(signature = (program, policy, seed=0))]
fn presolve<'py>(py: Python<'py>, program: &str, policy: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let ip = parse(program)?;
    let (reduction, lp_objective) = reduce(&ip, policy, seed).map_err(err)?;
    let mut value = reduction.to_json_value();
    value["lp_objective"] = json!(lp_objective);
    to_py(py, &value)
}

/// QRAO or QAOA on `program`, optionally after LP fixing with `policy`.
#[pyfunction]
#[pyo3(signature = (program, method="qrao", ansatz="brickwork", layers=None, entanglement="linear", seed=0, shots=None, restarts=None, max_evals=None, policy=None))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    program: &str,
    method: &str,
    ansatz: &str,
    layers: Option<usize>,
    entanglement: &str,
    seed: u64,
    shots: Option<usize>,
    restarts: Option<usize>,
    max_evals: Option<usize>,
    policy: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let ip = parse(program)?;
    let (method, mut config) = match method {
        "qrao" => (Method::Qrao, SolverConfig::qrao(seed)),
        "qaoa" => (Method::Qaoa, SolverConfig::qaoa(seed)),
        other => return Err(err(format!("unknown method `{other}` (expected qrao or qaoa)"))),
    };
    if method == Method::Qrao {
        let family: Family = ansatz.parse().map_err(err)?;
        let entanglement: Entanglement = entanglement.parse().map_err(err)?;
        config.ansatz = AnsatzSpec { family, entanglement, seed: qrelax::seed::derive(seed, "axes", 0), ..config.ansatz };
    }
    if let Some(l) = layers {
        config.ansatz.layers = l;
    }
    if let Some(s) = shots {
        config.shots = s;
    }
    if let Some(r) = restarts {
        config.restarts = r;
    }
    if let Some(e) = max_evals {
        config.budget = EvalBudget::uniform(e);
    }
    let reduction = policy.map(|p| reduce(&ip, p, seed)).transpose().map_err(err)?.map(|r| r.0);
    let outcome = py.detach(|| run_solver(method, &ip, reduction.as_ref(), &config)).map_err(err)?;
    to_py(py, &outcome.to_json_value())
}

/// Runs an experiment (`"ansatz"`, `"mkp"` or `"lr"`); writes reports to `out` when given and
/// returns the report dict.
#[pyfunction]
#[pyo3(name = "bench", signature = (experiment, seed=0, instances=None, out=None))]
fn run_bench<'py>(py: Python<'py>, experiment: &str, seed: u64, instances: Option<usize>, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let experiment: Experiment = experiment.parse().map_err(err)?;
    let mut config = ExperimentConfig::new(experiment, seed);
    if let Some(n) = instances {
        config.instances = n;
    }
    let report = py.detach(|| harness::run(&config)).map_err(err)?;
    if let Some(dir) = out {
        report.write(&dir).map_err(err)?;
    }
    to_py(py, &report.to_json_value())
}

#[pymodule(name = "qrelax")]
fn qrelax_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_counts, m)?)?;
    m.add_function(wrap_pyfunction!(presolve, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    Ok(())
}
