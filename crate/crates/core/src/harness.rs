//! Seeded experiments: ansatz study, QAOA-vs-QRAO on MKPs, LP-fixing on procurement.
//!
//! Every experiment produces [`Row`]s plus aggregates recomputed from them. `report.json` is a pure
//! function of the configuration; wall times only go to `rows.csv`.

use crate::encode::{EncodeError, assign_qubits, binarize, build_instance_graph, color_ldf, to_ising, to_qubo, Penalty};
use crate::model::{
    build_mkp, build_procurement, generate_mkp, generate_procurement, IntegerProgram, MkpParams, ProcurementParams, Sense,
};
use crate::oracle::{optimality_gap, solve_exact, OracleConfig, OracleStatus};
use crate::presolve::{fix_variables, solve_lp, FixingPolicy, LpStatus, PresolveError, Reduction};
use crate::rational::{format as fmt_rational, Rational};
use crate::rounding::Selection;
use crate::seed;
use crate::sim::{AnsatzSpec, Entanglement, Family};
use crate::variational::{run_qaoa, run_qrao, SolveError, SolveOutcome, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

/// A solution counts as optimal when its relative gap is below this.
pub const OPTIMAL_GAP: f64 = 5e-4;
pub const REPORT_VERSION: u32 = 1;
/// Magic shots per ansatz-study run. With the default 1 024 every cell solves every 3x3 instance.
pub const ANSATZ_SHOTS: usize = 32;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown experiment `{0}` (expected ansatz, mkp or lr)")]
    UnknownExperiment(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Ansatz,
    Mkp,
    Lr,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Ansatz => "ansatz",
            Experiment::Mkp => "mkp",
            Experiment::Lr => "lr",
        })
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "ansatz" | "ansatz_study" => Ok(Experiment::Ansatz),
            "mkp" | "mkp_compare" => Ok(Experiment::Mkp),
            "lr" | "lr_procurement" => Ok(Experiment::Lr),
            other => Err(HarnessError::UnknownExperiment(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub instances: usize,
    pub seed: u64,
    pub qrao: SolverConfig,
    pub qaoa: SolverConfig,
    /// Ansatz study grid.
    pub families: Vec<Family>,
    pub entanglements: Vec<Entanglement>,
    pub layers: Vec<usize>,
    /// LP-fixing policies for the procurement study.
    pub policies: Vec<FixingPolicy>,
    /// Procurement instances whose percent-0.85 residual needs more QRAO qubits are redrawn.
    pub residual_qubit_cap: usize,
    pub mkp: MkpParams,
    pub procurement: ProcurementParams,
    pub oracle_node_budget: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        let base = Self {
            experiment,
            instances: 20,
            seed,
            qrao: SolverConfig::qrao(seed),
            qaoa: SolverConfig { qubit_cap: 18, ..SolverConfig::qaoa(seed) },
            families: vec![Family::Brickwork, Family::Su2, Family::Pauli2design, Family::Realamp],
            entanglements: Entanglement::ALL.to_vec(),
            layers: (0..=4).collect(),
            policies: vec![
                FixingPolicy::Delta { delta: 0.1 },
                FixingPolicy::Percentage { percent: 0.9 },
                FixingPolicy::Percentage { percent: 0.85 },
                FixingPolicy::Random { percent: 0.9 },
            ],
            residual_qubit_cap: 14,
            mkp: MkpParams::default(),
            procurement: ProcurementParams::default(),
            oracle_node_budget: OracleConfig::default().node_budget,
        };
        match experiment {
            Experiment::Ansatz => Self {
                mkp: MkpParams::sized(3, 3),
                qrao: SolverConfig { shots: ANSATZ_SHOTS, ..base.qrao },
                ..base
            },
            Experiment::Mkp => Self { instances: 100, ..base },
            Experiment::Lr => Self { instances: 10, ..base },
        }
    }

    fn instance_seed(&self, k: usize) -> u64 {
        seed::derive(self.seed, &format!("{}-instance", self.experiment), k as u64)
    }

    fn solver_seed(&self, k: usize) -> u64 {
        seed::derive(self.seed, &format!("{}-solver", self.experiment), k as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Skipped,
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped => "skipped",
            RowStatus::Failed => "failed",
        })
    }
}

/// One (instance, method) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub instance: usize,
    pub seed: u64,
    /// `qaoa`, `qrao-pauli`, `qrao-magic`, an ansatz label, or `qrao@<policy>`.
    pub method: String,
    pub status: RowStatus,
    pub reason: Option<String>,
    /// Binary variables of the binarized original program.
    pub binary_vars: usize,
    pub fixed_vars: Option<usize>,
    pub residual_vars: Option<usize>,
    pub qubo_vars: Option<usize>,
    pub qubits: Option<usize>,
    pub feasible: Option<bool>,
    pub objective: Option<String>,
    pub optimum: Option<String>,
    pub gap: Option<f64>,
    pub optimal: Option<bool>,
    pub evals: Option<usize>,
    /// Picked assignment of the original program (report.json only).
    pub assignment: Option<Vec<i64>>,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl Row {
    fn new(instance: usize, seed: u64, method: impl Into<String>, binary_vars: usize) -> Self {
        Self {
            instance,
            seed,
            method: method.into(),
            status: RowStatus::Ok,
            reason: None,
            binary_vars,
            fixed_vars: None,
            residual_vars: None,
            qubo_vars: None,
            qubits: None,
            feasible: None,
            objective: None,
            optimum: None,
            gap: None,
            optimal: None,
            evals: None,
            assignment: None,
            wall_ms: 0.0,
        }
    }

    fn skip(mut self, reason: impl Into<String>) -> Self {
        self.status = RowStatus::Skipped;
        self.reason = Some(reason.into());
        self
    }

    /// The pipeline completed but no feasible point exists for it to find.
    fn infeasible(mut self, reason: impl Into<String>) -> Self {
        self.feasible = Some(false);
        self.reason = Some(reason.into());
        self
    }

    fn fail(mut self, reason: impl Into<String>) -> Self {
        self.status = RowStatus::Failed;
        self.reason = Some(reason.into());
        self
    }

    /// Records a solver pick against the reference optimum.
    fn score(mut self, pick: &Selection, optimum: Option<&Rational>, outcome: &SolveOutcome, sense: Sense) -> Self {
        self.qubo_vars = Some(outcome.spins);
        self.qubits = Some(outcome.qubits);
        self.evals = Some(outcome.restarts.iter().map(|r| r.evals).sum());
        self.feasible = Some(pick.feasible);
        self.assignment = Some(pick.assignment.clone());
        if pick.feasible {
            self.objective = Some(fmt_rational(&pick.objective));
            if let Some(opt) = optimum {
                let gap = optimality_gap(&pick.objective, opt, sense);
                self.gap = Some(gap);
                self.optimal = Some(gap < OPTIMAL_GAP);
            }
        }
        self
    }
}

/// Per-method summary. Feasibility and optimality are over all rows, skipped and failed included;
/// the mean gap is over feasible rows with a known optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub rows: usize,
    pub attempted: usize,
    pub skipped: usize,
    pub failed: usize,
    pub feasible: usize,
    pub optimal: usize,
    pub feasible_pct: Option<f64>,
    pub optimal_pct: Option<f64>,
    pub mean_gap: Option<f64>,
}

pub fn aggregate(rows: &[Row]) -> BTreeMap<String, Aggregate> {
    let mut by_method: BTreeMap<String, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        by_method.entry(r.method.clone()).or_default().push(r);
    }
    by_method
        .into_iter()
        .map(|(method, rows)| {
            let skipped = rows.iter().filter(|r| r.status == RowStatus::Skipped).count();
            let failed = rows.iter().filter(|r| r.status == RowStatus::Failed).count();
            let attempted = rows.len() - skipped;
            let feasible = rows.iter().filter(|r| r.feasible == Some(true)).count();
            let optimal = rows.iter().filter(|r| r.optimal == Some(true)).count();
            let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
            let pct = |k: usize| (!rows.is_empty()).then(|| 100.0 * k as f64 / rows.len() as f64);
            let agg = Aggregate {
                rows: rows.len(),
                attempted,
                skipped,
                failed,
                feasible,
                optimal,
                feasible_pct: pct(feasible),
                optimal_pct: pct(optimal),
                mean_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
            };
            (method, agg)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub aggregates: BTreeMap<String, Aggregate>,
    /// Experiment-specific extras (grid, qubit pairs, generation notes).
    pub extras: Value,
    /// `(instance, qaoa qubits, qrao qubits)` for the qubit-count scatter.
    pub qubit_pairs: Vec<(usize, usize, usize)>,
}

impl ExperimentReport {
    pub fn to_json_value(&self) -> Value {
        json!({
            "version": REPORT_VERSION,
            "experiment": self.config.experiment,
            "config": self.config,
            "optimal_gap_threshold": OPTIMAL_GAP,
            "denominators": {
                "feasible_pct": "feasible rows / all rows (skipped and failed rows count as not feasible)",
                "optimal_pct": "rows with gap < optimal_gap_threshold / all rows",
                "mean_gap": "mean over feasible rows with a known optimum",
            },
            "aggregates": self.aggregates,
            "extras": self.extras,
            "rows": self.rows,
        })
    }

    /// Every row completed or was skipped with a reason.
    pub fn all_completed(&self) -> bool {
        self.rows.iter().all(|r| r.status != RowStatus::Failed)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes") + "\n"
    }

    /// `report.json`, `rows.csv`, and for the MKP comparison `fig2.csv` and `fig2.svg`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json_string())?;
        let mut w = csv::Writer::from_path(dir.join("rows.csv"))?;
        w.write_record([
            "instance", "seed", "method", "status", "reason", "binary_vars", "fixed_vars", "residual_vars", "qubo_vars",
            "qubits", "feasible", "objective", "optimum", "gap", "optimal", "evals", "wall_ms",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.instance.to_string(),
                r.seed.to_string(),
                r.method.clone(),
                r.status.to_string(),
                opt(r.reason.clone()),
                r.binary_vars.to_string(),
                opt(r.fixed_vars.map(|v| v.to_string())),
                opt(r.residual_vars.map(|v| v.to_string())),
                opt(r.qubo_vars.map(|v| v.to_string())),
                opt(r.qubits.map(|v| v.to_string())),
                opt(r.feasible.map(|v| v.to_string())),
                opt(r.objective.clone()),
                opt(r.optimum.clone()),
                opt(r.gap.map(|v| v.to_string())),
                opt(r.optimal.map(|v| v.to_string())),
                opt(r.evals.map(|v| v.to_string())),
                format!("{:.1}", r.wall_ms),
            ])?;
        }
        w.flush()?;
        if !self.qubit_pairs.is_empty() {
            let mut w = csv::Writer::from_path(dir.join("fig2.csv"))?;
            w.write_record(["instance", "qaoa_qubits", "qrao_qubits"])?;
            for (k, qaoa, qrao) in &self.qubit_pairs {
                w.write_record([k.to_string(), qaoa.to_string(), qrao.to_string()])?;
            }
            w.flush()?;
            fs::write(dir.join("fig2.svg"), scatter_svg(&self.qubit_pairs))?;
        }
        Ok(())
    }
}

/// QAOA qubits on x, QRAO qubits on y, with the diagonal for reference.
pub fn scatter_svg(pairs: &[(usize, usize, usize)]) -> String {
    let max = pairs.iter().map(|p| p.1.max(p.2)).max().unwrap_or(1).max(1) as f64;
    let (size, pad) = (400.0, 40.0);
    let scale = |v: usize| v as f64 / max * (size - 2.0 * pad);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{pad}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{pad}\" stroke=\"#bbb\" stroke-dasharray=\"4\"/>\n\
         <line x1=\"{pad}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{y0}\" x2=\"{pad}\" y2=\"{pad}\" stroke=\"black\"/>\n\
         <text x=\"{mid}\" y=\"{label_y}\" text-anchor=\"middle\" font-size=\"12\">QAOA qubits (max {max})</text>\n\
         <text x=\"12\" y=\"{mid}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 12 {mid})\">QRAO qubits</text>\n",
        y0 = size - pad,
        x1 = size - pad,
        mid = size / 2.0,
        label_y = size - 10.0,
    );
    for &(_, qaoa, qrao) in pairs {
        svg.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n",
            pad + scale(qaoa),
            size - pad - scale(qrao)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    match config.experiment {
        Experiment::Ansatz => run_ansatz_study(config),
        Experiment::Mkp => run_mkp_compare(config),
        Experiment::Lr => run_lr_procurement(config),
    }
}

/// The seeded MKP suite of an experiment.
pub fn mkp_suite(config: &ExperimentConfig) -> Result<Vec<(u64, IntegerProgram)>, HarnessError> {
    (0..config.instances)
        .map(|k| {
            let s = config.instance_seed(k);
            let g = generate_mkp(s, &config.mkp).map_err(|e| HarnessError::Generation(e.to_string()))?;
            let ip = build_mkp(&g.instance).map_err(|e| HarnessError::Generation(e.to_string()))?;
            Ok((s, ip))
        })
        .collect()
}

/// `(QUBO variables, QRAO qubits)` of a program without fixing.
pub fn qubit_counts(ip: &IntegerProgram) -> Result<(usize, usize), crate::encode::EncodeError> {
    let (binary, _) = binarize(ip);
    residual_qubits(&binary)
}

/// `(QUBO variables, QRAO qubits)` of an already binary program.
pub fn residual_qubits(binary: &IntegerProgram) -> Result<(usize, usize), crate::encode::EncodeError> {
    let ising = to_ising(&to_qubo(binary, Penalty::Auto)?.qubo);
    if ising.n == 0 {
        return Ok((0, 0));
    }
    let layout = assign_qubits(&color_ldf(&build_instance_graph(&ising)));
    Ok((ising.n, layout.qubit_count))
}

fn exact_optimum(ip: &IntegerProgram, budget: u64) -> Result<Rational, String> {
    let result = solve_exact(ip, &OracleConfig { node_budget: budget, ..Default::default() }).map_err(|e| e.to_string())?;
    match result.status {
        OracleStatus::Optimal => Ok(result.optimum.expect("optimal result carries its optimum")),
        OracleStatus::Infeasible => Err("instance is infeasible".into()),
        OracleStatus::Unsolved => Err(format!("oracle node budget {budget} exhausted")),
    }
}

fn solve_error_row(row: Row, err: SolveError) -> Row {
    match err {
        SolveError::Capacity { .. } => row.skip(err.to_string()),
        SolveError::Encode(EncodeError::InfeasibleOverBox { .. }) => row.infeasible(err.to_string()),
        other => row.fail(other.to_string()),
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Counts instances solved to within [`OPTIMAL_GAP`] for every ansatz cell, scored on magic rounding.
pub fn run_ansatz_study(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let suite = mkp_suite(config)?;
    let mut cells: Vec<AnsatzSpec> = Vec::new();
    for &family in &config.families {
        let entanglements: &[Entanglement] = if family == Family::Brickwork { &[Entanglement::Linear] } else { &config.entanglements };
        for &entanglement in entanglements {
            for &layers in &config.layers {
                cells.push(AnsatzSpec { family, layers, entanglement, seed: 0 });
            }
        }
    }
    let per_instance: Vec<Vec<Row>> = suite
        .par_iter()
        .enumerate()
        .map(|(k, (s, ip))| {
            let binary_vars = binarize(ip).0.num_vars();
            let optimum = exact_optimum(ip, config.oracle_node_budget);
            cells
                .iter()
                .map(|spec| {
                    let t = Instant::now();
                    let row = Row::new(k, *s, spec.label(), binary_vars);
                    let mut row = match &optimum {
                        Err(reason) => row.fail(reason.clone()),
                        Ok(opt) => {
                            let solver = SolverConfig {
                                ansatz: AnsatzSpec { seed: seed::derive(config.solver_seed(k), "axes", 0), ..*spec },
                                seed: config.solver_seed(k),
                                ..config.qrao
                            };
                            let mut row = row;
                            row.optimum = Some(fmt_rational(opt));
                            match run_qrao(ip, None, &solver) {
                                Ok(out) => {
                                    let pick = out.magic.as_ref().expect("QRAO reports magic rounding");
                                    row.score(pick, Some(opt), &out, ip.sense)
                                }
                                Err(e) => solve_error_row(row, e),
                            }
                        }
                    };
                    row.wall_ms = elapsed_ms(t);
                    row
                })
                .collect()
        })
        .collect();
    let rows: Vec<Row> = per_instance.into_iter().flatten().collect();
    let aggregates = aggregate(&rows);

    let mut grid = Vec::new();
    for &family in &config.families {
        let entanglements: &[Entanglement] = if family == Family::Brickwork { &[Entanglement::Linear] } else { &config.entanglements };
        for &entanglement in entanglements {
            let solved: Vec<usize> = config
                .layers
                .iter()
                .map(|&layers| {
                    let label = AnsatzSpec { family, layers, entanglement, seed: 0 }.label();
                    aggregates.get(&label).map_or(0, |a| a.optimal)
                })
                .collect();
            grid.push(json!({
                "family": family.to_string(),
                "entanglement": if family == Family::Brickwork { Value::Null } else { json!(entanglement.to_string()) },
                "solved": solved,
            }));
        }
    }
    let best_of = |family: Family| {
        grid.iter()
            .filter(|g| g["family"] == family.to_string())
            .flat_map(|g| g["solved"].as_array().cloned().unwrap_or_default())
            .filter_map(|v| v.as_u64())
            .max()
    };
    let realamp_lowest = best_of(Family::Realamp).map(|ra| {
        config.families.iter().filter(|&&f| f != Family::Realamp).all(|&f| best_of(f).is_none_or(|other| ra <= other))
    });
    let extras = json!({
        "layers": config.layers,
        "grid": grid,
        "realamp_lowest": realamp_lowest,
        "scored_by": "best magic-rounding shot",
    });
    Ok(ExperimentReport { config: config.clone(), rows, aggregates, extras, qubit_pairs: Vec::new() })
}

/// QAOA, QRAO+Pauli and QRAO+magic on the MKP suite, plus the paired qubit counts.
pub fn run_mkp_compare(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let suite = mkp_suite(config)?;
    let per_instance: Vec<(Vec<Row>, (usize, usize, usize))> = suite
        .par_iter()
        .enumerate()
        .map(|(k, (s, ip))| {
            let binary_vars = binarize(ip).0.num_vars();
            let (qaoa_qubits, qrao_qubits) = qubit_counts(ip).expect("MKP rows are satisfiable over the box");
            let optimum = exact_optimum(ip, config.oracle_node_budget);
            let mut rows = Vec::new();

            let t = Instant::now();
            let base = Row::new(k, *s, "qaoa", binary_vars);
            let mut row = match &optimum {
                Err(reason) => base.fail(reason.clone()),
                Ok(opt) => {
                    let mut base = base;
                    base.optimum = Some(fmt_rational(opt));
                    base.qubo_vars = Some(qaoa_qubits);
                    base.qubits = Some(qaoa_qubits);
                    let solver = SolverConfig { seed: config.solver_seed(k), ..config.qaoa };
                    match run_qaoa(ip, None, &solver) {
                        Ok(out) => base.score(&out.best, Some(opt), &out, ip.sense),
                        Err(e) => solve_error_row(base, e),
                    }
                }
            };
            row.wall_ms = elapsed_ms(t);
            rows.push(row);

            let t = Instant::now();
            let solver = SolverConfig { seed: config.solver_seed(k), ..config.qrao };
            let qrao = optimum.as_ref().map(|_| run_qrao(ip, None, &solver));
            let wall = elapsed_ms(t);
            for (method, magic) in [("qrao-pauli", false), ("qrao-magic", true)] {
                let base = Row::new(k, *s, method, binary_vars);
                let mut row = match (&optimum, &qrao) {
                    (Err(reason), _) => base.fail(reason.clone()),
                    (Ok(opt), Ok(Ok(out))) => {
                        let mut base = base;
                        base.optimum = Some(fmt_rational(opt));
                        let pick = if magic { out.magic.as_ref() } else { out.pauli.as_ref() }.expect("QRAO reports both schemes");
                        base.score(pick, Some(opt), out, ip.sense)
                    }
                    (Ok(opt), Ok(Err(e))) => {
                        let mut base = base;
                        base.optimum = Some(fmt_rational(opt));
                        solve_error_row(base, e.clone())
                    }
                    (Ok(_), Err(_)) => unreachable!("qrao runs whenever the optimum is known"),
                };
                row.wall_ms = wall;
                rows.push(row);
            }
            (rows, (k, qaoa_qubits, qrao_qubits))
        })
        .collect();
    let qubit_pairs: Vec<(usize, usize, usize)> = per_instance.iter().map(|p| p.1).collect();
    let rows: Vec<Row> = per_instance.into_iter().flat_map(|p| p.0).collect();
    let aggregates = aggregate(&rows);
    let ratios: Vec<f64> = qubit_pairs.iter().map(|&(_, qaoa, qrao)| qrao as f64 / qaoa as f64).collect();
    let extras = json!({
        "qubit_pairs": qubit_pairs.iter().map(|&(k, qaoa, qrao)| json!({"instance": k, "qaoa": qaoa, "qrao": qrao})).collect::<Vec<_>>(),
        "mean_qubit_ratio": ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
        "qrao_never_exceeds_qaoa": qubit_pairs.iter().all(|&(_, qaoa, qrao)| qrao <= qaoa),
    });
    Ok(ExperimentReport { config: config.clone(), rows, aggregates, extras, qubit_pairs })
}

/// One procurement instance of the LP-fixing study.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcurementCase {
    pub seed: u64,
    pub program: IntegerProgram,
    pub binary: IntegerProgram,
    /// QRAO qubits of the percent-0.85 residual, when that fixing succeeds.
    pub reference_qubits: Option<usize>,
}

/// Draws procurement instances until `config.instances` have a percent-0.85 residual within
/// `config.residual_qubit_cap`; returns them with the number of rejected draws.
pub fn procurement_suite(config: &ExperimentConfig) -> Result<(Vec<ProcurementCase>, usize), HarnessError> {
    let reference = FixingPolicy::Percentage { percent: 0.85 };
    let mut cases = Vec::new();
    let mut rejected = 0;
    let mut k = 0u64;
    while cases.len() < config.instances {
        if k as usize >= 1000 * config.instances.max(1) {
            return Err(HarnessError::Generation(format!("only {} procurement instances fit the qubit cap", cases.len())));
        }
        let s = seed::derive(config.seed, "lr-instance", k);
        k += 1;
        let g = generate_procurement(s, &config.procurement).map_err(|e| HarnessError::Generation(e.to_string()))?;
        let program = build_procurement(&g.instance).map_err(|e| HarnessError::Generation(e.to_string()))?;
        let (binary, _) = binarize(&program);
        let qubits = match solve_lp(&binary) {
            Ok(lp) if lp.status == LpStatus::Optimal => match fix_variables(&binary, &lp, reference, s) {
                Ok(r) => residual_qubits(&r.residual).ok().map(|q| q.1),
                Err(_) => None,
            },
            _ => None,
        };
        if qubits.is_some_and(|q| q > config.residual_qubit_cap) {
            rejected += 1;
            continue;
        }
        cases.push(ProcurementCase { seed: s, program, binary, reference_qubits: qubits });
    }
    Ok((cases, rejected))
}

fn policy_row(case: &ProcurementCase, k: usize, policy: FixingPolicy, optimum: &Result<Rational, String>, config: &ExperimentConfig) -> Row {
    let t = Instant::now();
    let mut row = Row::new(k, case.seed, format!("qrao@{policy}"), case.binary.num_vars());
    let opt = match optimum {
        Ok(opt) => {
            row.optimum = Some(fmt_rational(opt));
            Some(opt)
        }
        Err(reason) => return row.fail(reason.clone()),
    };
    let lp = match solve_lp(&case.binary) {
        Ok(lp) if lp.status == LpStatus::Optimal => lp,
        Ok(lp) => return row.fail(format!("LP relaxation {:?}", lp.status)),
        Err(e) => return row.fail(e.to_string()),
    };
    let reduction: Reduction = match fix_variables(&case.binary, &lp, policy, seed::derive(case.seed, "fixing", 0)) {
        Ok(r) => r,
        Err(e @ PresolveError::FixingInfeasible { .. }) => return row.infeasible(e.to_string()),
        Err(e) => return row.fail(e.to_string()),
    };
    row.fixed_vars = Some(reduction.fixed.len());
    row.residual_vars = Some(reduction.residual.num_vars());
    let solver = SolverConfig { seed: config.solver_seed(k), qubit_cap: config.residual_qubit_cap, ..config.qrao };
    let mut row = match run_qrao(&case.program, Some(&reduction), &solver) {
        Ok(out) => {
            debug_assert!(!out.best.feasible || case.program.evaluate(&out.best.assignment).is_ok_and(|e| e.feasible));
            row.score(&out.best, opt, &out, case.program.sense)
        }
        Err(e) => {
            if let Ok((qubo_vars, qubits)) = residual_qubits(&reduction.residual) {
                row.qubo_vars = Some(qubo_vars);
                row.qubits = Some(qubits);
            }
            solve_error_row(row, e)
        }
    };
    row.wall_ms = elapsed_ms(t);
    row
}

/// Presolve with each policy, solve the residual with QRAO, lift and evaluate on the original.
pub fn run_lr_procurement(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let (cases, rejected) = procurement_suite(config)?;
    let per_instance: Vec<Vec<Row>> = cases
        .par_iter()
        .enumerate()
        .map(|(k, case)| {
            let optimum = exact_optimum(&case.program, config.oracle_node_budget);
            config.policies.iter().map(|&policy| policy_row(case, k, policy, &optimum, config)).collect()
        })
        .collect();
    let rows: Vec<Row> = per_instance.into_iter().flatten().collect();
    let aggregates = aggregate(&rows);
    let extras = json!({
        "rejected_draws": rejected,
        "reference_policy": "percent:0.85",
        "instances": cases.iter().enumerate().map(|(k, c)| json!({
            "instance": k,
            "seed": c.seed,
            "integer_vars": c.program.num_vars(),
            "binary_vars": c.binary.num_vars(),
            "reference_qubits": c.reference_qubits,
        })).collect::<Vec<_>>(),
    });
    Ok(ExperimentReport { config: config.clone(), rows, aggregates, extras, qubit_pairs: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::EvalBudget;

    fn tiny(experiment: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(experiment, 7);
        c.instances = 2;
        c.qrao = SolverConfig { budget: EvalBudget::uniform(40), restarts: 1, shots: 64, ..c.qrao };
        c.qaoa = SolverConfig { budget: EvalBudget::uniform(30), restarts: 1, shots: 256, qubit_cap: 14, ..c.qaoa };
        c.layers = vec![0, 1];
        c.families = vec![Family::Brickwork, Family::Realamp];
        c.entanglements = vec![Entanglement::Linear];
        c
    }

    #[test]
    fn aggregates_recompute_from_rows() {
        let mut a = Row::new(0, 1, "m", 3);
        a.feasible = Some(true);
        a.gap = Some(0.0);
        a.optimal = Some(true);
        let mut b = Row::new(1, 2, "m", 3);
        b.feasible = Some(true);
        b.gap = Some(0.5);
        b.optimal = Some(false);
        let c = Row::new(2, 3, "m", 3).skip("too big");
        let d = Row::new(3, 4, "m", 3).fail("broken");
        let agg = &aggregate(&[a, b, c, d])["m"];
        assert_eq!((agg.rows, agg.attempted, agg.skipped, agg.failed, agg.feasible, agg.optimal), (4, 3, 1, 1, 2, 1));
        assert_eq!(agg.feasible_pct, Some(50.0));
        assert_eq!(agg.mean_gap, Some(0.25));
    }

    #[test]
    fn ansatz_study_is_deterministic() {
        let config = tiny(Experiment::Ansatz);
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        assert_eq!(a.rows.len(), 2 * 4);
        for (label, agg) in &a.aggregates {
            assert!(agg.optimal <= 2, "{label}");
        }
        assert_eq!(aggregate(&a.rows), a.aggregates);
    }

    #[test]
    fn mkp_compare_rows_and_pairs() {
        let config = tiny(Experiment::Mkp);
        let report = run(&config).unwrap();
        assert_eq!(report.rows.len(), 3 * 2);
        assert_eq!(report.qubit_pairs.len(), 2);
        for &(_, qaoa, qrao) in &report.qubit_pairs {
            assert!(qrao <= qaoa);
        }
        for r in &report.rows {
            assert!(r.status != RowStatus::Skipped || r.reason.is_some());
        }
        let dir = tempfile::tempdir().unwrap();
        report.write(dir.path()).unwrap();
        for f in ["report.json", "rows.csv", "fig2.csv", "fig2.svg"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
    }

    #[test]
    fn experiment_names_parse() {
        assert_eq!("lr".parse::<Experiment>().unwrap(), Experiment::Lr);
        assert!("table".parse::<Experiment>().is_err());
    }
}
