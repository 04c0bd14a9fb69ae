use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qrelax::encode::binarize;
use qrelax::harness::{self, Experiment, ExperimentConfig};
use qrelax::model::{build_mkp, build_procurement, generate_mkp, generate_procurement, IntegerProgram, MkpParams, ProcurementParams};
use qrelax::oracle::{solve_exact, OracleConfig, OracleStatus};
use qrelax::presolve::{fix_variables, solve_lp, FixingPolicy, LpStatus, Reduction};
use qrelax::rational::format as fmt_rational;
use qrelax::sim::{AnsatzSpec, Entanglement, Family};
use qrelax::variational::{solve, EvalBudget, Method, SolverConfig};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qrelax", version, about = "Quantum-relaxation solver for small integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Mkp,
    Procurement,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Qrao,
    Qaoa,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance as JSON.
    Generate {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// MKP only: fix the number of bins.
        #[arg(long)]
        bins: Option<usize>,
        /// MKP only: fix the number of items.
        #[arg(long)]
        items: Option<usize>,
    },
    /// Binarize, solve the LP relaxation and fix variables.
    Presolve {
        #[arg(long = "in")]
        input: PathBuf,
        /// `delta:<d>`, `percent:<p>` or `random:<p>`.
        #[arg(long)]
        policy: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run QRAO or QAOA on an instance.
    Solve {
        #[arg(long, value_enum)]
        method: SolveMethod,
        #[arg(long = "in")]
        input: PathBuf,
        /// QRAO ansatz family; QAOA always uses its own ansatz.
        #[arg(long, default_value = "brickwork")]
        ansatz: String,
        /// Defaults to 8 for QRAO and 5 for QAOA.
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, default_value = "linear")]
        entanglement: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Fix variables with this policy before solving.
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Evaluation budget per restart, regardless of qubit count.
        #[arg(long)]
        max_evals: Option<usize>,
    },
    /// Exact optimum by enumeration or branch and bound.
    Exact {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Run one of the seeded experiments and write its reports.
    Bench {
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Override the experiment's instance count.
        #[arg(long)]
        instances: Option<usize>,
        /// Evaluation budget per restart for every solver, regardless of qubit count.
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
    },
}

fn read_program(path: &Path) -> Result<IntegerProgram> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    IntegerProgram::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn presolve(ip: &IntegerProgram, policy: FixingPolicy, seed: u64) -> Result<(Reduction, f64)> {
    let (binary, _) = binarize(ip);
    let lp = solve_lp(&binary)?;
    if lp.status != LpStatus::Optimal {
        bail!("LP relaxation is {:?}", lp.status);
    }
    let objective = lp.objective;
    Ok((fix_variables(&binary, &lp, policy, seed)?, objective))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { problem, seed, out, bins, items } => {
            let ip = match problem {
                Problem::Mkp => {
                    let mut params = MkpParams::default();
                    if let Some(b) = bins {
                        params.bins = b..=b;
                    }
                    if let Some(i) = items {
                        params.items = i..=i;
                    }
                    build_mkp(&generate_mkp(seed, &params)?.instance)?
                }
                Problem::Procurement => {
                    if bins.is_some() || items.is_some() {
                        bail!("--bins and --items only apply to mkp");
                    }
                    build_procurement(&generate_procurement(seed, &ProcurementParams::default())?.instance)?
                }
            };
            fs::write(&out, ip.to_json()).with_context(|| format!("writing {}", out.display()))?;
            println!("{}: {} variables, {} constraints", out.display(), ip.num_vars(), ip.constraints.len());
        }
        Command::Presolve { input, policy, seed, out } => {
            let ip = read_program(&input)?;
            let policy: FixingPolicy = policy.parse()?;
            let (reduction, lp_objective) = presolve(&ip, policy, seed)?;
            let mut value = reduction.to_json_value();
            value["lp_objective"] = json!(lp_objective);
            write_json(&out, &value)?;
            println!(
                "{}: fixed {} of {} binaries, {} remain",
                out.display(),
                reduction.fixed.len(),
                reduction.original_vars,
                reduction.residual.num_vars()
            );
        }
        Command::Solve { method, input, ansatz, layers, entanglement, seed, report, policy, shots, restarts, max_evals } => {
            let ip = read_program(&input)?;
            let (method, mut config) = match method {
                SolveMethod::Qrao => (Method::Qrao, SolverConfig::qrao(seed)),
                SolveMethod::Qaoa => (Method::Qaoa, SolverConfig::qaoa(seed)),
            };
            if method == Method::Qrao {
                let family: Family = ansatz.parse()?;
                if family == Family::Qaoa {
                    bail!("the qaoa ansatz needs --method qaoa");
                }
                let entanglement: Entanglement = entanglement.parse()?;
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
            let reduction = match policy {
                Some(p) => Some(presolve(&ip, p.parse()?, seed)?.0),
                None => None,
            };
            let outcome = solve(method, &ip, reduction.as_ref(), &config)?;
            let best = &outcome.best;
            println!(
                "{method}: {} qubits, {} spins, best objective {} ({})",
                outcome.qubits,
                outcome.spins,
                fmt_rational(&best.objective),
                if best.feasible { "feasible" } else { "infeasible" }
            );
            if let Some(path) = report {
                let value = json!({
                    "version": harness::REPORT_VERSION,
                    "input": input.display().to_string(),
                    "config": config.to_json_value(),
                    "reduction": reduction.as_ref().map(|r| json!({
                        "policy": r.policy,
                        "fixed": r.fixed.len(),
                        "residual_vars": r.residual.num_vars(),
                    })),
                    "outcome": outcome.to_json_value(),
                });
                write_json(&path, &value)?;
            }
        }
        Command::Exact { input, node_budget } => {
            let ip = read_program(&input)?;
            let mut config = OracleConfig::default();
            if let Some(b) = node_budget {
                config.node_budget = b;
            }
            let result = solve_exact(&ip, &config)?;
            let value = json!({
                "status": result.status,
                "optimum": result.optimum.as_ref().map(fmt_rational),
                "assignment": result.argmax,
                "nodes": result.nodes_explored,
                "method": result.method,
            });
            println!("{}", serde_json::to_string_pretty(&value)?);
            if result.status == OracleStatus::Unsolved {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { experiment, seed, out, instances, max_evals, restarts } => {
            let experiment: Experiment = experiment.parse()?;
            let mut config = ExperimentConfig::new(experiment, seed);
            if let Some(n) = instances {
                config.instances = n;
            }
            for solver in [&mut config.qrao, &mut config.qaoa] {
                if let Some(e) = max_evals {
                    solver.budget = EvalBudget::uniform(e);
                }
                if let Some(r) = restarts {
                    solver.restarts = r;
                }
            }
            let report = harness::run(&config)?;
            report.write(&out)?;
            for (method, agg) in &report.aggregates {
                println!(
                    "{method}: {}/{} feasible, {} optimal, {} skipped, {} failed",
                    agg.feasible, agg.rows, agg.optimal, agg.skipped, agg.failed
                );
            }
            if !report.all_completed() {
                eprintln!("some rows failed; see {}", out.join("rows.csv").display());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
