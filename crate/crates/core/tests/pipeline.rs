use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qrelax::encode::{assign_qubits, binarize, build_instance_graph, color_ldf, relax_hamiltonian, to_ising, to_qubo, EncodeError, IsingHamiltonian, Penalty};
use qrelax::model::{IntegerProgram, LinearConstraint, Relation, Sense, Variable};
use qrelax::oracle::{solve_exact, OracleConfig, OracleStatus};
use qrelax::pauli::{Axis, PauliHamiltonian};
use qrelax::presolve::{bounds_optimum, fix_variables, solve_lp, FixingPolicy, LpStatus};
use qrelax::rational::{int, to_f64, Rational};
use qrelax::sim::{build_ansatz, AnsatzSpec};
use qrelax::variational::{optimize, Goal, OptimizerConfig};
use std::collections::BTreeMap;

fn program() -> impl Strategy<Value = IntegerProgram> {
    let var = prop_oneof![Just((0i64, 1i64)), (0i64..=1, 1i64..=3).prop_map(|(lo, w)| (lo, lo + w))];
    (prop::collection::vec(var, 1..=3), any::<bool>())
        .prop_flat_map(|(bounds, maximize)| {
            let n = bounds.len();
            let row = (prop::collection::vec(-3i64..=3, n), 0usize..3, -2i64..=6);
            (Just(bounds), Just(maximize), prop::collection::vec(-5i64..=5, n), prop::collection::vec(row, 1..=2))
        })
        .prop_map(|(bounds, maximize, objective, rows)| {
            let variables = bounds.iter().enumerate().map(|(i, &(lo, hi))| Variable::integer(i, format!("x{i}"), lo, hi)).collect();
            let constraints = rows
                .into_iter()
                .enumerate()
                .map(|(k, (mut coeffs, rel, rhs))| {
                    if coeffs.iter().all(|&c| c == 0) {
                        coeffs[0] = 1;
                    }
                    let rel = [Relation::Le, Relation::Ge, Relation::Eq][rel];
                    LinearConstraint::new(format!("r{k}"), coeffs.into_iter().enumerate().map(|(i, c)| (i, int(c))), rel, int(rhs))
                })
                .collect();
            let objective: BTreeMap<usize, Rational> = objective.into_iter().enumerate().map(|(i, c)| (i, int(c))).collect();
            let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
            IntegerProgram::new(sense, objective, constraints, variables).unwrap()
        })
}

fn brute_argmax(q: &qrelax::encode::Qubo) -> Vec<u8> {
    let mut best: Option<(Rational, Vec<u8>)> = None;
    for mask in 0..1usize << q.n {
        let x: Vec<u8> = (0..q.n).map(|i| ((mask >> i) & 1) as u8).collect();
        let v = q.value(&x);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, x));
        }
    }
    best.unwrap().1
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn qubo_argmax_is_the_integer_optimum(ip in program()) {
        let oracle = solve_exact(&ip, &OracleConfig::default()).unwrap();
        let (binary, bin) = binarize(&ip);
        let enc = match to_qubo(&binary, Penalty::Auto) {
            Ok(enc) => enc,
            Err(EncodeError::InfeasibleOverBox { .. }) => {
                prop_assert_eq!(oracle.status, OracleStatus::Infeasible);
                return Ok(());
            }
            Err(e) => panic!("{e}"),
        };
        prop_assume!(enc.num_vars() <= 16);
        let x = brute_argmax(&enc.qubo);
        let eval = ip.evaluate(&bin.decode(&enc.decision_bits(&x))).unwrap();
        match oracle.status {
            OracleStatus::Optimal => {
                prop_assert!(eval.feasible);
                prop_assert_eq!(Some(eval.objective), oracle.optimum);
            }
            OracleStatus::Infeasible => prop_assert!(!eval.feasible),
            OracleStatus::Unsolved => unreachable!("tiny boxes always close"),
        }
    }

    #[test]
    fn lp_relaxation_bounds_the_optimum(ip in program()) {
        let oracle = solve_exact(&ip, &OracleConfig::default()).unwrap();
        let lp = solve_lp(&ip).unwrap();
        if let Some(opt) = oracle.optimum {
            prop_assert_eq!(lp.status, LpStatus::Optimal);
            prop_assert!(bounds_optimum(ip.sense, lp.objective, &opt, 1e-9), "lp {} ilp {}", lp.objective, to_f64(&opt));
        }
    }

    #[test]
    fn feasible_residual_points_lift_to_feasible_points(ip in program(), percent in 0.3f64..0.8) {
        let (binary, _) = binarize(&ip);
        let lp = solve_lp(&binary).unwrap();
        prop_assume!(lp.status == LpStatus::Optimal);
        let Ok(reduction) = fix_variables(&binary, &lp, FixingPolicy::Percentage { percent }, 0) else { return Ok(()) };
        let residual = &reduction.residual;
        prop_assume!(residual.num_vars() <= 10);
        for mask in 0..1usize << residual.num_vars() {
            let r: Vec<i64> = (0..residual.num_vars()).map(|i| ((mask >> i) & 1) as i64).collect();
            let inner = residual.evaluate(&r).unwrap();
            let full = binary.evaluate(&reduction.lift_solution(&r)).unwrap();
            prop_assert_eq!(inner.feasible, full.feasible);
            prop_assert_eq!(inner.objective + reduction.offset, full.objective);
        }
    }
}

fn dense(h: &PauliHamiltonian) -> DMatrix<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let factor = |a: Option<Axis>| match a {
        None => DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
        Some(Axis::X) => DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        Some(Axis::Y) => DMatrix::from_row_slice(2, 2, &[zero, -Complex64::i(), Complex64::i(), zero]),
        Some(Axis::Z) => DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
    };
    let dim = 1 << h.n_qubits;
    let mut m = DMatrix::identity(dim, dim) * Complex64::new(h.offset, 0.0);
    for term in &h.terms {
        let mut t = DMatrix::identity(1, 1);
        for q in (0..h.n_qubits).rev() {
            t = t.kronecker(&factor(term.ops.iter().find(|o| o.0 == q).map(|o| o.1)));
        }
        m += t * Complex64::new(term.coeff, 0.0);
    }
    m
}

fn small_ising() -> impl Strategy<Value = IsingHamiltonian> {
    (1usize..=3).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        (prop::collection::vec(-4i64..=4, n), prop::collection::vec(-4i64..=4, pairs.len()), Just(pairs)).prop_map(move |(h, j, pairs)| {
            IsingHamiltonian {
                n,
                h: h.into_iter().enumerate().filter(|(_, v)| *v != 0).map(|(i, v)| (i, int(v))).collect(),
                j: pairs.iter().zip(j).filter(|(_, v)| *v != 0).map(|(&p, v)| (p, int(v))).collect(),
                offset: int(0),
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn relaxed_maximum_eigenvalue_bounds_the_classical_maximum(ising in small_ising()) {
        let layout = assign_qubits(&color_ldf(&build_instance_graph(&ising)));
        let h = relax_hamiltonian(&ising, &layout).unwrap();
        let eig = nalgebra::SymmetricEigen::new(dense(&h)).eigenvalues;
        let lambda_max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let classical = (0..1usize << ising.n)
            .map(|m| to_f64(&ising.value_of_bits(&(0..ising.n).map(|i| ((m >> i) & 1) as u8).collect::<Vec<_>>())))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lambda_max >= classical - 1e-9, "λmax {} < classical {}", lambda_max, classical);

        let circuit = build_ansatz(&AnsatzSpec::brickwork(3), layout.qubit_count, None).unwrap();
        let found = optimize(&circuit, &h, &OptimizerConfig { max_evals: 300, ..Default::default() }, Goal::Maximize).unwrap();
        prop_assert!(found.best_value <= lambda_max + 1e-9);
    }
}

#[test]
fn binarized_mkp_qubo_matches_ising_on_every_point() {
    let ip = qrelax::model::build_mkp(&qrelax::model::generate_mkp(9, &qrelax::model::MkpParams::sized(2, 3)).unwrap().instance).unwrap();
    let enc = to_qubo(&binarize(&ip).0, Penalty::Auto).unwrap();
    let ising = to_ising(&enc.qubo);
    for mask in 0..1usize << enc.num_vars() {
        let x: Vec<u8> = (0..enc.num_vars()).map(|i| ((mask >> i) & 1) as u8).collect();
        assert_eq!(enc.qubo.value(&x), ising.value_of_bits(&x));
    }
}
