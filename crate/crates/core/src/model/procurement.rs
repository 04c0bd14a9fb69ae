use super::{IntegerProgram, LinearConstraint, ModelError, Relation, Sense, Variable};
use crate::encode::bit_width;
use crate::rational::{self, int, ratio, Rational};
use crate::seed;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

/// Unit cost used when a supplier does not produce a part.
pub const ABSENT_PART_COST: i64 = 1_000_000;

/// Risk-constrained procurement: buy `demands[j]` units of each part from a mix of suppliers
/// whose demand-weighted average risk stays within `tolerances[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcurementInstance {
    #[serde(with = "serde_rational_vec")]
    pub risks: Vec<Rational>,
    /// `costs[i][j]`: unit cost of part `j` from supplier `i`.
    #[serde(with = "serde_rational_matrix")]
    pub costs: Vec<Vec<Rational>>,
    pub demands: Vec<i64>,
    #[serde(with = "serde_rational_vec")]
    pub tolerances: Vec<Rational>,
}

mod serde_rational_vec {
    use crate::rational::{self, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(rational::format))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| rational::parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

mod serde_rational_matrix {
    use crate::rational::{self, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|row| row.iter().map(rational::format).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let raw: Vec<Vec<String>> = Vec::deserialize(d)?;
        raw.iter()
            .map(|row| {
                row.iter()
                    .map(|s| rational::parse(s).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

impl ProcurementInstance {
    pub fn new(
        risks: Vec<Rational>,
        costs: Vec<Vec<Rational>>,
        demands: Vec<i64>,
        tolerances: Vec<Rational>,
    ) -> Result<Self, ModelError> {
        let inst = Self { risks, costs, demands, tolerances };
        inst.validate()?;
        Ok(inst)
    }

    pub fn suppliers(&self) -> usize {
        self.risks.len()
    }

    pub fn parts(&self) -> usize {
        self.demands.len()
    }

    pub fn cost(&self, supplier: usize, part: usize) -> Rational {
        self.costs[supplier][part]
    }

    /// Variable index of `y_{supplier,part}` in [`build_procurement`]'s program.
    pub fn var(&self, supplier: usize, part: usize) -> usize {
        supplier * self.parts() + part
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidInstance(msg));
        let (ns, np) = (self.suppliers(), self.parts());
        if ns == 0 || np == 0 {
            return bad("procurement needs at least one supplier and one part".into());
        }
        if self.tolerances.len() != np || self.costs.len() != ns || self.costs.iter().any(|r| r.len() != np) {
            return bad("cost matrix, demands and tolerances disagree on dimensions".into());
        }
        let nine = int(9);
        for (i, r) in self.risks.iter().enumerate() {
            if *r < int(0) || *r > nine {
                return bad(format!("risk of supplier {i} is {} (outside [0, 9])", rational::format(r)));
            }
        }
        for (j, psi) in self.tolerances.iter().enumerate() {
            if *psi < int(0) || *psi > nine {
                return bad(format!("tolerance of part {j} is outside [0, 9]"));
            }
            if !self.risks.iter().any(|r| r <= psi) {
                return bad(format!("no supplier meets the risk tolerance of part {j}"));
            }
        }
        if let Some(j) = self.demands.iter().position(|&d| d <= 0) {
            return bad(format!("demand of part {j} must be positive"));
        }
        for (i, row) in self.costs.iter().enumerate() {
            if let Some(j) = row.iter().position(|c| *c <= int(0)) {
                return bad(format!("cost of part {j} from supplier {i} must be positive"));
            }
        }
        Ok(())
    }

    /// Binary variable count after binarizing every `y_{i,j}` in `[0, d_j]`.
    pub fn binary_count(&self) -> usize {
        self.demands.iter().map(|&d| bit_width(d as u64)).sum::<usize>() * self.suppliers()
    }
}

/// Integer program with `y_{i,j} ∈ [0, d_j]`; per part a `demand_j` row followed by a `risk_j` row.
///
/// The risk rows are omitted when every supplier has zero risk.
pub fn build_procurement(instance: &ProcurementInstance) -> Result<IntegerProgram, ModelError> {
    instance.validate()?;
    let (ns, np) = (instance.suppliers(), instance.parts());
    let variables = (0..ns)
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .map(|(i, j)| Variable::integer(i * np + j, format!("y_{i}_{j}"), 0, instance.demands[j]))
        .collect();
    let objective = (0..ns)
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .map(|(i, j)| (i * np + j, instance.cost(i, j)))
        .collect();
    let mut constraints = Vec::with_capacity(2 * np);
    for j in 0..np {
        let demand = int(instance.demands[j]);
        constraints.push(LinearConstraint::new(
            format!("demand_{j}"),
            (0..ns).map(|i| (i * np + j, int(1))),
            Relation::Ge,
            demand,
        ));
        // With every risk zero the row reads 0 <= psi*d and is left out.
        if instance.risks.iter().any(|r| !r.is_zero()) {
            constraints.push(LinearConstraint::new(
                format!("risk_{j}"),
                (0..ns).map(|i| (i * np + j, instance.risks[i])),
                Relation::Le,
                instance.tolerances[j] * demand,
            ));
        }
    }
    IntegerProgram::new(Sense::Minimize, objective, constraints, variables)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcurementParams {
    pub suppliers: usize,
    pub parts: usize,
    pub demand: RangeInclusive<i64>,
    pub cost: RangeInclusive<i64>,
    /// Probability that a supplier does not offer a given part (cost becomes [`ABSENT_PART_COST`]).
    pub absent_rate: f64,
    /// Risks and tolerances are multiples of `1 / risk_denominator` in `[0, 9]`.
    pub risk_denominator: i64,
    /// Accepted window for the binarized variable count.
    pub binary_window: RangeInclusive<usize>,
    pub resample_budget: usize,
}

impl Default for ProcurementParams {
    fn default() -> Self {
        Self {
            suppliers: 6,
            parts: 9,
            demand: 3..=3,
            cost: 1..=10,
            absent_rate: 0.0,
            risk_denominator: 1,
            binary_window: 100..=120,
            resample_budget: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProcurement {
    pub instance: ProcurementInstance,
    pub resamples: usize,
}

fn median(values: &[Rational]) -> Rational {
    let mut v = values.to_vec();
    v.sort();
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / int(2)
    }
}

/// Risk scores and tolerances are drawn on the `1 / risk_denominator` grid; tolerances from `[median(r), 9]`.
pub fn generate_procurement(seed: u64, params: &ProcurementParams) -> Result<GeneratedProcurement, ModelError> {
    let mut rng = seed::rng(seed);
    for attempt in 0..params.resample_budget.max(1) {
        let den = params.risk_denominator.max(1);
        let risks: Vec<Rational> = (0..params.suppliers).map(|_| ratio(rng.gen_range(0..=9 * den), den)).collect();
        let costs: Vec<Vec<Rational>> = (0..params.suppliers)
            .map(|_| {
                (0..params.parts)
                    .map(|_| {
                        if params.absent_rate > 0.0 && rng.gen_bool(params.absent_rate) {
                            int(ABSENT_PART_COST)
                        } else {
                            int(rng.gen_range(params.cost.clone()))
                        }
                    })
                    .collect()
            })
            .collect();
        let demands: Vec<i64> = (0..params.parts).map(|_| rng.gen_range(params.demand.clone())).collect();
        let floor = (median(&risks) * int(den)).ceil().to_integer() as i64;
        let tolerances = (0..params.parts).map(|_| ratio(rng.gen_range(floor..=9 * den), den)).collect();
        let Ok(instance) = ProcurementInstance::new(risks, costs, demands, tolerances) else {
            continue;
        };
        if params.binary_window.contains(&instance.binary_count()) {
            return Ok(GeneratedProcurement { instance, resamples: attempt });
        }
    }
    Err(ModelError::ResampleBudget { attempts: params.resample_budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_single_supplier() {
        let inst = ProcurementInstance::new(vec![int(0)], vec![vec![int(2)]], vec![3], vec![int(1)]).unwrap();
        let ip = build_procurement(&inst).unwrap();
        assert_eq!(ip.sense, Sense::Minimize);
        assert_eq!(ip.variables[0].upper, 3);
        let best = (0..=3)
            .filter_map(|y| {
                let e = ip.evaluate(&[y]).unwrap();
                e.feasible.then_some(e.objective)
            })
            .min();
        assert_eq!(best, Some(int(6)));
    }

    #[test]
    fn risk_forces_the_expensive_supplier() {
        // Supplier 1 is cheaper but too risky to contribute anything.
        let inst = ProcurementInstance::new(
            vec![int(1), int(5)],
            vec![vec![int(1)], vec![ratio(1, 2)]],
            vec![2],
            vec![int(2)],
        )
        .unwrap();
        let ip = build_procurement(&inst).unwrap();
        assert_eq!(ip.constraints.len(), 2);
        let mut best = None;
        for y0 in 0..=2 {
            for y1 in 0..=2 {
                let e = ip.evaluate(&[y0, y1]).unwrap();
                if e.feasible && best.as_ref().is_none_or(|(c, _)| e.objective < *c) {
                    best = Some((e.objective, (y0, y1)));
                }
            }
        }
        assert_eq!(best, Some((int(2), (2, 0))));
    }

    #[test]
    fn all_zero_is_infeasible_with_positive_demand() {
        let g = generate_procurement(3, &ProcurementParams::default()).unwrap();
        let ip = build_procurement(&g.instance).unwrap();
        let e = ip.evaluate(&ip.zeros()).unwrap();
        assert!(!e.feasible);
        assert!(e.violations.iter().all(|v| v.name.starts_with("demand_")));
    }

    #[test]
    fn rejects_unsatisfiable_tolerance() {
        let err = ProcurementInstance::new(vec![int(5)], vec![vec![int(1)]], vec![1], vec![int(4)]).unwrap_err();
        assert!(err.to_string().contains("risk tolerance"));
    }

    #[test]
    fn generator_is_deterministic_and_sized() {
        let params = ProcurementParams::default();
        let a = generate_procurement(11, &params).unwrap();
        assert_eq!(a, generate_procurement(11, &params).unwrap());
        for s in 0..20 {
            let g = generate_procurement(s, &params).unwrap();
            let count = g.instance.binary_count();
            assert!((100..=120).contains(&count), "count {count}");
            let expected: usize = g.instance.demands.iter().map(|&d| crate::encode::bit_width(d as u64)).sum::<usize>() * 6;
            assert_eq!(count, expected);
            assert!(g.instance.risks.iter().all(|r| *r >= int(0) && *r <= int(9) && r.is_integer()));
            assert!(g.instance.validate().is_ok());
        }
    }

    #[test]
    fn absent_parts_get_the_large_cost() {
        let params = ProcurementParams { absent_rate: 0.5, binary_window: 0..=usize::MAX, ..Default::default() };
        let g = generate_procurement(5, &params).unwrap();
        let absent = g.instance.costs.iter().flatten().filter(|c| **c == int(ABSENT_PART_COST)).count();
        assert!(absent > 0);
    }
}
