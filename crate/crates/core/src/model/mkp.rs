use super::{IntegerProgram, LinearConstraint, ModelError, Relation, Sense, Variable};
use crate::rational::int;
use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::RangeInclusive;

/// Multiple knapsack instance: `capacities.len()` bins, `profits.len()` items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkpInstance {
    pub profits: Vec<i64>,
    pub weights: Vec<i64>,
    pub capacities: Vec<i64>,
}

/// The three conditions that rule out trivially reducible instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonTriviality {
    /// Some item fits in no bin: max weight > max capacity.
    ItemFitsNowhere,
    /// The smallest bin holds no item: min capacity < min weight.
    BinHoldsNothing,
    /// Everything fits in the largest bin: total weight < max capacity.
    AllItemsFitOneBin,
}

impl fmt::Display for NonTriviality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NonTriviality::ItemFitsNowhere => "max_j w_j <= max_i c_i fails (an item fits in no bin)",
            NonTriviality::BinHoldsNothing => "min_i c_i >= min_j w_j fails (the smallest bin holds no item)",
            NonTriviality::AllItemsFitOneBin => {
                "sum_j w_j >= max_i c_i fails (all items fit in the largest bin)"
            }
        })
    }
}

impl MkpInstance {
    pub fn bins(&self) -> usize {
        self.capacities.len()
    }

    pub fn items(&self) -> usize {
        self.profits.len()
    }

    /// Variable index of `x_{bin,item}` in [`build_mkp`]'s program.
    pub fn var(&self, bin: usize, item: usize) -> usize {
        bin * self.items() + item
    }

    fn check_shape(&self) -> Result<(), ModelError> {
        if self.capacities.is_empty() || self.profits.is_empty() {
            return Err(ModelError::InvalidInstance("an MKP needs at least one bin and one item".into()));
        }
        if self.weights.len() != self.profits.len() {
            return Err(ModelError::InvalidInstance(format!(
                "{} profits but {} weights",
                self.profits.len(),
                self.weights.len()
            )));
        }
        let all = self.profits.iter().chain(&self.weights).chain(&self.capacities);
        if all.into_iter().any(|&v| v <= 0) {
            return Err(ModelError::InvalidInstance(
                "profits, weights and capacities must be positive integers".into(),
            ));
        }
        Ok(())
    }

    /// Returns the first violated non-triviality condition, if any.
    pub fn non_triviality(&self) -> Result<(), NonTriviality> {
        let max_w = *self.weights.iter().max().unwrap_or(&0);
        let min_w = *self.weights.iter().min().unwrap_or(&0);
        let max_c = *self.capacities.iter().max().unwrap_or(&0);
        let min_c = *self.capacities.iter().min().unwrap_or(&0);
        let total_w: i64 = self.weights.iter().sum();
        if max_w > max_c {
            return Err(NonTriviality::ItemFitsNowhere);
        }
        if min_c < min_w {
            return Err(NonTriviality::BinHoldsNothing);
        }
        if total_w < max_c {
            return Err(NonTriviality::AllItemsFitOneBin);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.check_shape()?;
        self.non_triviality().map_err(ModelError::Trivial)
    }
}

/// Builds the assignment ILP: `x_{ij} = 1` iff item `j` goes to bin `i`.
///
/// Constraints are the `m` capacity rows (`capacity_i`) followed by the `n` at-most-one-bin rows
/// (`assign_j`).
pub fn build_mkp(instance: &MkpInstance) -> Result<IntegerProgram, ModelError> {
    instance.validate()?;
    let (m, n) = (instance.bins(), instance.items());
    let variables = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| Variable::binary(i * n + j, format!("x_{i}_{j}")))
        .collect();
    let objective = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i * n + j, int(instance.profits[j]))))
        .collect();
    let mut constraints = Vec::with_capacity(m + n);
    for i in 0..m {
        constraints.push(LinearConstraint::new(
            format!("capacity_{i}"),
            (0..n).map(|j| (i * n + j, int(instance.weights[j]))),
            Relation::Le,
            int(instance.capacities[i]),
        ));
    }
    for j in 0..n {
        constraints.push(LinearConstraint::new(
            format!("assign_{j}"),
            (0..m).map(|i| (i * n + j, int(1))),
            Relation::Le,
            int(1),
        ));
    }
    IntegerProgram::new(Sense::Maximize, objective, constraints, variables)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkpParams {
    pub bins: RangeInclusive<usize>,
    pub items: RangeInclusive<usize>,
    pub weight: RangeInclusive<i64>,
    pub profit: RangeInclusive<i64>,
    pub capacity: RangeInclusive<i64>,
    /// Upper bound on `bins × items`; larger draws are resampled.
    pub max_vars: Option<usize>,
    pub resample_budget: usize,
}

impl Default for MkpParams {
    fn default() -> Self {
        Self {
            bins: 2..=5,
            items: 2..=10,
            weight: 1..=3,
            profit: 1..=10,
            capacity: 1..=3,
            max_vars: Some(20),
            resample_budget: 10_000,
        }
    }
}

impl MkpParams {
    /// Fixed-size variant: `bins` bins and `items` items, default value ranges.
    pub fn sized(bins: usize, items: usize) -> Self {
        Self { bins: bins..=bins, items: items..=items, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedMkp {
    pub instance: MkpInstance,
    /// Number of rejected draws before `instance`.
    pub resamples: usize,
}

/// Draws a non-trivial instance; deterministic in `seed`.
pub fn generate_mkp(seed: u64, params: &MkpParams) -> Result<GeneratedMkp, ModelError> {
    let mut rng = seed::rng(seed);
    for attempt in 0..params.resample_budget.max(1) {
        let m = rng.gen_range(params.bins.clone());
        let n = rng.gen_range(params.items.clone());
        if params.max_vars.is_some_and(|cap| m * n > cap) {
            continue;
        }
        let instance = MkpInstance {
            profits: (0..n).map(|_| rng.gen_range(params.profit.clone())).collect(),
            weights: (0..n).map(|_| rng.gen_range(params.weight.clone())).collect(),
            capacities: (0..m).map(|_| rng.gen_range(params.capacity.clone())).collect(),
        };
        if instance.validate().is_ok() {
            return Ok(GeneratedMkp { instance, resamples: attempt });
        }
    }
    Err(ModelError::ResampleBudget { attempts: params.resample_budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_optimum(ip: &IntegerProgram) -> i128 {
        let n = ip.num_vars();
        (0u32..1 << n)
            .filter_map(|mask| {
                let x: Vec<i64> = (0..n).map(|k| ((mask >> k) & 1) as i64).collect();
                let e = ip.evaluate(&x).unwrap();
                e.feasible.then(|| e.objective.to_integer())
            })
            .max()
            .unwrap()
    }

    #[test]
    fn single_item_single_bin() {
        let inst = MkpInstance { profits: vec![5], weights: vec![1], capacities: vec![1] };
        let ip = build_mkp(&inst).unwrap();
        assert_eq!(ip.num_vars(), 1);
        assert_eq!(ip.constraints.len(), 2);
        assert_eq!(ip.sense, Sense::Maximize);
        assert_eq!(brute_force_optimum(&ip), 5);
        assert_eq!(ip.evaluate(&[1]).unwrap().objective, int(5));
    }

    #[test]
    fn two_bins_three_items_brute_force() {
        // Any two items fill both bins; best pair is items 2 and 3.
        let inst = MkpInstance { profits: vec![4, 5, 6], weights: vec![2, 2, 2], capacities: vec![3, 3] };
        let ip = build_mkp(&inst).unwrap();
        assert_eq!(ip.num_vars(), 6);
        assert_eq!(brute_force_optimum(&ip), 11);
    }

    #[test]
    fn three_by_three_shape() {
        let inst = MkpInstance { profits: vec![3, 7, 2], weights: vec![1, 2, 3], capacities: vec![2, 3, 1] };
        let ip = build_mkp(&inst).unwrap();
        assert_eq!(ip.num_vars(), 9);
        assert_eq!(ip.constraints.len(), 6);
    }

    #[test]
    fn trivial_instances_are_rejected_with_reason() {
        let nowhere = MkpInstance { profits: vec![1, 1], weights: vec![4, 1], capacities: vec![3] };
        assert_eq!(nowhere.non_triviality(), Err(NonTriviality::ItemFitsNowhere));
        let empty_bin = MkpInstance { profits: vec![1, 1], weights: vec![2, 3], capacities: vec![1, 3] };
        assert_eq!(empty_bin.non_triviality(), Err(NonTriviality::BinHoldsNothing));
        let one_bin = MkpInstance { profits: vec![1, 1], weights: vec![1, 1], capacities: vec![3, 1] };
        assert_eq!(one_bin.non_triviality(), Err(NonTriviality::AllItemsFitOneBin));
        match build_mkp(&one_bin) {
            Err(ModelError::Trivial(reason)) => assert!(reason.to_string().contains("largest bin")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn item_in_two_bins_is_infeasible() {
        let inst = MkpInstance { profits: vec![4, 5, 6], weights: vec![2, 2, 2], capacities: vec![3, 3] };
        let ip = build_mkp(&inst).unwrap();
        let mut x = ip.zeros();
        assert!(ip.evaluate(&x).unwrap().feasible);
        assert_eq!(ip.evaluate(&x).unwrap().objective, int(0));
        x[inst.var(0, 1)] = 1;
        x[inst.var(1, 1)] = 1;
        let e = ip.evaluate(&x).unwrap();
        assert!(!e.feasible);
        assert_eq!(e.violations.len(), 1);
        assert_eq!(e.violations[0].name, "assign_1");
    }

    #[test]
    fn generation_is_deterministic_and_nontrivial() {
        let params = MkpParams::default();
        assert_eq!(generate_mkp(42, &params).unwrap(), generate_mkp(42, &params).unwrap());
        for s in 0..100 {
            let g = generate_mkp(s, &params).unwrap();
            assert!(g.instance.non_triviality().is_ok());
            let ip = build_mkp(&g.instance).unwrap();
            assert_eq!(ip.num_vars(), g.instance.bins() * g.instance.items());
            assert_eq!(ip.constraints.len(), g.instance.bins() + g.instance.items());
            assert!(ip.num_vars() <= 20);
        }
    }

    #[test]
    fn impossible_ranges_exhaust_the_budget() {
        // Weight always exceeds capacity.
        let params = MkpParams { weight: 5..=5, capacity: 1..=2, resample_budget: 50, ..MkpParams::default() };
        assert_eq!(generate_mkp(1, &params), Err(ModelError::ResampleBudget { attempts: 50 }));
    }
}
