use super::IsingHamiltonian;
use crate::pauli::Axis;
use serde::{Deserialize, Serialize};

/// Undirected graph on spin indices; `i ~ j` iff the Ising coupling `J_ij` is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceGraph {
    adjacency: Vec<Vec<usize>>,
}

impl InstanceGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { adjacency }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_proper_coloring(&self, colors: &[usize]) -> bool {
        self.edges().all(|(a, b)| colors[a] != colors[b])
    }
}

pub fn build_instance_graph(ising: &IsingHamiltonian) -> InstanceGraph {
    InstanceGraph::new(ising.n, ising.j.keys().copied())
}

/// Greedy largest-degree-first coloring.
///
/// Vertices are visited by nonincreasing degree, ties by ascending id; each takes the smallest
/// color not used by an already colored neighbor.
pub fn color_ldf(graph: &InstanceGraph) -> Vec<usize> {
    let n = graph.num_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
    let mut colors = vec![usize::MAX; n];
    let mut taken = Vec::new();
    for v in order {
        taken.clear();
        taken.resize(graph.degree(v) + 1, false);
        for &u in graph.neighbors(v) {
            if colors[u] < taken.len() {
                taken[colors[u]] = true;
            }
        }
        colors[v] = taken.iter().position(|t| !t).expect("degree + 1 colors suffice");
    }
    colors
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub qubit: usize,
    pub axis: Axis,
}

/// Placement of every spin on a `(qubit, axis)` slot, at most three spins per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub colors: Vec<usize>,
    pub slots: Vec<Slot>,
    pub qubit_count: usize,
}

impl QubitLayout {
    pub fn num_spins(&self) -> usize {
        self.slots.len()
    }

    /// Spins packed on each qubit, in axis order.
    pub fn spins_on(&self, qubit: usize) -> Vec<usize> {
        let mut spins: Vec<usize> = (0..self.slots.len()).filter(|&v| self.slots[v].qubit == qubit).collect();
        spins.sort_by_key(|&v| self.slots[v].axis);
        spins
    }

    /// `(qubit, axis) -> spin` table; `None` for unused axes.
    pub fn occupancy(&self) -> Vec<[Option<usize>; 3]> {
        let mut table = vec![[None; 3]; self.qubit_count];
        for (v, s) in self.slots.iter().enumerate() {
            table[s.qubit][s.axis.index()] = Some(v);
        }
        table
    }
}

/// Packs each color class, sorted by vertex id, into chunks of three on fresh qubits.
///
/// Colors are processed in increasing order; within a chunk the axes are X, Y, Z.
pub fn assign_qubits(colors: &[usize]) -> QubitLayout {
    let num_colors = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut classes = vec![Vec::new(); num_colors];
    for (v, &c) in colors.iter().enumerate() {
        classes[c].push(v);
    }
    let mut slots = vec![Slot { qubit: 0, axis: Axis::X }; colors.len()];
    let mut qubit_count = 0;
    for class in &classes {
        for chunk in class.chunks(3) {
            for (k, &v) in chunk.iter().enumerate() {
                slots[v] = Slot { qubit: qubit_count, axis: Axis::from_index(k) };
            }
            qubit_count += 1;
        }
    }
    QubitLayout { colors: colors.to_vec(), slots, qubit_count }
}
