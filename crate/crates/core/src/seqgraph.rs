//! Deduplicated DAG of every tape-arbitrary step sequence of length at most
//! `mu`.
//!
//! Successors of a step depend only on the step itself (its next state, next
//! cell and ordinal), never on the history that led to it. So the
//! exponential tree of tape-arbitrary runs folds into a graph with one node
//! per distinct step tuple, and the tree is never materialized.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::machine::{MachineSpec, Symbol};
use crate::step::{ComputationStep, StepSequence};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqGraph {
    mu: u32,
    /// Nodes sorted lexicographically on the step tuple.
    steps: Vec<ComputationStep>,
    index: HashMap<ComputationStep, NodeId>,
    succ: Vec<Vec<NodeId>>,
    roots: Vec<NodeId>,
}

/// Steps that may follow `t`: every transition out of `t.q_next`, whatever
/// it reads, placed at `t`'s next cell.
pub fn successor_steps<'a>(
    machine: &'a MachineSpec,
    t: &'a ComputationStep,
) -> impl Iterator<Item = ComputationStep> + 'a {
    machine
        .transitions_from(t.q_next)
        .map(move |d| ComputationStep::from_transition(d, t.next_cell(), t.k_step + 1))
}

/// First steps of a run on `x`: transitions at `(q_start, x[1])`.
pub fn root_steps(machine: &MachineSpec, x: &[Symbol]) -> Vec<ComputationStep> {
    machine
        .transitions_at(machine.start(), machine.input_symbol(x, 1))
        .map(|d| ComputationStep::from_transition(d, 1, 1))
        .collect()
}

impl SeqGraph {
    fn from_parts(
        mu: u32,
        nodes: BTreeSet<ComputationStep>,
        edges: BTreeSet<(ComputationStep, ComputationStep)>,
    ) -> Self {
        let steps: Vec<ComputationStep> = nodes.into_iter().collect();
        let index: HashMap<ComputationStep, NodeId> =
            steps.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        let mut succ = vec![Vec::new(); steps.len()];
        for (a, b) in &edges {
            succ[index[a]].push(index[b]);
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        let roots = steps
            .iter()
            .enumerate()
            .filter(|(_, t)| t.k_step == 1)
            .map(|(i, _)| i)
            .collect();
        SeqGraph {
            mu,
            steps,
            index,
            succ,
            roots,
        }
    }

    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn node_count(&self) -> usize {
        self.steps.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn step(&self, u: NodeId) -> &ComputationStep {
        &self.steps[u]
    }

    pub fn steps(&self) -> &[ComputationStep] {
        &self.steps
    }

    pub fn node_of(&self, t: &ComputationStep) -> Option<NodeId> {
        self.index.get(t).copied()
    }

    pub fn successors(&self, u: NodeId) -> &[NodeId] {
        &self.succ[u]
    }

    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Node set and edge set as step tuples, for comparisons across builds.
    pub fn step_sets(
        &self,
    ) -> (
        BTreeSet<ComputationStep>,
        BTreeSet<(ComputationStep, ComputationStep)>,
    ) {
        let nodes = self.steps.iter().copied().collect();
        let edges = self
            .edges()
            .map(|(u, v)| (self.steps[u], self.steps[v]))
            .collect();
        (nodes, edges)
    }

    /// Number of root-to-leaf paths, counted over a topological order.
    pub fn all_paths_count(&self) -> BigUint {
        if self.steps.is_empty() {
            return BigUint::zero();
        }
        // k_step strictly increases along edges, so descending k_step is a
        // reverse topological order
        let mut order: Vec<NodeId> = (0..self.steps.len()).collect();
        order.sort_by_key(|&u| std::cmp::Reverse(self.steps[u].k_step));
        let mut paths = vec![BigUint::zero(); self.steps.len()];
        for u in order {
            paths[u] = if self.succ[u].is_empty() {
                BigUint::one()
            } else {
                self.succ[u].iter().map(|&v| &paths[v]).sum()
            };
        }
        self.roots.iter().map(|&r| &paths[r]).sum()
    }

    /// Every root-to-leaf step sequence. Exponential; meant for small graphs.
    pub fn root_to_leaf_sequences(&self, limit: usize) -> Option<Vec<StepSequence>> {
        let mut out = Vec::new();
        let mut stack: Vec<(NodeId, usize)> = Vec::new();
        for &r in &self.roots {
            stack.push((r, 0));
            let mut path = vec![self.steps[r]];
            while let Some((u, next)) = stack.pop() {
                if self.succ[u].is_empty() && next == 0 {
                    out.push(StepSequence::new(path.clone()).expect("graph edges are sequential"));
                    if out.len() > limit {
                        return None;
                    }
                }
                if next < self.succ[u].len() {
                    stack.push((u, next + 1));
                    let v = self.succ[u][next];
                    path.push(self.steps[v]);
                    stack.push((v, 0));
                } else {
                    path.pop();
                }
            }
        }
        Some(out)
    }
}

/// Builds the graph level by level from a worklist keyed on step tuples.
pub fn build_seq_graph(machine: &MachineSpec, x: &[Symbol], mu: u32) -> SeqGraph {
    assert!(mu >= 1, "mu must be positive");
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::new();
    for t in root_steps(machine, x) {
        if nodes.insert(t) {
            queue.push_back(t);
        }
    }
    while let Some(t) = queue.pop_front() {
        if t.k_step >= mu {
            continue;
        }
        for n in successor_steps(machine, &t) {
            edges.insert((t, n));
            if nodes.insert(n) {
                queue.push_back(n);
            }
        }
    }
    SeqGraph::from_parts(mu, nodes, edges)
}

/// Builds the same graph by depth-first traversal of the (implicit) tree of
/// tape-arbitrary runs, cutting every subtree whose root step was already
/// visited.
pub fn build_seq_graph_dfs(machine: &MachineSpec, x: &[Symbol], mu: u32) -> SeqGraph {
    assert!(mu >= 1, "mu must be positive");
    let mut visited = BTreeSet::new();
    let mut edges = BTreeSet::new();
    // (step, parent) pairs; the edge is recorded whether or not the child's
    // subtree gets cut
    let mut stack: Vec<(ComputationStep, Option<ComputationStep>)> = root_steps(machine, x)
        .into_iter()
        .rev()
        .map(|t| (t, None))
        .collect();
    while let Some((t, parent)) = stack.pop() {
        if let Some(p) = parent {
            edges.insert((p, t));
        }
        if !visited.insert(t) {
            continue;
        }
        if t.k_step < mu {
            let children: Vec<_> = successor_steps(machine, &t).collect();
            for c in children.into_iter().rev() {
                stack.push((c, Some(t)));
            }
        }
    }
    SeqGraph::from_parts(mu, visited, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn l1_mu1_is_a_single_step() {
        let m = fixtures::l1();
        let x = m.parse_word("1").unwrap();
        let g = build_seq_graph(&m, &x, 1);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.step(0).display(&m).to_string(), "(q0,1,q0,1,R,1,1)");
    }

    #[test]
    fn mu1_counts_applicable_first_transitions() {
        let m = fixtures::l2();
        for w in ["", "0", "1"] {
            let x = m.parse_word(w).unwrap();
            let g = build_seq_graph(&m, &x, 1);
            let applicable = m.transitions_at(m.start(), m.input_symbol(&x, 1)).count();
            assert_eq!(g.node_count(), applicable);
        }
    }

    #[test]
    fn halting_start_gives_empty_graph() {
        let m = fixtures::l2();
        // no transition reads blank in the start state
        let g = build_seq_graph(&m, &[], 4);
        assert!(g.is_empty());
        assert_eq!(g.all_paths_count(), BigUint::zero());
    }

    #[test]
    fn worklist_and_dfs_agree_on_fixtures() {
        for m in [fixtures::l1(), fixtures::l2()] {
            for w in ["", "1", "01", "110"] {
                let x = m.parse_word(w).unwrap();
                for mu in 1..=5 {
                    assert_eq!(build_seq_graph(&m, &x, mu), build_seq_graph_dfs(&m, &x, mu));
                }
            }
        }
    }

    #[test]
    fn path_count_matches_sequence_listing() {
        let m = fixtures::l2();
        let x = m.parse_word("011").unwrap();
        let g = build_seq_graph(&m, &x, 4);
        let seqs = g.root_to_leaf_sequences(100_000).unwrap();
        assert_eq!(g.all_paths_count(), BigUint::from(seqs.len()));
    }
}
