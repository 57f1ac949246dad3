//! The step graph viewed as a program: every step node reads (uses) one cell
//! and then writes (defines) it. A source node defines the whole initial
//! tape and a sink node carries a use that any definition satisfies.

use std::collections::{BTreeSet, VecDeque};

use crate::machine::{MachineSpec, StateId, Symbol};
use crate::seqgraph::{NodeId, SeqGraph};
use crate::step::{ComputationStep, TapeRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CfgNode {
    Source,
    Step(ComputationStep),
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellUse {
    At(i64, Symbol),
    /// The sink's use: matches a reaching definition of any cell.
    Extra,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSemantics {
    pub use_: Option<CellUse>,
    pub defs: Vec<(i64, Symbol)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    mu: u32,
    range: TapeRange,
    /// Initial symbol of each cell of `range`, left to right.
    initial: Vec<Symbol>,
    selected: BTreeSet<StateId>,
    /// Source first, steps in lexicographic order, sink last.
    nodes: Vec<CfgNode>,
    succ: Vec<Vec<NodeId>>,
    pred: Vec<Vec<NodeId>>,
}

impl Cfg {
    pub fn mu(&self) -> u32 {
        self.mu
    }

    pub fn range(&self) -> TapeRange {
        self.range
    }

    pub fn selected(&self) -> &BTreeSet<StateId> {
        &self.selected
    }

    pub fn source(&self) -> NodeId {
        0
    }

    pub fn sink(&self) -> NodeId {
        self.nodes.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn node(&self, u: NodeId) -> CfgNode {
        self.nodes[u]
    }

    pub fn nodes(&self) -> &[CfgNode] {
        &self.nodes
    }

    pub fn step(&self, u: NodeId) -> Option<&ComputationStep> {
        match &self.nodes[u] {
            CfgNode::Step(t) => Some(t),
            _ => None,
        }
    }

    pub fn successors(&self, u: NodeId) -> &[NodeId] {
        &self.succ[u]
    }

    pub fn predecessors(&self, u: NodeId) -> &[NodeId] {
        &self.pred[u]
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// False when pruning left no source-to-sink path.
    pub fn has_path(&self) -> bool {
        !self.succ[self.source()].is_empty()
    }

    pub fn node_by_step(&self, t: &ComputationStep) -> Option<NodeId> {
        self.nodes
            .binary_search(&CfgNode::Step(*t))
            .ok()
    }

    pub fn initial_symbol(&self, cell: i64) -> Symbol {
        self.initial[(cell - self.range.left) as usize]
    }

    /// Cell written by `u`, if it defines exactly one (step nodes).
    pub fn step_cell(&self, u: NodeId) -> Option<i64> {
        self.step(u).map(|t| t.k_tape)
    }

    pub fn defines_cell(&self, u: NodeId, cell: i64) -> bool {
        match self.nodes[u] {
            CfgNode::Source => self.range.contains(cell),
            CfgNode::Step(t) => t.k_tape == cell,
            CfgNode::Sink => false,
        }
    }

    /// Symbol `u` writes at `cell`. Panics if `u` does not define it.
    pub fn def_symbol(&self, u: NodeId, cell: i64) -> Symbol {
        match self.nodes[u] {
            CfgNode::Source => self.initial_symbol(cell),
            CfgNode::Step(t) if t.k_tape == cell => t.s_next,
            _ => panic!("node {u} does not define cell {cell}"),
        }
    }

    pub fn node_semantics(&self, u: NodeId) -> NodeSemantics {
        match self.nodes[u] {
            CfgNode::Source => NodeSemantics {
                use_: None,
                defs: self.range.cells().zip(self.initial.iter().copied()).collect(),
            },
            CfgNode::Step(t) => NodeSemantics {
                use_: Some(CellUse::At(t.k_tape, t.s)),
                defs: vec![(t.k_tape, t.s_next)],
            },
            CfgNode::Sink => NodeSemantics {
                use_: Some(CellUse::Extra),
                defs: Vec::new(),
            },
        }
    }

    /// Nodes in a topological order (source, steps by ordinal, sink).
    pub fn topological_order(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&u| match self.nodes[u] {
            CfgNode::Source => 0,
            CfgNode::Step(t) => t.k_step as u64,
            CfgNode::Sink => u64::MAX,
        });
        order
    }

    /// Restricts to nodes and edges lying on some source-to-sink path.
    pub fn pruned(&self) -> Cfg {
        let fwd = reach(self.source(), &self.succ);
        let bwd = reach(self.sink(), &self.pred);
        let keep: Vec<bool> = (0..self.nodes.len())
            .map(|u| u == self.source() || u == self.sink() || (fwd[u] && bwd[u]))
            .collect();
        let on_path = fwd[self.sink()];
        let mut edges = BTreeSet::new();
        if on_path {
            for (u, v) in self.edges() {
                if keep[u] && keep[v] && fwd[u] && bwd[v] {
                    edges.insert((self.nodes[u], self.nodes[v]));
                }
            }
        }
        let nodes: BTreeSet<CfgNode> = (0..self.nodes.len())
            .filter(|&u| keep[u] && (on_path || matches!(self.nodes[u], CfgNode::Source | CfgNode::Sink)))
            .map(|u| self.nodes[u])
            .collect();
        Cfg::assemble(self.mu, self.range, self.initial.clone(), self.selected.clone(), nodes, edges)
    }

    fn assemble(
        mu: u32,
        range: TapeRange,
        initial: Vec<Symbol>,
        selected: BTreeSet<StateId>,
        nodes: BTreeSet<CfgNode>,
        edges: BTreeSet<(CfgNode, CfgNode)>,
    ) -> Cfg {
        // the derived Ord puts Source first and Sink last
        let nodes: Vec<CfgNode> = nodes.into_iter().collect();
        let idx = |n: &CfgNode| nodes.binary_search(n).expect("edge endpoint is a node");
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        for (a, b) in &edges {
            let (a, b) = (idx(a), idx(b));
            succ[a].push(b);
            pred[b].push(a);
        }
        for l in succ.iter_mut().chain(pred.iter_mut()) {
            l.sort_unstable();
        }
        Cfg {
            mu,
            range,
            initial,
            selected,
            nodes,
            succ,
            pred,
        }
    }
}

fn reach(from: NodeId, adj: &[Vec<NodeId>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Adds source and sink to `g` and prunes to source-to-sink paths. The sink
/// is wired from every node at the last ordinal whose next state is in
/// `selected`.
pub fn build_cfg(
    g: &SeqGraph,
    machine: &MachineSpec,
    x: &[Symbol],
    selected: &BTreeSet<StateId>,
) -> Cfg {
    let mu = g.mu();
    let range = TapeRange::new(mu);
    let initial = range.cells().map(|k| machine.input_symbol(x, k)).collect();
    let mut nodes: BTreeSet<CfgNode> = g.steps().iter().map(|t| CfgNode::Step(*t)).collect();
    nodes.insert(CfgNode::Source);
    nodes.insert(CfgNode::Sink);
    let mut edges: BTreeSet<(CfgNode, CfgNode)> = g
        .edges()
        .map(|(u, v)| (CfgNode::Step(*g.step(u)), CfgNode::Step(*g.step(v))))
        .collect();
    for &r in g.roots() {
        edges.insert((CfgNode::Source, CfgNode::Step(*g.step(r))));
    }
    for t in g.steps() {
        if t.k_step == mu && selected.contains(&t.q_next) {
            edges.insert((CfgNode::Step(*t), CfgNode::Sink));
        }
    }
    Cfg::assemble(mu, range, initial, selected.clone(), nodes, edges).pruned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::seqgraph::build_seq_graph;

    fn cfg_for(m: &MachineSpec, w: &str, mu: u32, selected: &BTreeSet<StateId>) -> Cfg {
        let x = m.parse_word(w).unwrap();
        build_cfg(&build_seq_graph(m, &x, mu), m, &x, selected)
    }

    #[test]
    fn empty_selection_has_no_path() {
        let m = fixtures::l1();
        let c = cfg_for(&m, "1", 3, &BTreeSet::new());
        assert!(!c.has_path());
        assert_eq!(c.node_count(), 2);
    }

    #[test]
    fn pruning_is_idempotent() {
        let m = fixtures::l2();
        for sel in [m.accepting().clone(), m.all_states(), m.non_start_states()] {
            for mu in 1..=4 {
                let c = cfg_for(&m, "011", mu, &sel);
                assert_eq!(c.pruned(), c);
            }
        }
    }

    #[test]
    fn every_node_is_on_a_path() {
        let m = fixtures::l2();
        let c = cfg_for(&m, "0110", 4, &m.all_states());
        let fwd = reach(c.source(), &c.succ);
        let bwd = reach(c.sink(), &c.pred);
        assert!((0..c.node_count()).all(|u| fwd[u] && bwd[u]));
        for &u in c.predecessors(c.sink()) {
            assert_eq!(c.step(u).unwrap().k_step, 4);
        }
    }

    #[test]
    fn non_start_selection_wires_only_non_start_leaves() {
        let m = fixtures::l1();
        let c = cfg_for(&m, "01", 3, &m.non_start_states());
        for &u in c.predecessors(c.sink()) {
            assert_ne!(c.step(u).unwrap().q_next, m.start());
        }
    }

    #[test]
    fn semantics_of_each_node_kind() {
        let m = fixtures::l1();
        let c = cfg_for(&m, "1", 2, &m.all_states());
        let src = c.node_semantics(c.source());
        let b = m.blank();
        let one = m.symbol_by_name("1").unwrap();
        assert_eq!(src.use_, None);
        assert_eq!(src.defs, vec![(0, b), (1, one), (2, b)]);
        assert_eq!(
            c.node_semantics(c.sink()),
            NodeSemantics {
                use_: Some(CellUse::Extra),
                defs: vec![]
            }
        );
        let u = c.successors(c.source())[0];
        let t = *c.step(u).unwrap();
        assert_eq!(
            c.node_semantics(u),
            NodeSemantics {
                use_: Some(CellUse::At(t.k_tape, t.s)),
                defs: vec![(t.k_tape, t.s_next)]
            }
        );
    }
}
