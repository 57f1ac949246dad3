//! Commodity subgraphs: for each tape-consistent def-use pair, the part of
//! the CFG through which the definition travels to the use unhidden.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::cfg::Cfg;
use crate::reaching::{DefUsePair, TConsistPairSet};
use crate::seqgraph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commodity {
    pub index: usize,
    pub source: NodeId,
    pub target: NodeId,
    pub cell: i64,
    /// Sorted node ids of the commodity graph.
    pub nodes: Vec<NodeId>,
    /// Sorted CFG edges inside the commodity graph.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl Commodity {
    /// Empty when every route from source to target passes a redefinition.
    pub fn is_usable(&self) -> bool {
        !self.nodes.is_empty()
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.nodes.binary_search(&u).is_ok()
    }
}

/// Labels nodes reachable from `from` along `adj` without entering a node
/// that redefines `cell` (other than `stop`), and without leaving `stop`.
fn propagate(cfg: &Cfg, from: NodeId, stop: NodeId, cell: i64, forward: bool) -> Vec<bool> {
    let mut seen = vec![false; cfg.node_count()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == stop {
            continue;
        }
        let next = if forward {
            cfg.successors(u)
        } else {
            cfg.predecessors(u)
        };
        for &v in next {
            if seen[v] || (v != stop && cfg.defines_cell(v, cell)) {
                continue;
            }
            seen[v] = true;
            queue.push_back(v);
        }
    }
    seen
}

pub fn build_commodity(cfg: &Cfg, index: usize, pair: &DefUsePair) -> Commodity {
    let (u, v) = (pair.def_node, pair.use_node);
    let fwd = propagate(cfg, u, v, pair.cell, true);
    let bwd = propagate(cfg, v, u, pair.cell, false);
    let keep: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();
    let (nodes, edges) = if keep[u] && keep[v] {
        let nodes: Vec<NodeId> = (0..cfg.node_count()).filter(|&w| keep[w]).collect();
        let edges = cfg
            .edges()
            .filter(|&(a, b)| keep[a] && keep[b] && a != v && b != u)
            .collect();
        (nodes, edges)
    } else {
        (Vec::new(), Vec::new())
    };
    Commodity {
        index,
        source: u,
        target: v,
        cell: pair.cell,
        nodes,
        edges,
    }
}

/// One commodity per pair, indexed in the pair set's order.
pub fn build_commodities(cfg: &Cfg, pairs: &TConsistPairSet) -> Vec<Commodity> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| build_commodity(cfg, i, p))
        .collect()
}

/// The graph of def-use links at one cell: commodity endpoints as nodes and
/// the commodities themselves as edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TconCellGraph {
    pub cell: i64,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
    /// Commodity indices with this cell.
    pub commodities: Vec<usize>,
}

pub fn build_tcon_graphs(commodities: &[Commodity], tape_seg: (i64, i64)) -> Vec<TconCellGraph> {
    let mut by_cell: BTreeMap<i64, Vec<&Commodity>> = BTreeMap::new();
    for c in commodities {
        by_cell.entry(c.cell).or_default().push(c);
    }
    (tape_seg.0..=tape_seg.1)
        .map(|cell| {
            let cs = by_cell.get(&cell).map(Vec::as_slice).unwrap_or(&[]);
            let nodes: BTreeSet<NodeId> = cs.iter().flat_map(|c| [c.source, c.target]).collect();
            let edges: BTreeSet<(NodeId, NodeId)> = cs.iter().map(|c| (c.source, c.target)).collect();
            TconCellGraph {
                cell,
                nodes: nodes.into_iter().collect(),
                edges: edges.into_iter().collect(),
                commodities: cs.iter().map(|c| c.index).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::fixtures;
    use crate::machine::MachineSpec;
    use crate::reaching::{compute_tconsist_pair_set, reaching_definitions};
    use crate::seqgraph::build_seq_graph;

    fn pipeline(m: &MachineSpec, w: &str, mu: u32) -> (Cfg, TConsistPairSet) {
        let x = m.parse_word(w).unwrap();
        let c = build_cfg(&build_seq_graph(m, &x, mu), m, &x, &m.all_states());
        let pairs = compute_tconsist_pair_set(&c, &reaching_definitions(&c));
        (c, pairs)
    }

    /// Nodes and edges of all u->v paths with no interior node defining the
    /// cell, by explicit path enumeration.
    fn brute_force(cfg: &Cfg, p: &DefUsePair) -> (BTreeSet<NodeId>, BTreeSet<(NodeId, NodeId)>) {
        let mut nodes = BTreeSet::new();
        let mut edges = BTreeSet::new();
        let mut stack = vec![vec![p.def_node]];
        while let Some(path) = stack.pop() {
            let u = *path.last().unwrap();
            if u == p.use_node {
                nodes.extend(path.iter().copied());
                edges.extend(path.windows(2).map(|w| (w[0], w[1])));
                continue;
            }
            for &v in cfg.successors(u) {
                if v == p.use_node || !cfg.defines_cell(v, p.cell) {
                    let mut next = path.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
        (nodes, edges)
    }

    #[test]
    fn matches_path_filter_on_fixtures() {
        for m in [fixtures::l1(), fixtures::l2()] {
            for w in ["1", "01", "110"] {
                let (c, pairs) = pipeline(&m, w, 4);
                for (i, p) in pairs.iter().enumerate() {
                    let k = build_commodity(&c, i, p);
                    let (nodes, edges) = brute_force(&c, p);
                    assert_eq!(k.nodes, nodes.into_iter().collect::<Vec<_>>());
                    assert_eq!(k.edges, edges.into_iter().collect::<Vec<_>>());
                    assert!(k.is_usable());
                }
            }
        }
    }

    #[test]
    fn hiding_node_blocks_the_only_route() {
        // s -> u1 -> u2 -> t, all on cell 1: the source's def of cell 1 can
        // reach the sink only through u1 and u2, both of which redefine it
        let m = crate::machine::parse_machine(
            "states: a\ntape_alphabet: _ 1\nblank: _\ninput_alphabet: 1\nstart: a\naccept:\ndelta:\na 1 -> a 1 S\n",
        )
        .unwrap();
        let (c, _) = pipeline(&m, "1", 2);
        let hidden = DefUsePair {
            def_node: c.source(),
            use_node: c.sink(),
            cell: 1,
        };
        assert!(!build_commodity(&c, 0, &hidden).is_usable());
        let other_cell = DefUsePair { cell: 0, ..hidden };
        let k = build_commodity(&c, 0, &other_cell);
        assert_eq!(k.nodes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn tcon_graphs_partition_pairs_by_cell() {
        let m = fixtures::l1();
        let (c, pairs) = pipeline(&m, "1", 3);
        let ks = build_commodities(&c, &pairs);
        let graphs = build_tcon_graphs(&ks, (1, 2));
        assert_eq!(graphs.len(), 2);
        for g in &graphs {
            let direct = pairs.iter().filter(|p| p.cell == g.cell).count();
            assert_eq!(g.commodities.len(), direct);
            for &(a, b) in &g.edges {
                assert!(g.nodes.contains(&a) && g.nodes.contains(&b));
            }
        }
        let far = build_tcon_graphs(&ks, (7, 7));
        assert!(far[0].nodes.is_empty() && far[0].edges.is_empty());
    }
}
