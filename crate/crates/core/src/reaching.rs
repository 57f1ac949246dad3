//! Reaching definitions over the CFG and the tape-consistent def-use pairs
//! derived from them.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;

use crate::cfg::{Cfg, CfgNode};
use crate::seqgraph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefUsePair {
    pub def_node: NodeId,
    pub use_node: NodeId,
    pub cell: i64,
}

/// Def-use pairs whose use reads what the def wrote, plus every pair ending
/// at the sink.
pub type TConsistPairSet = BTreeSet<DefUsePair>;

struct DefTable {
    /// `(node, cell)` per definition id.
    defs: Vec<(NodeId, i64)>,
    /// Definitions generated at each node.
    gen: Vec<Vec<usize>>,
    /// Definition ids grouped by cell, offset by the range's left bound.
    by_cell: Vec<FixedBitSet>,
}

impl DefTable {
    fn new(cfg: &Cfg) -> Self {
        let range = cfg.range();
        let mut defs = Vec::new();
        let mut gen = vec![Vec::new(); cfg.node_count()];
        for u in 0..cfg.node_count() {
            for (cell, _) in cfg.node_semantics(u).defs {
                gen[u].push(defs.len());
                defs.push((u, cell));
            }
        }
        let mut by_cell = vec![FixedBitSet::with_capacity(defs.len()); range.len()];
        for (d, &(_, cell)) in defs.iter().enumerate() {
            by_cell[(cell - range.left) as usize].insert(d);
        }
        DefTable { defs, gen, by_cell }
    }
}

/// Reverse post-order from the source.
fn reverse_post_order(cfg: &Cfg) -> Vec<NodeId> {
    let n = cfg.node_count();
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    let mut stack = vec![(cfg.source(), 0usize)];
    seen[cfg.source()] = true;
    while let Some((u, i)) = stack.pop() {
        if let Some(&v) = cfg.successors(u).get(i) {
            stack.push((u, i + 1));
            if !seen[v] {
                seen[v] = true;
                stack.push((v, 0));
            }
        } else {
            post.push(u);
        }
    }
    // pruning guarantees reachability, but a CFG without a path still has an
    // unreachable sink
    for u in 0..n {
        if !seen[u] {
            post.insert(0, u);
        }
    }
    post.reverse();
    post
}

/// Forward may-analysis: a definition of a cell kills every other definition
/// of that cell. Returns each definition paired with the uses it reaches;
/// the sink's use pairs with every reaching definition.
pub fn reaching_definitions(cfg: &Cfg) -> BTreeSet<DefUsePair> {
    let table = DefTable::new(cfg);
    let n = cfg.node_count();
    let nd = table.defs.len();
    let range = cfg.range();
    let mut in_sets = vec![FixedBitSet::with_capacity(nd); n];
    let mut out_sets = vec![FixedBitSet::with_capacity(nd); n];

    let transfer = |u: NodeId, input: &FixedBitSet| -> FixedBitSet {
        let mut out = input.clone();
        for &d in &table.gen[u] {
            let (_, cell) = table.defs[d];
            out.difference_with(&table.by_cell[(cell - range.left) as usize]);
        }
        for &d in &table.gen[u] {
            out.insert(d);
        }
        out
    };

    let order = reverse_post_order(cfg);
    let mut position = vec![0usize; n];
    for (i, &u) in order.iter().enumerate() {
        position[u] = i;
    }
    let mut pending: BTreeSet<usize> = (0..n).collect();
    while let Some(i) = pending.pop_first() {
        let u = order[i];
        let mut input = FixedBitSet::with_capacity(nd);
        for &p in cfg.predecessors(u) {
            input.union_with(&out_sets[p]);
        }
        let out = transfer(u, &input);
        in_sets[u] = input;
        if out != out_sets[u] {
            out_sets[u] = out;
            pending.extend(cfg.successors(u).iter().map(|&v| position[v]));
        }
    }

    let mut pairs = BTreeSet::new();
    for u in 0..n {
        match cfg.node(u) {
            CfgNode::Source => {}
            CfgNode::Step(t) => {
                let here = &table.by_cell[(t.k_tape - range.left) as usize];
                for d in in_sets[u].intersection(here) {
                    pairs.insert(DefUsePair {
                        def_node: table.defs[d].0,
                        use_node: u,
                        cell: t.k_tape,
                    });
                }
            }
            CfgNode::Sink => {
                for d in in_sets[u].ones() {
                    let (def_node, cell) = table.defs[d];
                    pairs.insert(DefUsePair {
                        def_node,
                        use_node: u,
                        cell,
                    });
                }
            }
        }
    }
    pairs
}

pub fn compute_tconsist_pair_set(cfg: &Cfg, pairs: &BTreeSet<DefUsePair>) -> TConsistPairSet {
    pairs
        .iter()
        .filter(|p| match cfg.node(p.use_node) {
            CfgNode::Sink => true,
            CfgNode::Step(t) => cfg.def_symbol(p.def_node, p.cell) == t.s,
            CfgNode::Source => false,
        })
        .copied()
        .collect()
}

/// Union over all source-to-sink paths of each use's last writer on that
/// path. Exponential in general; `None` when more than `limit` paths exist.
pub fn pathwise_last_writer_pairs(cfg: &Cfg, limit: usize) -> Option<BTreeSet<DefUsePair>> {
    let range = cfg.range();
    let mut pairs = BTreeSet::new();
    let mut count = 0usize;
    if !cfg.has_path() {
        return Some(pairs);
    }
    // iterative DFS carrying the last-writer table per path
    let start = vec![cfg.source(); range.len()];
    let mut stack: Vec<(NodeId, Vec<NodeId>)> = vec![(cfg.source(), start)];
    while let Some((u, writers)) = stack.pop() {
        let mut writers = writers;
        match cfg.node(u) {
            CfgNode::Source => {}
            CfgNode::Step(t) => {
                let slot = (t.k_tape - range.left) as usize;
                pairs.insert(DefUsePair {
                    def_node: writers[slot],
                    use_node: u,
                    cell: t.k_tape,
                });
                writers[slot] = u;
            }
            CfgNode::Sink => {
                count += 1;
                if count > limit {
                    return None;
                }
                for (cell, &w) in range.cells().zip(&writers) {
                    pairs.insert(DefUsePair {
                        def_node: w,
                        use_node: u,
                        cell,
                    });
                }
                continue;
            }
        }
        for &v in cfg.successors(u) {
            stack.push((v, writers.clone()));
        }
    }
    Some(pairs)
}
