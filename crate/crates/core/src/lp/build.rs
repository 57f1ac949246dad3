//! The path-existence program for one tape window: a unit source-to-sink
//! flow on the CFG, coupled at every node to per-cell sums of commodity
//! flows.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use super::{rat, Equation, LinearSystem, Rational};
use crate::cfg::{Cfg, CfgNode};
use crate::commodity::{Commodity, TconCellGraph};
use crate::error::{Error, Result};
use crate::seqgraph::NodeId;

/// Variable ids of the global flow, which witness extraction reads back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpelpVars {
    /// `F_G[u]` per CFG node.
    pub fg: Vec<usize>,
    /// `H_G[(u, v)]` per CFG edge.
    pub hg: BTreeMap<(NodeId, NodeId), usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tcpelp {
    pub system: LinearSystem,
    pub vars: TcpelpVars,
    pub tape_seg: (i64, i64),
}

fn cell_tag(c: i64) -> String {
    if c < 0 {
        format!("m{}", -c)
    } else {
        c.to_string()
    }
}

/// Flow conservation: inflow at every node but `s`, outflow at every node
/// but `t`.
fn flow_equations(
    sys: &mut LinearSystem,
    nodes: &BTreeMap<NodeId, usize>,
    edges: &BTreeMap<(NodeId, NodeId), usize>,
    s: NodeId,
    t: NodeId,
) {
    let mut inflow: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    let mut outflow: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (&(a, b), &h) in edges {
        outflow.entry(a).or_default().push(h);
        inflow.entry(b).or_default().push(h);
    }
    let one = rat(1);
    let minus = rat(-1);
    for (&u, &f) in nodes {
        if u != s {
            let hs = inflow.get(&u).map(Vec::as_slice).unwrap_or(&[]);
            sys.add_equation(Equation::new(
                std::iter::once((f, one.clone())).chain(hs.iter().map(|&h| (h, minus.clone()))),
                rat(0),
            ));
        }
        if u != t {
            let hs = outflow.get(&u).map(Vec::as_slice).unwrap_or(&[]);
            sys.add_equation(Equation::new(
                std::iter::once((f, one.clone())).chain(hs.iter().map(|&h| (h, minus.clone()))),
                rat(0),
            ));
        }
    }
}

/// Number of variables the program for `tape_seg` will declare.
pub fn tcpelp_variable_count(
    cfg: &Cfg,
    commodities: &[Commodity],
    tcon: &[TconCellGraph],
    tape_seg: (i64, i64),
) -> usize {
    let in_seg = |c: i64| tape_seg.0 <= c && c <= tape_seg.1;
    let k: usize = commodities
        .iter()
        .filter(|c| in_seg(c.cell))
        .map(|c| c.nodes.len() + c.edges.len())
        .sum();
    let t: usize = tcon
        .iter()
        .filter(|g| in_seg(g.cell))
        .map(|g| g.nodes.len() + g.edges.len())
        .sum();
    let width = (tape_seg.1 - tape_seg.0 + 1).max(0) as usize;
    k + t + cfg.node_count() * width + cfg.node_count() + cfg.edge_count()
}

/// Builds the equation system for one window `[tape_seg.0, tape_seg.1]`.
///
/// Two deliberate readings. The per-node sum of commodity flow is taken twice,
/// once over links arriving at the node and once over links leaving it, and
/// both must equal the sum variable; a plain sum over every link containing
/// the node counts a node where one link ends and the next begins twice.
/// And step nodes outside the window carry no global flow.
pub fn build_tcpelp(
    cfg: &Cfg,
    commodities: &[Commodity],
    tcon: &[TconCellGraph],
    tape_seg: (i64, i64),
    max_variables: usize,
) -> Result<Tcpelp> {
    let needed = tcpelp_variable_count(cfg, commodities, tcon, tape_seg);
    if needed > max_variables {
        return Err(Error::Capacity {
            what: "linear system variables",
            needed,
            limit: max_variables,
        });
    }
    let in_seg = |c: i64| tape_seg.0 <= c && c <= tape_seg.1;
    let (s, t) = (cfg.source(), cfg.sink());
    let one = rat(1);
    let minus = rat(-1);
    let mut sys = LinearSystem::new();

    // 1) commodity flows
    let mut fk: BTreeMap<usize, BTreeMap<NodeId, usize>> = BTreeMap::new();
    for c in commodities.iter().filter(|c| in_seg(c.cell)) {
        let i = c.index;
        let nodes: BTreeMap<NodeId, usize> = c
            .nodes
            .iter()
            .map(|&u| (u, sys.add_variable(format!("fk{i}_{u}"))))
            .collect();
        let edges: BTreeMap<(NodeId, NodeId), usize> = c
            .edges
            .iter()
            .map(|&(a, b)| ((a, b), sys.add_variable(format!("hk{i}_{a}_{b}"))))
            .collect();
        flow_equations(&mut sys, &nodes, &edges, c.source, c.target);
        fk.insert(i, nodes);
    }

    // 2) per-cell link graphs
    let mut ft: BTreeMap<i64, BTreeMap<NodeId, usize>> = BTreeMap::new();
    for g in tcon.iter().filter(|g| in_seg(g.cell)) {
        let z = cell_tag(g.cell);
        let nodes: BTreeMap<NodeId, usize> = g
            .nodes
            .iter()
            .map(|&u| (u, sys.add_variable(format!("ft{z}_{u}"))))
            .collect();
        let edges: BTreeMap<(NodeId, NodeId), usize> = g
            .edges
            .iter()
            .map(|&(a, b)| ((a, b), sys.add_variable(format!("ht{z}_{a}_{b}"))))
            .collect();
        flow_equations(&mut sys, &nodes, &edges, s, t);
        ft.insert(g.cell, nodes);
    }

    // 3) per-cell sums of commodity flow at every node
    let mut fs: BTreeMap<(i64, NodeId), usize> = BTreeMap::new();
    for cell in tape_seg.0..=tape_seg.1 {
        let z = cell_tag(cell);
        // arriving: every commodity through or ending at u, plus those
        // starting at the CFG source; leaving: every commodity through or
        // starting at u, plus those ending at the CFG sink
        let mut arriving: Vec<Vec<usize>> = vec![Vec::new(); cfg.node_count()];
        let mut leaving: Vec<Vec<usize>> = vec![Vec::new(); cfg.node_count()];
        for c in commodities.iter().filter(|c| c.cell == cell) {
            for (&u, &var) in &fk[&c.index] {
                if u != c.source || u == s {
                    arriving[u].push(var);
                }
                if u != c.target || u == t {
                    leaving[u].push(var);
                }
            }
        }
        for u in 0..cfg.node_count() {
            let v = sys.add_variable(format!("fs{z}_{u}"));
            fs.insert((cell, u), v);
            for side in [&arriving[u], &leaving[u]] {
                let terms = side.iter().map(|&k| (k, minus.clone()));
                sys.add_equation(Equation::new(std::iter::once((v, one.clone())).chain(terms), rat(0)));
            }
        }
    }

    // 4) global unit flow
    let fg: Vec<usize> = (0..cfg.node_count())
        .map(|u| sys.add_variable(format!("fg_{u}")))
        .collect();
    let hg: BTreeMap<(NodeId, NodeId), usize> = cfg
        .edges()
        .map(|(a, b)| ((a, b), sys.add_variable(format!("hg_{a}_{b}"))))
        .collect();
    let fg_map: BTreeMap<NodeId, usize> = fg.iter().copied().enumerate().collect();
    flow_equations(&mut sys, &fg_map, &hg, s, t);

    // 5) coupling at every node some commodity of the cell passes through
    for cell in tape_seg.0..=tape_seg.1 {
        let covered: BTreeSet<NodeId> = commodities
            .iter()
            .filter(|c| c.cell == cell)
            .flat_map(|c| c.nodes.iter().copied())
            .collect();
        for u in covered {
            sys.add_equation(Equation::new([(fs[&(cell, u)], one.clone()), (fg[u], minus.clone())], rat(0)));
        }
    }

    // 6) one unit leaves the source and reaches the sink
    sys.add_equation(Equation::new([(fg[s], Rational::one())], rat(1)));
    sys.add_equation(Equation::new([(fg[t], Rational::one())], rat(1)));

    // 7) has no instance: a link-graph variable exists only at nodes whose
    // cell set is nonempty

    // 8) dead ends of the link graphs carry nothing
    for g in tcon.iter().filter(|g| in_seg(g.cell)) {
        let has_in: BTreeSet<NodeId> = g.edges.iter().map(|e| e.1).collect();
        let has_out: BTreeSet<NodeId> = g.edges.iter().map(|e| e.0).collect();
        for &u in &g.nodes {
            if u != s && u != t && (!has_in.contains(&u) || !has_out.contains(&u)) {
                sys.add_equation(Equation::new([(ft[&g.cell][&u], one.clone())], rat(0)));
            }
        }
    }

    // window restriction: steps outside the window carry no global flow
    for u in 0..cfg.node_count() {
        if let CfgNode::Step(st) = cfg.node(u) {
            if !in_seg(st.k_tape) {
                sys.add_equation(Equation::new([(fg[u], one.clone())], rat(0)));
            }
        }
    }

    Ok(Tcpelp {
        system: sys,
        vars: TcpelpVars { fg, hg },
        tape_seg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::build_cfg;
    use crate::commodity::{build_commodities, build_tcon_graphs};
    use crate::fixtures;
    use crate::lp::{solve_feasibility, verify_assignment, SolveLimits};
    use crate::machine::MachineSpec;
    use crate::reaching::{compute_tconsist_pair_set, reaching_definitions};
    use crate::seqgraph::build_seq_graph;

    fn parts(m: &MachineSpec, w: &str, mu: u32, sel: &BTreeSet<crate::machine::StateId>) -> (Cfg, Vec<Commodity>) {
        let x = m.parse_word(w).unwrap();
        let c = build_cfg(&build_seq_graph(m, &x, mu), m, &x, sel);
        let pairs = compute_tconsist_pair_set(&c, &reaching_definitions(&c));
        let ks = build_commodities(&c, &pairs);
        (c, ks)
    }

    #[test]
    fn single_path_all_ones() {
        // s -> u -> t with u a single stay-put step at cell 1
        let m = crate::machine::parse_machine(
            "states: a b\ntape_alphabet: _ 1\nblank: _\ninput_alphabet: 1\nstart: a\naccept: b\ndelta:\na 1 -> b 1 S\n",
        )
        .unwrap();
        let (c, ks) = parts(&m, "1", 1, m.accepting());
        assert_eq!(c.node_count(), 3);
        let tcon = build_tcon_graphs(&ks, (1, 1));
        let lp = build_tcpelp(&c, &ks, &tcon, (1, 1), usize::MAX).unwrap();
        let x = vec![rat(1); lp.system.variable_count()];
        assert!(verify_assignment(&lp.system, &x).unwrap());
        assert!(solve_feasibility(&lp.system, SolveLimits::default()).unwrap().is_feasible());
    }

    #[test]
    fn no_path_is_infeasible() {
        let m = fixtures::l1();
        let (c, ks) = parts(&m, "0", 2, m.accepting());
        assert!(!c.has_path());
        let tcon = build_tcon_graphs(&ks, (1, 1));
        let lp = build_tcpelp(&c, &ks, &tcon, (1, 1), usize::MAX).unwrap();
        assert!(!solve_feasibility(&lp.system, SolveLimits::default()).unwrap().is_feasible());
    }

    #[test]
    fn variable_count_matches_structure() {
        let m = fixtures::l1();
        let (c, ks) = parts(&m, "1", 4, m.accepting());
        for seg in [(1, 1), (0, 2), (-2, 4)] {
            let tcon = build_tcon_graphs(&ks, seg);
            let lp = build_tcpelp(&c, &ks, &tcon, seg, usize::MAX).unwrap();
            let by_prefix = |p: &str| lp.system.names().iter().filter(|n| n.starts_with(p)).count();
            let in_seg = |z: i64| seg.0 <= z && z <= seg.1;
            let k: usize = ks.iter().filter(|k| in_seg(k.cell)).map(|k| k.nodes.len() + k.edges.len()).sum();
            assert_eq!(by_prefix("fk") + by_prefix("hk"), k);
            assert_eq!(by_prefix("fs"), c.node_count() * (seg.1 - seg.0 + 1) as usize);
            assert_eq!(by_prefix("fg") + by_prefix("hg"), c.node_count() + c.edge_count());
            assert_eq!(lp.system.variable_count(), tcpelp_variable_count(&c, &ks, &tcon, seg));
        }
    }

    #[test]
    fn capacity_guard_fires_before_building() {
        let m = fixtures::l1();
        let (c, ks) = parts(&m, "1", 3, m.accepting());
        let tcon = build_tcon_graphs(&ks, (1, 2));
        let err = build_tcpelp(&c, &ks, &tcon, (1, 2), 3).unwrap_err();
        assert!(err.is_capacity());
    }
}
