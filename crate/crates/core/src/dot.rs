//! Graphviz output and the def-use dump. Node and edge order follow the
//! graphs' own sorted order, so output is byte-stable.

use std::fmt::Write as _;

use crate::cfg::{Cfg, CfgNode};
use crate::machine::MachineSpec;
use crate::reaching::TConsistPairSet;
use crate::seqgraph::{NodeId, SeqGraph};

fn quote(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn seqgraph_dot(g: &SeqGraph, m: &MachineSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph seqgraph {{");
    let _ = writeln!(out, "  // mu = {}", g.mu());
    for (u, t) in g.steps().iter().enumerate() {
        let _ = writeln!(out, "  n{u} [label=\"{}\"];", quote(&t.display(m).to_string()));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  n{u} -> n{v};");
    }
    let _ = writeln!(out, "}}");
    out
}

fn cfg_name(cfg: &Cfg, u: NodeId) -> String {
    match cfg.node(u) {
        CfgNode::Source => "s".into(),
        CfgNode::Sink => "t".into(),
        CfgNode::Step(_) => format!("n{u}"),
    }
}

pub fn cfg_dot(cfg: &Cfg, m: &MachineSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph cfg {{");
    let r = cfg.range();
    let _ = writeln!(out, "  // mu = {}, cells {}..{}", cfg.mu(), r.left, r.right);
    for u in 0..cfg.node_count() {
        let label = match cfg.node(u) {
            CfgNode::Source => "source".to_string(),
            CfgNode::Sink => "sink".to_string(),
            CfgNode::Step(t) => t.display(m).to_string(),
        };
        let _ = writeln!(out, "  {} [label=\"{}\"];", cfg_name(cfg, u), quote(&label));
    }
    for (u, v) in cfg.edges() {
        let _ = writeln!(out, "  {} -> {};", cfg_name(cfg, u), cfg_name(cfg, v));
    }
    let _ = writeln!(out, "}}");
    out
}

/// One `def ~ use [cell k]` line per pair, source and sink written `s`, `t`.
pub fn tconsist_dump(cfg: &Cfg, m: &MachineSpec, pairs: &TConsistPairSet) -> String {
    let show = |u: NodeId| match cfg.node(u) {
        CfgNode::Source => "s".to_string(),
        CfgNode::Sink => "t".to_string(),
        CfgNode::Step(t) => t.display(m).to_string(),
    };
    let mut out = String::new();
    for p in pairs {
        let _ = writeln!(out, "{} ~ {} [cell {}]", show(p.def_node), show(p.use_node), p.cell);
    }
    out
}
