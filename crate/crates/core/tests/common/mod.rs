//! Oracles written directly from the definitions, sharing no code with the
//! library beyond its data types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use ntmflow::cfg::{Cfg, CfgNode};
use ntmflow::lp::Rational;
use ntmflow::machine::{MachineSpec, Move, Symbol};
use ntmflow::reaching::DefUsePair;
use ntmflow::step::ComputationStep;

pub type StepEdges = BTreeSet<(ComputationStep, ComputationStep)>;

fn offset(m: Move) -> i64 {
    match m {
        Move::L => -1,
        Move::R => 1,
        Move::S => 0,
    }
}

/// Every tuple `(transition, cell, ordinal)` with cell in `[2 - mu, mu]` and
/// ordinal in `[1, mu]`, then a fixpoint over the chaining rule starting from
/// the tuples that can fire first on `x`.
pub fn brute_force_steps(m: &MachineSpec, x: &[Symbol], mu: u32) -> (BTreeSet<ComputationStep>, StepEdges) {
    let first_symbol = x.first().copied().unwrap_or(m.blank());
    let mut all = Vec::new();
    for d in m.delta() {
        for k_tape in (2 - mu as i64)..=(mu as i64) {
            for k_step in 1..=mu {
                all.push(ComputationStep {
                    q: d.from,
                    s: d.read,
                    q_next: d.to,
                    s_next: d.write,
                    m: d.mv,
                    k_tape,
                    k_step,
                });
            }
        }
    }
    let chains = |a: &ComputationStep, b: &ComputationStep| {
        a.k_step < mu && b.q == a.q_next && b.k_step == a.k_step + 1 && b.k_tape == a.k_tape + offset(a.m)
    };
    let mut nodes: BTreeSet<ComputationStep> = all
        .iter()
        .filter(|t| t.k_step == 1 && t.k_tape == 1 && t.q == m.start() && t.s == first_symbol)
        .copied()
        .collect();
    loop {
        let grown: Vec<ComputationStep> = all
            .iter()
            .filter(|b| !nodes.contains(b) && nodes.iter().any(|a| chains(a, b)))
            .copied()
            .collect();
        if grown.is_empty() {
            break;
        }
        nodes.extend(grown);
    }
    let mut edges = BTreeSet::new();
    for a in &nodes {
        for b in &nodes {
            if chains(a, b) {
                edges.insert((*a, *b));
            }
        }
    }
    (nodes, edges)
}

/// Walks every source-to-sink path tracking the last writer of each cell.
/// `None` when there are more than `limit` paths.
pub fn last_writer_pairs(cfg: &Cfg, limit: usize) -> Option<BTreeSet<DefUsePair>> {
    let cells: Vec<i64> = cfg.range().cells().collect();
    let mut pairs = BTreeSet::new();
    let mut paths = 0usize;
    fn walk(
        cfg: &Cfg,
        cells: &[i64],
        u: usize,
        writer: &mut Vec<usize>,
        pairs: &mut BTreeSet<DefUsePair>,
        paths: &mut usize,
        limit: usize,
    ) -> bool {
        match cfg.node(u) {
            CfgNode::Sink => {
                *paths += 1;
                for (i, &cell) in cells.iter().enumerate() {
                    pairs.insert(DefUsePair {
                        def_node: writer[i],
                        use_node: u,
                        cell,
                    });
                }
                return *paths <= limit;
            }
            CfgNode::Step(t) => {
                let i = cells.iter().position(|&c| c == t.k_tape).expect("cell in range");
                pairs.insert(DefUsePair {
                    def_node: writer[i],
                    use_node: u,
                    cell: t.k_tape,
                });
                let saved = writer[i];
                writer[i] = u;
                for &v in cfg.successors(u) {
                    if !walk(cfg, cells, v, writer, pairs, paths, limit) {
                        return false;
                    }
                }
                writer[i] = saved;
                return true;
            }
            CfgNode::Source => {}
        }
        for &v in cfg.successors(u) {
            if !walk(cfg, cells, v, writer, pairs, paths, limit) {
                return false;
            }
        }
        true
    }
    if cfg.node_count() == 0 {
        return Some(pairs);
    }
    let mut writer = vec![cfg.source(); cells.len()];
    walk(cfg, &cells, cfg.source(), &mut writer, &mut pairs, &mut paths, limit).then_some(pairs)
}

/// Solves `A x = b` by Gauss-Jordan elimination. `None` if inconsistent or
/// if the solution is not unique.
fn unique_solution(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Option<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let p = (rank..rows.len()).find(|&i| !rows[i][col].is_zero())?;
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for v in rows[rank].iter_mut() {
            *v = &*v / &pivot;
        }
        for i in 0..rows.len() {
            if i != rank && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for j in 0..=n {
                    let d = &f * &rows[rank][j];
                    rows[i][j] = &rows[i][j] - d;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some(rows[..n].iter().map(|r| r[n].clone()).collect())
}

/// Feasibility of `A x = b, x >= 0` by trying every column subset as a
/// basis: the system is feasible iff it has a basic feasible solution, and
/// every basic solution is the unique solution on its support.
pub fn vertex_enumeration(n: usize, rows: &[(Vec<(usize, Rational)>, Rational)]) -> Option<Vec<Rational>> {
    assert!(n <= 16, "vertex enumeration is exponential");
    let dense: Vec<Vec<Rational>> = rows
        .iter()
        .map(|(terms, _)| {
            let mut r = vec![Rational::zero(); n];
            for (j, c) in terms {
                r[*j] = &r[*j] + c;
            }
            r
        })
        .collect();
    let b: Vec<Rational> = rows.iter().map(|(_, v)| v.clone()).collect();
    for mask in 0u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        if support.len() > rows.len() {
            continue;
        }
        let a: Vec<Vec<Rational>> = dense
            .iter()
            .map(|r| support.iter().map(|&j| r[j].clone()).collect())
            .collect();
        let solution = if support.is_empty() {
            b.iter().all(Zero::is_zero).then(Vec::new)
        } else {
            unique_solution(&a, &b, support.len())
        };
        if let Some(xs) = solution {
            if xs.iter().all(|v| !v.is_negative()) {
                let mut x = vec![Rational::zero(); n];
                for (&j, v) in support.iter().zip(xs) {
                    x[j] = v;
                }
                return Some(x);
            }
        }
    }
    None
}
