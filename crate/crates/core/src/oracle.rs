//! Ground truth by direct simulation of the configuration tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::machine::{Configuration, MachineSpec, StateId, Symbol, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Accept,
    Reject,
    UndecidedAtCap,
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleVerdict::Accept => "accept",
            OracleVerdict::Reject => "reject",
            OracleVerdict::UndecidedAtCap => "undecided_at_cap",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    pub shortest_accepting_length: Option<u32>,
    /// Configurations of a shortest accepting run, initial one included.
    pub path: Option<Vec<Configuration>>,
}

/// Breadth-first search, one level per step. Configurations are merged
/// within a level only, so a machine that cycles stays undecided until the
/// cap instead of being mistaken for one that halts.
pub fn oracle_decide(machine: &MachineSpec, x: &[Symbol], step_cap: u32) -> OracleResult {
    let init = machine.initial_configuration(x);
    if machine.is_accepting(init.state) {
        return OracleResult {
            verdict: OracleVerdict::Accept,
            shortest_accepting_length: Some(0),
            path: Some(vec![init]),
        };
    }
    // levels[k][i] = (configuration, index of its parent in level k-1)
    let mut levels: Vec<Vec<(Configuration, usize)>> = vec![vec![(init, 0)]];
    for depth in 1..=step_cap {
        let prev = levels.last().expect("nonempty");
        let mut seen: BTreeMap<Configuration, usize> = BTreeMap::new();
        let mut next = Vec::new();
        for (pi, (c, _)) in prev.iter().enumerate() {
            for succ in machine.step(c) {
                if !seen.contains_key(&succ) {
                    seen.insert(succ.clone(), next.len());
                    next.push((succ, pi));
                }
            }
        }
        if next.is_empty() {
            return OracleResult {
                verdict: OracleVerdict::Reject,
                shortest_accepting_length: None,
                path: None,
            };
        }
        let hit = next.iter().position(|(c, _)| machine.is_accepting(c.state));
        levels.push(next);
        if let Some(mut i) = hit {
            let mut path = Vec::with_capacity(levels.len());
            for level in levels.iter().rev() {
                path.push(level[i].0.clone());
                i = level[i].1;
            }
            path.reverse();
            return OracleResult {
                verdict: OracleVerdict::Accept,
                shortest_accepting_length: Some(depth),
                path: Some(path),
            };
        }
    }
    OracleResult {
        verdict: OracleVerdict::UndecidedAtCap,
        shortest_accepting_length: None,
        path: None,
    }
}

/// Checks that consecutive configurations are related by the machine's step
/// relation and that the run starts from the initial configuration.
pub fn replays(machine: &MachineSpec, x: &[Symbol], path: &[Configuration]) -> bool {
    match path.first() {
        Some(c) if *c == machine.initial_configuration(x) => {}
        _ => return false,
    }
    path.windows(2).all(|w| machine.step(&w[0]).contains(&w[1]))
}

pub fn format_oracle(machine: &MachineSpec, r: &OracleResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "ORACLE_VERDICT {}", r.verdict);
    if let Some(n) = r.shortest_accepting_length {
        let _ = writeln!(out, "ORACLE_SHORTEST {n}");
    }
    if let Some(p) = &r.path {
        for c in p {
            let _ = writeln!(out, "ORACLE_CONFIG {}", c.display(machine));
        }
    }
    out
}

/// Every run of exactly `mu` transitions from the initial configuration, as
/// the transitions fired. Runs that halt earlier are not included.
pub fn runs_of_length(machine: &MachineSpec, x: &[Symbol], mu: u32, budget: usize) -> Result<Vec<Vec<Transition>>> {
    let mut out = Vec::new();
    let mut stack: Vec<(Configuration, Vec<Transition>)> = vec![(machine.initial_configuration(x), Vec::new())];
    while let Some((c, fired)) = stack.pop() {
        if fired.len() as u32 == mu {
            out.push(fired);
            if out.len() > budget {
                return Err(Error::Capacity {
                    what: "enumerated runs",
                    needed: out.len(),
                    limit: budget,
                });
            }
            continue;
        }
        let read = c.read(machine.blank());
        for t in machine.transitions_at(c.state, read) {
            let mut f = fired.clone();
            f.push(*t);
            stack.push((c.apply(t, machine.blank()), f));
        }
    }
    out.sort();
    Ok(out)
}

/// Footprints `(leftmost, rightmost)` of the cells read by runs of exactly
/// `mu` transitions ending in a state of `selected`.
pub fn run_footprints(
    machine: &MachineSpec,
    x: &[Symbol],
    mu: u32,
    selected: &BTreeSet<StateId>,
) -> BTreeSet<(i64, i64)> {
    let init = machine.initial_configuration(x);
    let mut level: BTreeSet<(Configuration, i64, i64)> = BTreeSet::from([(init, 1, 1)]);
    for _ in 0..mu {
        let mut next = BTreeSet::new();
        for (c, lo, hi) in &level {
            // the cell read by this step is the current head
            let (lo, hi) = ((*lo).min(c.head), (*hi).max(c.head));
            for s in machine.step(c) {
                next.insert((s, lo, hi));
            }
        }
        level = next;
    }
    level
        .into_iter()
        .filter(|(c, _, _)| selected.contains(&c.state))
        .map(|(_, lo, hi)| (lo, hi))
        .collect()
}

/// Whether a run of exactly `mu` transitions ending in `selected` stays
/// inside the window.
pub fn consistent_run_in_window(footprints: &BTreeSet<(i64, i64)>, seg: (i64, i64)) -> bool {
    footprints.iter().any(|&(lo, hi)| seg.0 <= lo && hi <= seg.1)
}
