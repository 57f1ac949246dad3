//! Window search over the path-existence program and the outer loop over
//! sequence lengths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::cfg::{build_cfg, Cfg, CfgNode};
use crate::commodity::{build_commodities, build_tcon_graphs, Commodity};
use crate::error::Result;
use crate::lp::{build_tcpelp, solve_feasibility, FeasibilityResult, Rational, SolveLimits, Tcpelp};
use crate::machine::{MachineSpec, StateId, Symbol};
use crate::reaching::{compute_tconsist_pair_set, reaching_definitions, DefUsePair, TConsistPairSet};
use crate::seqgraph::{build_seq_graph, NodeId, SeqGraph};
use crate::step::{ComputationStep, StepSequence};

/// Everything derived from one step graph and one state selection.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub cfg: Cfg,
    pub pairs: BTreeSet<DefUsePair>,
    pub tconsist: TConsistPairSet,
    pub commodities: Vec<Commodity>,
}

pub fn analyze(g: &SeqGraph, machine: &MachineSpec, x: &[Symbol], selected: &BTreeSet<StateId>) -> Analysis {
    let cfg = build_cfg(g, machine, x, selected);
    let pairs = reaching_definitions(&cfg);
    let tconsist = compute_tconsist_pair_set(&cfg, &pairs);
    let commodities = build_commodities(&cfg, &tconsist);
    Analysis {
        cfg,
        pairs,
        tconsist,
        commodities,
    }
}

/// All windows `[i, j]` of the tape range in search order.
pub fn windows(cfg: &Cfg) -> Vec<(i64, i64)> {
    let r = cfg.range();
    r.cells()
        .flat_map(|i| (i..=r.right).map(move |j| (i, j)))
        .collect()
}

/// Whether some source-to-sink path uses only steps inside the window. The
/// program forces zero global flow on every other step and a unit flow
/// from source to sink, so without such a path it is infeasible.
pub fn window_has_path(cfg: &Cfg, seg: (i64, i64)) -> bool {
    let inside = |u: NodeId| match cfg.node(u) {
        CfgNode::Step(t) => seg.0 <= t.k_tape && t.k_tape <= seg.1,
        _ => true,
    };
    let mut seen = vec![false; cfg.node_count()];
    let mut stack = vec![cfg.source()];
    seen[cfg.source()] = true;
    while let Some(u) = stack.pop() {
        if u == cfg.sink() {
            return true;
        }
        for &v in cfg.successors(u) {
            if !seen[v] && inside(v) {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct WindowSolution {
    pub tape_seg: (i64, i64),
    pub program: Tcpelp,
    pub result: FeasibilityResult,
}

/// Builds and solves the program for one window. `None` when the window is
/// infeasible for lack of any path inside it.
pub fn solve_window(a: &Analysis, seg: (i64, i64), limits: SolveLimits) -> Result<Option<WindowSolution>> {
    if !window_has_path(&a.cfg, seg) {
        return Ok(None);
    }
    let tcon = build_tcon_graphs(&a.commodities, seg);
    let program = build_tcpelp(&a.cfg, &a.commodities, &tcon, seg, limits.max_variables)?;
    let result = solve_feasibility(&program.system, limits)?;
    Ok(Some(WindowSolution {
        tape_seg: seg,
        program,
        result,
    }))
}

#[derive(Debug, Clone)]
pub struct ExistsOutcome {
    /// First feasible window in search order with its certificate.
    pub feasible: Option<WindowSolution>,
}

impl ExistsOutcome {
    pub fn found(&self) -> bool {
        self.feasible.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeciderConfig {
    pub step_cap: u32,
    pub limits: SolveLimits,
    /// Solve windows of one length concurrently; the earliest feasible
    /// window in search order still wins.
    pub parallel: bool,
}

impl Default for DeciderConfig {
    fn default() -> Self {
        DeciderConfig {
            step_cap: 64,
            limits: SolveLimits::default(),
            parallel: true,
        }
    }
}

pub fn exists_in_analysis(a: &Analysis, limits: SolveLimits, parallel: bool) -> Result<ExistsOutcome> {
    if !a.cfg.has_path() {
        return Ok(ExistsOutcome { feasible: None });
    }
    let ws = windows(&a.cfg);
    let keep = |r: &Result<Option<WindowSolution>>| match r {
        Err(_) => true,
        Ok(Some(w)) => w.result.is_feasible(),
        Ok(None) => false,
    };
    let hit = if parallel {
        ws.par_iter().map(|&w| solve_window(a, w, limits)).find_first(keep)
    } else {
        ws.iter().map(|&w| solve_window(a, w, limits)).find(keep)
    };
    match hit {
        Some(Err(e)) => Err(e),
        Some(Ok(w)) => Ok(ExistsOutcome { feasible: w }),
        None => Ok(ExistsOutcome { feasible: None }),
    }
}

pub fn exists_tconsistent_seq(
    machine: &MachineSpec,
    x: &[Symbol],
    mu: u32,
    selected: &BTreeSet<StateId>,
    limits: SolveLimits,
) -> Result<(Analysis, ExistsOutcome)> {
    let g = build_seq_graph(machine, x, mu);
    let a = analyze(&g, machine, x, selected);
    let out = exists_in_analysis(&a, limits, true)?;
    Ok((a, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    CapExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::CapExhausted => "cap_exhausted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaRecord {
    pub mu: u32,
    pub gamma_f: bool,
    /// Not computed when `gamma_f` already accepted.
    pub gamma_any: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionFailure {
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessOutcome {
    /// Steps of the run followed by the terminal extra step.
    Path(StepSequence),
    Failed(ExtractionFailure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub mu_final: u32,
    pub gamma_trace: Vec<GammaRecord>,
    pub window: Option<(i64, i64)>,
    pub witness: Option<WitnessOutcome>,
}

/// Raises the sequence length until either an accepting sequence is found
/// (accept) or no sequence of that length exists at all (reject).
///
/// The "any state" selection is all of Q. Excluding the start state would
/// hide runs that loop back to it and reject inputs the machine accepts
/// later.
pub fn decide(machine: &MachineSpec, x: &[Symbol], config: DeciderConfig) -> Result<Decision> {
    if machine.is_accepting(machine.start()) {
        return Ok(Decision {
            verdict: Verdict::Accept,
            mu_final: 0,
            gamma_trace: Vec::new(),
            window: None,
            witness: Some(WitnessOutcome::Path(StepSequence::new(Vec::new())?)),
        });
    }
    let any = machine.all_states();
    let mut trace = Vec::new();
    for mu in 1..=config.step_cap {
        let g = build_seq_graph(machine, x, mu);
        let af = analyze(&g, machine, x, machine.accepting());
        let of = exists_in_analysis(&af, config.limits, config.parallel)?;
        if let Some(w) = of.feasible {
            trace.push(GammaRecord {
                mu,
                gamma_f: true,
                gamma_any: None,
            });
            let values = w.result.assignment().expect("feasible window");
            let witness = match extract_witness(machine, x, &af.cfg, &w.program, values) {
                Ok(p) => WitnessOutcome::Path(p),
                Err(f) => WitnessOutcome::Failed(f),
            };
            return Ok(Decision {
                verdict: Verdict::Accept,
                mu_final: mu,
                gamma_trace: trace,
                window: Some(w.tape_seg),
                witness: Some(witness),
            });
        }
        let aa = analyze(&g, machine, x, &any);
        let gamma_any = exists_in_analysis(&aa, config.limits, config.parallel)?.found();
        trace.push(GammaRecord {
            mu,
            gamma_f: false,
            gamma_any: Some(gamma_any),
        });
        if !gamma_any {
            return Ok(Decision {
                verdict: Verdict::Reject,
                mu_final: mu,
                gamma_trace: trace,
                window: None,
                witness: None,
            });
        }
    }
    Ok(Decision {
        verdict: Verdict::CapExhausted,
        mu_final: config.step_cap,
        gamma_trace: trace,
        window: None,
        witness: None,
    })
}

const EXTRACTION_BUDGET: usize = 200_000;

/// Walks positive global-flow edges from the source, replaying reads
/// against the tape as it goes, and returns the first run that reaches the
/// sink with every read consistent.
pub fn extract_witness(
    machine: &MachineSpec,
    x: &[Symbol],
    cfg: &Cfg,
    program: &Tcpelp,
    values: &[Rational],
) -> std::result::Result<StepSequence, ExtractionFailure> {
    if values.len() != program.system.variable_count() {
        return Err(ExtractionFailure {
            reason: "certificate does not match the program".into(),
        });
    }
    let positive = |u: NodeId, v: NodeId| {
        program
            .vars
            .hg
            .get(&(u, v))
            .is_some_and(|&h| values[h].is_positive())
    };
    if !values[program.vars.fg[cfg.source()]].is_positive() {
        return Err(ExtractionFailure {
            reason: "no flow leaves the source".into(),
        });
    }

    struct Frame {
        node: NodeId,
        next: usize,
        /// Previous contents of the cell this node wrote.
        undo: Option<(i64, Option<Symbol>)>,
    }
    let mut tape: BTreeMap<i64, Symbol> = BTreeMap::new();
    let mut path: Vec<ComputationStep> = Vec::new();
    let mut stack = vec![Frame {
        node: cfg.source(),
        next: 0,
        undo: None,
    }];
    let mut explored = 0usize;
    let mut inconsistent_prefixes = 0usize;
    while let Some(top) = stack.last_mut() {
        let u = top.node;
        if u == cfg.sink() {
            let seq = StepSequence::new(path.clone()).map_err(|e| ExtractionFailure { reason: e.to_string() })?;
            return Ok(seq.with_extra_step(machine, x));
        }
        let succ = cfg.successors(u);
        if top.next >= succ.len() {
            let frame = stack.pop().expect("nonempty");
            if let Some((cell, old)) = frame.undo {
                match old {
                    Some(s) => tape.insert(cell, s),
                    None => tape.remove(&cell),
                };
                path.pop();
            }
            continue;
        }
        let v = succ[top.next];
        top.next += 1;
        if !positive(u, v) {
            continue;
        }
        explored += 1;
        if explored > EXTRACTION_BUDGET {
            return Err(ExtractionFailure {
                reason: format!("search budget of {EXTRACTION_BUDGET} edges exhausted"),
            });
        }
        match cfg.node(v) {
            CfgNode::Step(t) => {
                let current = tape
                    .get(&t.k_tape)
                    .copied()
                    .unwrap_or_else(|| machine.input_symbol(x, t.k_tape));
                if current != t.s {
                    inconsistent_prefixes += 1;
                    continue;
                }
                let old = tape.insert(t.k_tape, t.s_next);
                path.push(t);
                stack.push(Frame {
                    node: v,
                    next: 0,
                    undo: Some((t.k_tape, old)),
                });
            }
            _ => stack.push(Frame {
                node: v,
                next: 0,
                undo: None,
            }),
        }
    }
    Err(ExtractionFailure {
        reason: format!(
            "positive flow decomposes into no consistent path ({inconsistent_prefixes} inconsistent reads pruned)"
        ),
    })
}

/// Line-oriented report: `GAMMA` per length, `MU`, the window, witness or
/// extraction failure, and `VERDICT` last.
pub fn format_decision(machine: &MachineSpec, d: &Decision) -> String {
    let mut out = String::new();
    let b = |v: bool| if v { "true" } else { "false" };
    for g in &d.gamma_trace {
        let any = g.gamma_any.map(b).unwrap_or("-");
        let _ = writeln!(out, "GAMMA {} {} {}", g.mu, b(g.gamma_f), any);
    }
    let _ = writeln!(out, "MU {}", d.mu_final);
    if let Some((i, j)) = d.window {
        let _ = writeln!(out, "WINDOW {i}:{j}");
    }
    match &d.witness {
        Some(WitnessOutcome::Path(p)) => {
            if p.is_empty() {
                let _ = writeln!(out, "WITNESS");
            } else {
                let _ = writeln!(out, "WITNESS {}", p.display(machine));
            }
        }
        Some(WitnessOutcome::Failed(f)) => {
            let _ = writeln!(out, "EXTRACTION_FAILURE {}", f.reason);
        }
        None => {}
    }
    let _ = writeln!(out, "VERDICT {}", d.verdict);
    out
}

/// Certificate of a path: unit flow on its CFG nodes and edges, on each
/// cell's chain of def-use links, and on the matching link-graph edges.
/// Everything else is zero. Used to check that real runs are feasible.
pub fn path_certificate(a: &Analysis, program: &Tcpelp, path: &[NodeId]) -> Option<Vec<Rational>> {
    let sys = &program.system;
    let mut values = vec![Rational::zero(); sys.variable_count()];
    let index: BTreeMap<&str, usize> = sys.names().iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let one = crate::lp::rat(1);
    let mut set = |name: String| -> Option<()> {
        let &i = index.get(name.as_str())?;
        values[i] = one.clone();
        Some(())
    };
    for &u in path {
        set(format!("fg_{u}"))?;
    }
    for w in path.windows(2) {
        set(format!("hg_{}_{}", w[0], w[1]))?;
    }
    let (lo, hi) = program.tape_seg;
    let commodity_index: BTreeMap<(NodeId, NodeId, i64), usize> = a
        .commodities
        .iter()
        .map(|c| ((c.source, c.target, c.cell), c.index))
        .collect();
    for cell in lo..=hi {
        let tag = if cell < 0 { format!("m{}", -cell) } else { cell.to_string() };
        // positions on the path that use the cell, closed by the sink
        let mut stops = vec![0usize];
        for (k, &u) in path.iter().enumerate().skip(1) {
            let uses = match a.cfg.node(u) {
                CfgNode::Step(t) => t.k_tape == cell,
                CfgNode::Sink => true,
                CfgNode::Source => false,
            };
            if uses {
                stops.push(k);
            }
        }
        for link in stops.windows(2) {
            let (from, to) = (path[link[0]], path[link[1]]);
            let &i = commodity_index.get(&(from, to, cell))?;
            for &u in &path[link[0]..=link[1]] {
                set(format!("fk{i}_{u}"))?;
            }
            for w in path[link[0]..=link[1]].windows(2) {
                set(format!("hk{i}_{}_{}", w[0], w[1]))?;
            }
            set(format!("ft{tag}_{from}"))?;
            set(format!("ft{tag}_{to}"))?;
            set(format!("ht{tag}_{from}_{to}"))?;
        }
        for &u in path {
            set(format!("fs{tag}_{u}"))?;
        }
    }
    Some(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lp::verify_assignment;

    fn cfg(step_cap: u32) -> DeciderConfig {
        DeciderConfig {
            step_cap,
            ..Default::default()
        }
    }

    #[test]
    fn l1_accepts_one_and_rejects_zero() {
        let m = fixtures::l1();
        let d = decide(&m, &m.parse_word("1").unwrap(), cfg(16)).unwrap();
        assert_eq!(d.verdict, Verdict::Accept);
        assert_eq!(d.mu_final, 3);
        match d.witness {
            Some(WitnessOutcome::Path(p)) => {
                assert_eq!(p.len(), 4);
                assert!(m.is_accepting(p.last_state().unwrap()));
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        let d = decide(&m, &m.parse_word("0").unwrap(), cfg(16)).unwrap();
        assert_eq!(d.verdict, Verdict::Reject);
    }

    #[test]
    fn empty_selection_is_false_without_solving() {
        let m = fixtures::l1();
        let x = m.parse_word("1").unwrap();
        let (a, out) = exists_tconsistent_seq(&m, &x, 3, &BTreeSet::new(), SolveLimits::default()).unwrap();
        assert!(!a.cfg.has_path());
        assert!(!out.found());
    }

    #[test]
    fn looping_machine_exhausts_the_cap() {
        let m = crate::machine::parse_machine(
            "states: a b\ntape_alphabet: _ 1\nblank: _\ninput_alphabet: 1\nstart: a\naccept: b\ndelta:\na 1 -> a 1 S\n",
        )
        .unwrap();
        let d = decide(&m, &m.parse_word("1").unwrap(), cfg(5)).unwrap();
        assert_eq!(d.verdict, Verdict::CapExhausted);
        assert_eq!(d.gamma_trace.len(), 5);
    }

    #[test]
    fn accepting_start_accepts_at_zero() {
        let m = crate::machine::parse_machine(
            "states: a\ntape_alphabet: _ 1\nblank: _\ninput_alphabet: 1\nstart: a\naccept: a\ndelta:\na 1 -> a 1 S\n",
        )
        .unwrap();
        let d = decide(&m, &[], cfg(5)).unwrap();
        assert_eq!((d.verdict, d.mu_final), (Verdict::Accept, 0));
    }

    #[test]
    fn real_run_certificate_verifies() {
        let m = fixtures::l1();
        let x = m.parse_word("01").unwrap();
        let g = build_seq_graph(&m, &x, 4);
        let a = analyze(&g, &m, &x, m.accepting());
        // L1 is deterministic: follow the only successor that reads the tape
        let mut tape: BTreeMap<i64, Symbol> = BTreeMap::new();
        let mut run = vec![a.cfg.source()];
        while *run.last().unwrap() != a.cfg.sink() {
            let next = a
                .cfg
                .successors(*run.last().unwrap())
                .iter()
                .copied()
                .find(|&v| match a.cfg.step(v) {
                    Some(t) => t.s == tape.get(&t.k_tape).copied().unwrap_or_else(|| m.input_symbol(&x, t.k_tape)),
                    None => true,
                })
                .unwrap();
            if let Some(t) = a.cfg.step(next) {
                tape.insert(t.k_tape, t.s_next);
            }
            run.push(next);
        }
        assert_eq!(run.len(), 6);
        let sol = solve_window(&a, (1, 3), SolveLimits::default()).unwrap().unwrap();
        let cert = path_certificate(&a, &sol.program, &run).unwrap();
        assert!(verify_assignment(&sol.program.system, &cert).unwrap());
    }

    #[test]
    fn report_ends_with_verdict() {
        let m = fixtures::l1();
        let d = decide(&m, &m.parse_word("01").unwrap(), cfg(16)).unwrap();
        let text = format_decision(&m, &d);
        assert!(text.ends_with("VERDICT accept\n"), "{text}");
        assert!(text.contains("GAMMA 4 true -\n"));
    }
}
