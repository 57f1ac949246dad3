//! Self-contained records of one window where the program and the
//! simulation disagree, and their replay.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::commodity::build_tcon_graphs;
use crate::decider::{analyze, window_has_path, Analysis};
use crate::dot::{cfg_dot, tconsist_dump};
use crate::error::{Error, Result};
use crate::lp::{
    build_tcpelp, format_assignment, parse_assignment, solve_feasibility, verify_assignment, FeasibilityResult,
    SolveLimits, Tcpelp,
};
use crate::machine::{parse_machine, MachineSpec, StateId, Symbol};
use crate::oracle::{consistent_run_in_window, format_oracle, oracle_decide, run_footprints};
use crate::seqgraph::build_seq_graph;

/// Which final states a sequence may end in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StateSelection {
    Accepting,
    Any,
}

impl StateSelection {
    pub fn states(self, m: &MachineSpec) -> BTreeSet<StateId> {
        match self {
            StateSelection::Accepting => m.accepting().clone(),
            StateSelection::Any => m.all_states(),
        }
    }
}

impl fmt::Display for StateSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateSelection::Accepting => "F",
            StateSelection::Any => "any",
        })
    }
}

impl FromStr for StateSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" => Ok(StateSelection::Accepting),
            "any" => Ok(StateSelection::Any),
            _ => Err(Error::InvalidArgument(format!("state set must be `F` or `any`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    LpFeasibleButNoConsistentPath,
    LpInfeasibleButConsistentPathExists,
}

impl Direction {
    pub fn of(lp_feasible: bool, run_exists: bool) -> Option<Direction> {
        match (lp_feasible, run_exists) {
            (true, false) => Some(Direction::LpFeasibleButNoConsistentPath),
            (false, true) => Some(Direction::LpInfeasibleButConsistentPathExists),
            _ => None,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LpFeasibleButNoConsistentPath => "lp_feasible_but_no_consistent_path",
            Direction::LpInfeasibleButConsistentPathExists => "lp_infeasible_but_consistent_path_exists",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp_feasible_but_no_consistent_path" => Ok(Direction::LpFeasibleButNoConsistentPath),
            "lp_infeasible_but_consistent_path_exists" => Ok(Direction::LpInfeasibleButConsistentPathExists),
            _ => Err(Error::InvalidArgument(format!("unknown direction `{s}`"))),
        }
    }
}

/// One window of one analysis. The program is only built when the path
/// prefilter passes; [`CounterexampleBundle::from_evidence`] builds it on
/// demand for the dump.
#[derive(Debug, Clone)]
pub struct WindowEvidence {
    pub tape_seg: (i64, i64),
    pub program: Option<Tcpelp>,
    pub result: FeasibilityResult,
    pub run_exists: bool,
}

impl WindowEvidence {
    pub fn lp_feasible(&self) -> bool {
        self.result.is_feasible()
    }

    pub fn direction(&self) -> Option<Direction> {
        Direction::of(self.lp_feasible(), self.run_exists)
    }
}

fn build_program(a: &Analysis, seg: (i64, i64), limits: SolveLimits) -> Result<Tcpelp> {
    let tcon = build_tcon_graphs(&a.commodities, seg);
    build_tcpelp(&a.cfg, &a.commodities, &tcon, seg, limits.max_variables)
}

/// `footprints` are the run footprints for the analysis' length and state
/// selection, see [`run_footprints`].
pub fn window_evidence(
    a: &Analysis,
    seg: (i64, i64),
    footprints: &BTreeSet<(i64, i64)>,
    limits: SolveLimits,
) -> Result<WindowEvidence> {
    let (program, result) = if window_has_path(&a.cfg, seg) {
        let p = build_program(a, seg, limits)?;
        let r = solve_feasibility(&p.system, limits)?;
        (Some(p), r)
    } else {
        (None, FeasibilityResult::Infeasible)
    };
    Ok(WindowEvidence {
        tape_seg: seg,
        program,
        result,
        run_exists: consistent_run_in_window(footprints, seg),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterexampleBundle {
    pub machine_text: String,
    pub word: Vec<String>,
    pub mu: u32,
    pub selection: StateSelection,
    pub tape_seg: (i64, i64),
    pub direction: Direction,
    pub cfg_dot: String,
    pub tconsist: String,
    pub lp_text: String,
    /// `None` records an infeasible program.
    pub certificate: Option<String>,
    pub oracle: String,
}

fn oracle_text(machine: &MachineSpec, x: &[Symbol], mu: u32, seg: (i64, i64), fp: &BTreeSet<(i64, i64)>) -> String {
    let mut out = String::new();
    for (lo, hi) in fp {
        let _ = writeln!(out, "FOOTPRINT {lo}:{hi}");
    }
    let _ = writeln!(out, "RUN_IN_WINDOW {}", consistent_run_in_window(fp, seg));
    out.push_str(&format_oracle(machine, &oracle_decide(machine, x, mu.max(1))));
    out
}

impl CounterexampleBundle {
    /// `Ok(None)` when the program and the simulation agree on the window.
    pub fn from_evidence(
        machine: &MachineSpec,
        x: &[Symbol],
        a: &Analysis,
        selection: StateSelection,
        ev: &WindowEvidence,
        limits: SolveLimits,
    ) -> Result<Option<Self>> {
        let Some(direction) = ev.direction() else {
            return Ok(None);
        };
        let mu = a.cfg.mu();
        let seg = ev.tape_seg;
        let built;
        let program = match &ev.program {
            Some(p) => p,
            None => {
                built = build_program(a, seg, limits)?;
                &built
            }
        };
        let footprints = run_footprints(machine, x, mu, a.cfg.selected());
        Ok(Some(CounterexampleBundle {
            machine_text: machine.to_text(),
            word: x.iter().map(|&s| machine.symbol_name(s).to_string()).collect(),
            mu,
            selection,
            tape_seg: seg,
            direction,
            cfg_dot: cfg_dot(&a.cfg, machine),
            tconsist: tconsist_dump(&a.cfg, machine, &a.tconsist),
            lp_text: program.system.to_lp_text(),
            certificate: ev.result.assignment().map(|v| format_assignment(&program.system, v)),
            oracle: oracle_text(machine, x, mu, seg, &footprints),
        }))
    }

    fn case_text(&self) -> String {
        format!(
            "mu {}\nset {}\nseg {}:{}\ndirection {}\n",
            self.mu, self.selection, self.tape_seg.0, self.tape_seg.1, self.direction
        )
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("machine.tm"), &self.machine_text)?;
        let input: String = self.word.iter().map(|s| format!("{s}\n")).collect();
        fs::write(dir.join("input.txt"), input)?;
        fs::write(dir.join("case.txt"), self.case_text())?;
        fs::write(dir.join("cfg.dot"), &self.cfg_dot)?;
        fs::write(dir.join("tconsist.txt"), &self.tconsist)?;
        fs::write(dir.join("system.lp"), &self.lp_text)?;
        match &self.certificate {
            Some(c) => fs::write(dir.join("certificate.txt"), c)?,
            None => fs::write(dir.join("INFEASIBLE"), "")?,
        }
        fs::write(dir.join("oracle.txt"), &self.oracle)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let get = |name: &str| fs::read_to_string(dir.join(name));
        let case = get("case.txt")?;
        let field = |key: &str| -> Result<&str> {
            case.lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
                .ok_or_else(|| Error::InvalidArgument(format!("case.txt has no `{key}` line")))
        };
        let mu = field("mu")?
            .parse()
            .map_err(|_| Error::InvalidArgument("case.txt: bad mu".into()))?;
        let tape_seg = parse_segment(field("seg")?)?;
        let certificate = if dir.join("INFEASIBLE").exists() {
            None
        } else {
            Some(get("certificate.txt")?)
        };
        Ok(CounterexampleBundle {
            machine_text: get("machine.tm")?,
            word: get("input.txt")?.split_whitespace().map(str::to_string).collect(),
            mu,
            selection: field("set")?.parse()?,
            tape_seg,
            direction: field("direction")?.parse()?,
            cfg_dot: get("cfg.dot")?,
            tconsist: get("tconsist.txt")?,
            lp_text: get("system.lp")?,
            certificate,
            oracle: get("oracle.txt")?,
        })
    }

    /// Reruns the whole pipeline from the machine text and word.
    pub fn replay(&self, limits: SolveLimits) -> Result<ReplayReport> {
        let m = parse_machine(&self.machine_text)?;
        let x = m.parse_word(&self.word.iter().map(|s| format!("{s}\n")).collect::<String>())?;
        let g = build_seq_graph(&m, &x, self.mu);
        let a = analyze(&g, &m, &x, &self.selection.states(&m));
        let fp = run_footprints(&m, &x, self.mu, a.cfg.selected());
        let ev = window_evidence(&a, self.tape_seg, &fp, limits)?;
        let fresh = CounterexampleBundle::from_evidence(&m, &x, &a, self.selection, &ev, limits)?;
        let certificate_valid = match &self.certificate {
            Some(text) => {
                let program = build_program(&a, self.tape_seg, limits)?;
                let values = program.system.assignment_from_map(&parse_assignment(text)?)?;
                Some(verify_assignment(&program.system, &values)?)
            }
            None => None,
        };
        Ok(ReplayReport {
            direction: ev.direction(),
            identical: fresh.as_ref() == Some(self),
            certificate_valid,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayReport {
    pub direction: Option<Direction>,
    /// Every regenerated dump matches the stored one byte for byte.
    pub identical: bool,
    pub certificate_valid: Option<bool>,
}

impl ReplayReport {
    pub fn reproduces(&self, b: &CounterexampleBundle) -> bool {
        self.direction == Some(b.direction) && self.identical && self.certificate_valid != Some(false)
    }
}

/// `i:j` with `i <= j`.
pub fn parse_segment(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::InvalidArgument(format!("window must be `i:j` with i <= j, got `{s}`"));
    let (i, j) = s.split_once(':').ok_or_else(bad)?;
    let i: i64 = i.trim().parse().map_err(|_| bad())?;
    let j: i64 = j.trim().parse().map_err(|_| bad())?;
    if i > j {
        return Err(bad());
    }
    Ok((i, j))
}
