//! Differential testing of the decider against direct simulation over
//! seeded random machines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::bundle::{window_evidence, CounterexampleBundle, Direction, StateSelection};
use crate::decider::{analyze, decide, windows, DeciderConfig, Verdict};
use crate::error::Result;
use crate::lp::SolveLimits;
use crate::machine::{MachineSpec, Symbol};
use crate::oracle::{oracle_decide, run_footprints, OracleVerdict};
use crate::random::{random_machine, MachineBounds};
use crate::seqgraph::build_seq_graph;

#[derive(Debug, Clone)]
pub struct DifftestConfig {
    pub machines: usize,
    pub seed: u64,
    pub max_input_len: usize,
    pub mu_cap: u32,
    pub bounds: MachineBounds,
    pub limits: SolveLimits,
    /// Bundles are written below this directory when set.
    pub bundle_dir: Option<PathBuf>,
}

impl Default for DifftestConfig {
    fn default() -> Self {
        DifftestConfig {
            machines: 200,
            seed: 0,
            max_input_len: 3,
            mu_cap: 8,
            bounds: MachineBounds::new(4, 3, 8),
            limits: SolveLimits { max_variables: 5_000 },
            bundle_dir: None,
        }
    }
}

/// Machine `i` of a campaign is generated from `seed + i`.
pub fn campaign_machine(seed: u64, i: usize, bounds: MachineBounds) -> MachineSpec {
    random_machine(seed.wrapping_add(i as u64), bounds)
}

/// Every word over the input alphabet of length at most `n`, shortest first.
pub fn words_up_to(m: &MachineSpec, n: usize) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|w| {
                m.input_alphabet().iter().map(move |&s| {
                    let mut w = w.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VerdictComparison {
    Agree,
    LpOnlyAccepts,
    OracleOnlyAccepts,
    /// Neither accepts but one rejects where the other ran out of steps.
    Inconclusive,
}

pub fn compare_verdicts(lp: Verdict, oracle: OracleVerdict) -> VerdictComparison {
    use VerdictComparison::*;
    match (lp, oracle) {
        (Verdict::Accept, OracleVerdict::Accept)
        | (Verdict::Reject, OracleVerdict::Reject)
        | (Verdict::CapExhausted, OracleVerdict::UndecidedAtCap) => Agree,
        (Verdict::Accept, _) => LpOnlyAccepts,
        (_, OracleVerdict::Accept) => OracleOnlyAccepts,
        _ => Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub machine: usize,
    pub word: String,
    pub mu: u32,
    pub selection: StateSelection,
    pub tape_seg: (i64, i64),
    pub direction: Direction,
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skip {
    pub machine: usize,
    pub word: String,
    pub stage: String,
    pub reason: String,
}

/// `(mu, selection, window, direction, bundle)`
type CaseDisagreement = (u32, StateSelection, (i64, i64), Direction, Option<CounterexampleBundle>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct CaseResult {
    verdict: Option<VerdictComparison>,
    verdict_pair: Option<(Verdict, OracleVerdict)>,
    windows_checked: usize,
    windows_feasible: usize,
    disagreements: Vec<CaseDisagreement>,
    skips: Vec<(String, String)>,
}

fn run_case(m: &MachineSpec, x: &[Symbol], config: &DifftestConfig) -> CaseResult {
    let mut r = CaseResult::default();
    let dc = DeciderConfig {
        step_cap: config.mu_cap,
        limits: config.limits,
        parallel: false,
    };
    let oracle = oracle_decide(m, x, config.mu_cap).verdict;
    match decide(m, x, dc) {
        Ok(d) => {
            r.verdict = Some(compare_verdicts(d.verdict, oracle));
            r.verdict_pair = Some((d.verdict, oracle));
        }
        Err(e) => r.skips.push(("decide".into(), e.to_string())),
    }
    for mu in 1..=config.mu_cap {
        let g = build_seq_graph(m, x, mu);
        if g.is_empty() {
            // no longer sequence exists either
            break;
        }
        for sel in [StateSelection::Accepting, StateSelection::Any] {
            let a = analyze(&g, m, x, &sel.states(m));
            let fp = run_footprints(m, x, mu, a.cfg.selected());
            for seg in windows(&a.cfg) {
                let stage = || format!("mu={mu} set={sel} seg={}:{}", seg.0, seg.1);
                let ev = match window_evidence(&a, seg, &fp, config.limits) {
                    Ok(ev) => ev,
                    Err(e) => {
                        r.skips.push((stage(), e.to_string()));
                        continue;
                    }
                };
                r.windows_checked += 1;
                r.windows_feasible += ev.lp_feasible() as usize;
                let Some(direction) = ev.direction() else { continue };
                let bundle = match CounterexampleBundle::from_evidence(m, x, &a, sel, &ev, config.limits) {
                    Ok(b) => b,
                    // the disagreement still counts; only its dump is missing
                    Err(e) => {
                        r.skips.push((format!("{} bundle", stage()), e.to_string()));
                        None
                    }
                };
                r.disagreements.push((mu, sel, seg, direction, bundle));
            }
        }
    }
    r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifftestReport {
    pub machines: usize,
    pub seed: u64,
    pub max_input_len: usize,
    pub mu_cap: u32,
    pub cases: usize,
    pub verdicts: BTreeMap<VerdictComparison, usize>,
    /// Verdict pairs that differ, keyed by machine and word.
    pub verdict_mismatches: Vec<(usize, String, Verdict, OracleVerdict)>,
    pub windows_checked: usize,
    pub windows_feasible: usize,
    pub disagreements: Vec<Disagreement>,
    pub skips: Vec<Skip>,
}

impl DifftestReport {
    pub fn count(&self, d: Direction) -> usize {
        self.disagreements.iter().filter(|x| x.direction == d).count()
    }

    /// Oracle acceptances the decider missed plus windows with a real run
    /// and an infeasible program. The decider is meant to make both zero.
    pub fn soundness_violations(&self) -> usize {
        self.verdicts.get(&VerdictComparison::OracleOnlyAccepts).copied().unwrap_or(0)
            + self.count(Direction::LpInfeasibleButConsistentPathExists)
    }

    pub fn all_agree(&self) -> bool {
        self.disagreements.is_empty() && self.verdict_mismatches.is_empty()
    }

    /// `key value` lines followed by one line per disagreement and skip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(
            w,
            "DIFFTEST seed={} machines={} max_input_len={} mu_cap={}",
            self.seed, self.machines, self.max_input_len, self.mu_cap
        );
        let _ = writeln!(w, "CASES {}", self.cases);
        for (name, k) in [
            ("VERDICT_AGREE", VerdictComparison::Agree),
            ("VERDICT_LP_ONLY_ACCEPTS", VerdictComparison::LpOnlyAccepts),
            ("VERDICT_ORACLE_ONLY_ACCEPTS", VerdictComparison::OracleOnlyAccepts),
            ("VERDICT_INCONCLUSIVE", VerdictComparison::Inconclusive),
        ] {
            let _ = writeln!(w, "{name} {}", self.verdicts.get(&k).copied().unwrap_or(0));
        }
        let _ = writeln!(w, "WINDOWS_CHECKED {}", self.windows_checked);
        let _ = writeln!(w, "WINDOWS_FEASIBLE {}", self.windows_feasible);
        for d in [
            Direction::LpFeasibleButNoConsistentPath,
            Direction::LpInfeasibleButConsistentPathExists,
        ] {
            let _ = writeln!(w, "DIRECTION {d} {}", self.count(d));
        }
        let _ = writeln!(w, "SOUNDNESS_VIOLATIONS {}", self.soundness_violations());
        let _ = writeln!(w, "CAPACITY_SKIPS {}", self.skips.len());
        for (i, word, lp, oracle) in &self.verdict_mismatches {
            let _ = writeln!(w, "VERDICT_MISMATCH machine={i} input={word:?} lp={lp} oracle={oracle}");
        }
        for d in &self.disagreements {
            let _ = write!(
                w,
                "DISAGREE machine={} input={:?} mu={} set={} seg={}:{} direction={}",
                d.machine, d.word, d.mu, d.selection, d.tape_seg.0, d.tape_seg.1, d.direction
            );
            if let Some(p) = &d.bundle {
                let _ = write!(w, " bundle={}", p.display());
            }
            let _ = writeln!(w);
        }
        for s in &self.skips {
            let _ = writeln!(w, "SKIP machine={} input={:?} stage={} reason={}", s.machine, s.word, s.stage, s.reason);
        }
        let _ = writeln!(w, "ALL_AGREE {}", self.all_agree());
        out
    }
}

/// Cases run in parallel; results are merged in (machine, word) order so the
/// report and bundle names depend only on the configuration.
pub fn run_difftest(config: &DifftestConfig) -> Result<DifftestReport> {
    let machines: Vec<MachineSpec> = (0..config.machines)
        .map(|i| campaign_machine(config.seed, i, config.bounds))
        .collect();
    let cases: Vec<(usize, Vec<Symbol>)> = machines
        .iter()
        .enumerate()
        .flat_map(|(i, m)| words_up_to(m, config.max_input_len).into_iter().map(move |w| (i, w)))
        .collect();
    let results: Vec<CaseResult> = cases
        .par_iter()
        .map(|(i, w)| run_case(&machines[*i], w, config))
        .collect();

    let mut report = DifftestReport {
        machines: config.machines,
        seed: config.seed,
        max_input_len: config.max_input_len,
        mu_cap: config.mu_cap,
        cases: cases.len(),
        verdicts: BTreeMap::new(),
        verdict_mismatches: Vec::new(),
        windows_checked: 0,
        windows_feasible: 0,
        disagreements: Vec::new(),
        skips: Vec::new(),
    };
    for ((i, w), r) in cases.iter().zip(results) {
        let m = &machines[*i];
        let word = m.format_word(w);
        if let Some(v) = r.verdict {
            *report.verdicts.entry(v).or_default() += 1;
            if v != VerdictComparison::Agree {
                let (lp, oracle) = r.verdict_pair.expect("set with the comparison");
                report.verdict_mismatches.push((*i, word.clone(), lp, oracle));
            }
        }
        report.windows_checked += r.windows_checked;
        report.windows_feasible += r.windows_feasible;
        for (mu, selection, tape_seg, direction, b) in r.disagreements {
            let bundle = match (&config.bundle_dir, b) {
                (Some(root), Some(b)) => {
                    let name = format!(
                        "m{i}_{}_mu{mu}_{selection}_{}_{}",
                        if word.is_empty() { "eps".to_string() } else { word.replace(' ', "-") },
                        tape_seg.0,
                        tape_seg.1
                    );
                    let dir = root.join(name);
                    b.write(&dir)?;
                    Some(dir)
                }
                _ => None,
            };
            report.disagreements.push(Disagreement {
                machine: *i,
                word: word.clone(),
                mu,
                selection,
                tape_seg,
                direction,
                bundle,
            });
        }
        for (stage, reason) in r.skips {
            report.skips.push(Skip {
                machine: *i,
                word: word.clone(),
                stage,
                reason,
            });
        }
    }
    Ok(report)
}
