//! Computation steps and the sequences built from them.
//!
//! A step `(q, s, q', s', m, k_tape, k_step)` is one transition firing,
//! annotated with the cell it reads and writes and its ordinal in a run. A
//! tape-arbitrary sequence chains steps by state handoff and head movement
//! only; whether each read actually sees what the tape holds is a separate
//! question answered by [`classify_sequence`].

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::machine::{MachineSpec, Move, StateId, Symbol, Transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComputationStep {
    pub q: StateId,
    pub s: Symbol,
    pub q_next: StateId,
    pub s_next: Symbol,
    pub m: Move,
    pub k_tape: i64,
    pub k_step: u32,
}

impl ComputationStep {
    pub fn from_transition(t: &Transition, k_tape: i64, k_step: u32) -> Self {
        ComputationStep {
            q: t.from,
            s: t.read,
            q_next: t.to,
            s_next: t.write,
            m: t.mv,
            k_tape,
            k_step,
        }
    }

    /// The terminal step `(q, s, q, s, S, k_tape, k_step)` appended after the
    /// last real transition of a path. It is not an element of Delta.
    pub fn extra(q: StateId, s: Symbol, k_tape: i64, k_step: u32) -> Self {
        ComputationStep {
            q,
            s,
            q_next: q,
            s_next: s,
            m: Move::S,
            k_tape,
            k_step,
        }
    }

    pub fn transition(&self) -> Transition {
        Transition {
            from: self.q,
            read: self.s,
            to: self.q_next,
            write: self.s_next,
            mv: self.m,
        }
    }

    /// Head position after this step.
    pub fn next_cell(&self) -> i64 {
        self.k_tape + self.m.offset()
    }

    pub fn display<'a>(&'a self, m: &'a MachineSpec) -> StepDisplay<'a> {
        StepDisplay { step: self, m }
    }
}

pub struct StepDisplay<'a> {
    step: &'a ComputationStep,
    m: &'a MachineSpec,
}

impl fmt::Display for StepDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.step;
        write!(
            f,
            "({},{},{},{},{},{},{})",
            self.m.state_name(t.q),
            self.m.symbol_name(t.s),
            self.m.state_name(t.q_next),
            self.m.symbol_name(t.s_next),
            t.m.as_char(),
            t.k_tape,
            t.k_step
        )
    }
}

/// State handoff, ordinal +1 and head displacement matching `t1`'s move.
pub fn is_sequential_pair(t1: &ComputationStep, t2: &ComputationStep) -> bool {
    t2.q == t1.q_next && t2.k_step == t1.k_step + 1 && t2.k_tape == t1.next_cell()
}

/// `t2` reads exactly what `t1` wrote. The two steps need not be adjacent.
pub fn is_tape_consistent_pair(t1: &ComputationStep, t2: &ComputationStep) -> bool {
    t2.s == t1.s_next
}

/// Cell window `[2 - mu, mu]` that any `mu`-length sequence stays inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapeRange {
    pub mu: u32,
    pub left: i64,
    pub right: i64,
}

impl TapeRange {
    pub fn new(mu: u32) -> Self {
        TapeRange {
            mu,
            left: 2 - mu as i64,
            right: mu as i64,
        }
    }

    pub fn contains(&self, k: i64) -> bool {
        self.left <= k && k <= self.right
    }

    pub fn cells(&self) -> impl Iterator<Item = i64> {
        self.left..=self.right
    }

    pub fn len(&self) -> usize {
        (self.right - self.left + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.right < self.left
    }
}

/// An ordered list of steps whose adjacent pairs are sequential and whose
/// `k_step` values run `1, 2, 3, ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepSequence(Vec<ComputationStep>);

impl StepSequence {
    pub fn new(steps: Vec<ComputationStep>) -> Result<Self> {
        for (i, t) in steps.iter().enumerate() {
            if t.k_step as usize != i + 1 {
                return Err(Error::MalformedSequence(format!(
                    "element {} has k_step {}",
                    i + 1,
                    t.k_step
                )));
            }
        }
        for w in steps.windows(2) {
            if !is_sequential_pair(&w[0], &w[1]) {
                return Err(Error::MalformedSequence(format!(
                    "steps {} and {} are not a sequential pair",
                    w[0].k_step, w[1].k_step
                )));
            }
        }
        Ok(StepSequence(steps))
    }

    pub fn steps(&self) -> &[ComputationStep] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last_state(&self) -> Option<StateId> {
        self.0.last().map(|t| t.q_next)
    }

    /// Leftmost and rightmost cells touched, or `None` when empty.
    pub fn footprint(&self) -> Option<(i64, i64)> {
        let lo = self.0.iter().map(|t| t.k_tape).min()?;
        let hi = self.0.iter().map(|t| t.k_tape).max()?;
        Some((lo, hi))
    }

    /// Appends the terminal extra step for the final state and the symbol the
    /// steps leave under the head (input content where no step wrote).
    pub fn with_extra_step(&self, machine: &MachineSpec, x: &[Symbol]) -> StepSequence {
        let mut steps = self.0.clone();
        if let Some(last) = self.0.last() {
            let cell = last.next_cell();
            let read = self
                .0
                .iter()
                .rev()
                .find(|t| t.k_tape == cell)
                .map(|t| t.s_next)
                .unwrap_or_else(|| machine.input_symbol(x, cell));
            steps.push(ComputationStep::extra(last.q_next, read, cell, last.k_step + 1));
        }
        StepSequence(steps)
    }

    pub fn display<'a>(&'a self, m: &'a MachineSpec) -> impl fmt::Display + 'a {
        SeqDisplay { seq: self, m }
    }
}

struct SeqDisplay<'a> {
    seq: &'a StepSequence,
    m: &'a MachineSpec,
}

impl fmt::Display for SeqDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.seq.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", t.display(self.m))?;
        }
        Ok(())
    }
}

/// Steps of `w` at cell `k`, in order.
pub fn subseq_at_cell(w: &StepSequence, k: i64) -> Vec<ComputationStep> {
    w.0.iter().filter(|t| t.k_tape == k).copied().collect()
}

/// First ordinal at which cell `k` is visited.
pub fn tape_first(w: &StepSequence, k: i64) -> Option<u32> {
    w.0.iter().filter(|t| t.k_tape == k).map(|t| t.k_step).min()
}

/// Latest visit of cell `k` strictly before ordinal `k_step`.
pub fn tape_prev(w: &StepSequence, k: i64, k_step: u32) -> Option<u32> {
    w.0.iter()
        .filter(|t| t.k_tape == k && t.k_step < k_step)
        .map(|t| t.k_step)
        .max()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceClassification {
    pub kind: SequenceKind,
    /// `(k_tape, k_step)` of the earliest violating read; set iff inconsistent.
    pub witness: Option<(i64, u32)>,
}

impl SequenceClassification {
    pub fn is_consistent(&self) -> bool {
        self.kind == SequenceKind::Consistent
    }
}

/// Decides whether every read in `w` sees the symbol the tape would hold:
/// the input symbol on a cell's first visit, otherwise whatever the previous
/// visit of that cell wrote.
pub fn classify_sequence(
    machine: &MachineSpec,
    x: &[Symbol],
    w: &StepSequence,
) -> Result<SequenceClassification> {
    let first = w
        .0
        .first()
        .ok_or_else(|| Error::MalformedSequence("empty sequence".into()))?;
    if first.q != machine.start() || first.k_tape != 1 || first.k_step != 1 {
        return Err(Error::MalformedSequence(
            "sequence does not start on the input (start state, cell 1, step 1)".into(),
        ));
    }
    // last symbol written per cell; steps are scanned in k_step order so the
    // first violation found is the one with the smallest k_step
    let mut written: BTreeMap<i64, Symbol> = BTreeMap::new();
    for t in &w.0 {
        let expected = written
            .get(&t.k_tape)
            .copied()
            .unwrap_or_else(|| machine.input_symbol(x, t.k_tape));
        if t.s != expected {
            return Ok(SequenceClassification {
                kind: SequenceKind::Inconsistent,
                witness: Some((t.k_tape, t.k_step)),
            });
        }
        written.insert(t.k_tape, t.s_next);
    }
    Ok(SequenceClassification {
        kind: SequenceKind::Consistent,
        witness: None,
    })
}

/// Step sequence of a run given as the transitions it fires in order.
pub fn steps_of_run(transitions: &[Transition]) -> StepSequence {
    let mut head = 1i64;
    let mut steps = Vec::with_capacity(transitions.len());
    for (i, t) in transitions.iter().enumerate() {
        steps.push(ComputationStep::from_transition(t, head, i as u32 + 1));
        head += t.mv.offset();
    }
    StepSequence(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn step(m: &MachineSpec, q: &str, s: &str, q2: &str, s2: &str, mv: Move, k: i64, j: u32) -> ComputationStep {
        ComputationStep {
            q: m.state_by_name(q).unwrap(),
            s: m.symbol_by_name(s).unwrap(),
            q_next: m.state_by_name(q2).unwrap(),
            s_next: m.symbol_by_name(s2).unwrap(),
            m: mv,
            k_tape: k,
            k_step: j,
        }
    }

    #[test]
    fn sequential_pair_examples() {
        let m = fixtures::l1();
        let t1 = step(&m, "q0", "1", "q0", "1", Move::R, 1, 1);
        let t2 = step(&m, "q0", "_", "qc", "_", Move::L, 2, 2);
        assert!(is_sequential_pair(&t1, &t2));
        let wrong_cell = ComputationStep { k_tape: 3, ..t2 };
        assert!(!is_sequential_pair(&t1, &wrong_cell));
        let wrong_state = ComputationStep { q: m.state_by_name("qc").unwrap(), ..t2 };
        assert!(!is_sequential_pair(&t1, &wrong_state));
    }

    #[test]
    fn tape_consistent_pair_examples() {
        // generic alphabet {a, b, d, e} mirroring a write-then-read at one cell
        let m = crate::machine::parse_machine(
            "states: p q\ntape_alphabet: _ a b c d e f\nblank: _\ninput_alphabet: a b c d e f\nstart: p\naccept:\ndelta:\np a -> q b L\n",
        )
        .unwrap();
        let writes_b = step(&m, "p", "a", "q", "b", Move::L, 2, 8);
        let reads_b = step(&m, "q", "b", "p", "c", Move::R, 2, 14);
        assert!(is_tape_consistent_pair(&writes_b, &reads_b));
        let writes_d = step(&m, "p", "a", "q", "d", Move::R, 4, 4);
        let reads_e = step(&m, "q", "e", "p", "f", Move::L, 4, 6);
        assert!(!is_tape_consistent_pair(&writes_d, &reads_e));
        let writes_blank = step(&m, "p", "a", "q", "_", Move::S, 1, 1);
        let reads_blank = step(&m, "q", "_", "p", "a", Move::S, 1, 2);
        assert!(is_tape_consistent_pair(&writes_blank, &reads_blank));
    }

    fn visiting_1_2_1() -> (MachineSpec, StepSequence) {
        let m = fixtures::l1();
        let seq = StepSequence::new(vec![
            step(&m, "q0", "1", "q0", "1", Move::R, 1, 1),
            step(&m, "q0", "_", "qc", "_", Move::L, 2, 2),
            step(&m, "qc", "1", "qacc", "1", Move::S, 1, 3),
        ])
        .unwrap();
        (m, seq)
    }

    #[test]
    fn subsequence_and_visits() {
        let (_, w) = visiting_1_2_1();
        let at1 = subseq_at_cell(&w, 1);
        assert_eq!(at1.iter().map(|t| t.k_step).collect::<Vec<_>>(), vec![1, 3]);
        assert!(subseq_at_cell(&w, 5).is_empty());
        assert_eq!(tape_first(&w, 1), Some(1));
        assert_eq!(tape_first(&w, 7), None);
        assert_eq!(tape_prev(&w, 1, 3), Some(1));
        assert_eq!(tape_prev(&w, 1, 1), None);
        assert_eq!(tape_prev(&w, 2, 1), None);
    }

    #[test]
    fn classify_genuine_and_perturbed() {
        let (m, w) = visiting_1_2_1();
        let x = m.parse_word("1").unwrap();
        assert!(classify_sequence(&m, &x, &w).unwrap().is_consistent());

        let mut steps = w.steps().to_vec();
        steps[2].s = m.symbol_by_name("0").unwrap();
        let bad = StepSequence::new(steps).unwrap();
        let c = classify_sequence(&m, &x, &bad).unwrap();
        assert_eq!(c.kind, SequenceKind::Inconsistent);
        assert_eq!(c.witness, Some((1, 3)));
    }

    #[test]
    fn first_read_must_match_input() {
        let m = fixtures::l1();
        let x = m.parse_word("1").unwrap();
        // cell 2 holds blank for input "1", but the second step reads 0
        let seq = StepSequence::new(vec![
            step(&m, "q0", "1", "q0", "1", Move::R, 1, 1),
            step(&m, "q0", "0", "q0", "0", Move::R, 2, 2),
        ])
        .unwrap();
        let c = classify_sequence(&m, &x, &seq).unwrap();
        assert_eq!(c.witness, Some((2, 2)));
    }

    #[test]
    fn malformed_sequences() {
        let m = fixtures::l1();
        let a = step(&m, "q0", "1", "q0", "1", Move::R, 1, 1);
        let b = step(&m, "q0", "1", "q0", "1", Move::R, 5, 2);
        assert!(StepSequence::new(vec![a, b]).is_err());
        let not_start = StepSequence::new(vec![step(&m, "qc", "1", "qacc", "1", Move::S, 1, 1)]).unwrap();
        assert!(classify_sequence(&m, &[], &not_start).is_err());
        assert!(classify_sequence(&m, &[], &StepSequence::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn extra_step_reads_current_tape() {
        let (m, w) = visiting_1_2_1();
        let x = m.parse_word("1").unwrap();
        let ext = w.with_extra_step(&m, &x);
        let last = *ext.steps().last().unwrap();
        assert_eq!(last, step(&m, "qacc", "1", "qacc", "1", Move::S, 1, 4));
        assert!(classify_sequence(&m, &x, &ext).unwrap().is_consistent());
    }

    #[test]
    fn tape_range_bounds() {
        let r = TapeRange::new(3);
        assert_eq!((r.left, r.right, r.len()), (-1, 3, 5));
        assert_eq!(TapeRange::new(1).cells().collect::<Vec<_>>(), vec![1]);
    }
}
