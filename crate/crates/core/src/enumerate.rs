//! Exhaustive enumeration of step sequences, for checking the graph-based
//! constructions against the definitions at small sizes.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::machine::{MachineSpec, StateId, Symbol};
use crate::seqgraph::{root_steps, successor_steps};
use crate::step::{classify_sequence, ComputationStep, StepSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFilter {
    Consistent,
    Inconsistent,
    Arbitrary,
}

/// Tape-arbitrary sequences grown from the first step by the successor
/// rule, kept when they reach length `mu` (or stop early, if `maximal`).
fn grow(
    machine: &MachineSpec,
    x: &[Symbol],
    mu: u32,
    maximal: bool,
    budget: usize,
) -> Result<Vec<StepSequence>> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<ComputationStep>> = root_steps(machine, x).into_iter().map(|t| vec![t]).collect();
    while let Some(seq) = stack.pop() {
        let last = *seq.last().expect("nonempty");
        let children: Vec<ComputationStep> = if last.k_step < mu {
            successor_steps(machine, &last).collect()
        } else {
            Vec::new()
        };
        if children.is_empty() {
            if last.k_step == mu || maximal {
                out.push(StepSequence::new(seq)?);
                if out.len() > budget {
                    return Err(Error::Capacity {
                        what: "enumerated sequences",
                        needed: out.len(),
                        limit: budget,
                    });
                }
            }
            continue;
        }
        for c in children {
            let mut s = seq.clone();
            s.push(c);
            stack.push(s);
        }
    }
    Ok(out)
}

/// Sequences of exactly `mu` steps ending in a state of `selected`,
/// filtered by tape consistency.
pub fn enumerate_sequences(
    machine: &MachineSpec,
    x: &[Symbol],
    mu: u32,
    selected: &BTreeSet<StateId>,
    filter: SequenceFilter,
    budget: usize,
) -> Result<BTreeSet<StepSequence>> {
    let mut out = BTreeSet::new();
    for seq in grow(machine, x, mu, false, budget)? {
        if !seq.last_state().is_some_and(|q| selected.contains(&q)) {
            continue;
        }
        let keep = match filter {
            SequenceFilter::Arbitrary => true,
            SequenceFilter::Consistent => classify_sequence(machine, x, &seq)?.is_consistent(),
            SequenceFilter::Inconsistent => !classify_sequence(machine, x, &seq)?.is_consistent(),
        };
        if keep {
            out.insert(seq);
        }
    }
    Ok(out)
}

/// Every maximal tape-arbitrary sequence of at most `mu` steps: each either
/// reaches `mu` or ends in a state with no outgoing transition.
pub fn enumerate_maximal_sequences(
    machine: &MachineSpec,
    x: &[Symbol],
    mu: u32,
    budget: usize,
) -> Result<BTreeSet<StepSequence>> {
    Ok(grow(machine, x, mu, true, budget)?.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::oracle::runs_of_length;
    use crate::step::steps_of_run;

    #[test]
    fn mu1_has_no_inconsistent_sequences() {
        let m = fixtures::l2();
        let x = m.parse_word("01").unwrap();
        let all = m.all_states();
        let arb = enumerate_sequences(&m, &x, 1, &all, SequenceFilter::Arbitrary, 1000).unwrap();
        assert_eq!(arb.len(), m.transitions_at(m.start(), x[0]).count());
        assert!(enumerate_sequences(&m, &x, 1, &all, SequenceFilter::Inconsistent, 1000)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn partition_and_bijection_on_fixtures() {
        for m in [fixtures::l1(), fixtures::l2()] {
            for w in ["", "1", "01", "110"] {
                let x = m.parse_word(w).unwrap();
                for mu in 1..=4 {
                    let all = m.all_states();
                    let e = |f| enumerate_sequences(&m, &x, mu, &all, f, 100_000).unwrap();
                    let (c, i, a) = (e(SequenceFilter::Consistent), e(SequenceFilter::Inconsistent), e(SequenceFilter::Arbitrary));
                    assert!(c.is_disjoint(&i));
                    assert_eq!(c.union(&i).cloned().collect::<BTreeSet<_>>(), a);
                    let runs: BTreeSet<StepSequence> = runs_of_length(&m, &x, mu, 100_000)
                        .unwrap()
                        .iter()
                        .map(|r| steps_of_run(r))
                        .collect();
                    assert_eq!(c, runs);
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = fixtures::l2();
        let x = m.parse_word("0101").unwrap();
        let err = enumerate_sequences(&m, &x, 4, &m.all_states(), SequenceFilter::Arbitrary, 3).unwrap_err();
        assert!(err.is_capacity());
    }
}
