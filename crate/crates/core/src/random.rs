//! Seeded random machines for fuzzing and difference testing.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::machine::{MachineSpec, Move};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MachineBounds {
    pub max_states: usize,
    pub max_symbols: usize,
    pub max_transitions: usize,
}

impl MachineBounds {
    pub fn new(max_states: usize, max_symbols: usize, max_transitions: usize) -> Self {
        assert!(
            max_states >= 1 && max_symbols >= 2 && max_transitions >= 1,
            "bounds must be at least (1, 2, 1)"
        );
        MachineBounds {
            max_states,
            max_symbols,
            max_transitions,
        }
    }
}

/// States `q0..`, tape alphabet `_ 0 1 ..` with `_` blank, every non-blank
/// symbol an input symbol. The first transition leaves the start state on an
/// input symbol; half the machines get one accepting non-start state.
pub fn random_machine(seed: u64, bounds: MachineBounds) -> MachineSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nq = rng.gen_range(1..=bounds.max_states);
    let ns = rng.gen_range(2..=bounds.max_symbols);
    let states: Vec<String> = (0..nq).map(|i| format!("q{i}")).collect();
    let mut symbols = vec!["_".to_string()];
    symbols.extend((0..ns - 1).map(|i| i.to_string()));
    let input: Vec<String> = symbols[1..].to_vec();
    let moves = [Move::L, Move::R, Move::S];

    let possible = nq * ns * nq * ns * moves.len();
    let nt = rng.gen_range(1..=bounds.max_transitions.min(possible));
    let mut delta: BTreeSet<(usize, usize, usize, usize, Move)> = BTreeSet::new();
    let first_read = rng.gen_range(1..ns);
    delta.insert((
        0,
        first_read,
        rng.gen_range(0..nq),
        rng.gen_range(0..ns),
        *moves.choose(&mut rng).expect("nonempty"),
    ));
    while delta.len() < nt {
        delta.insert((
            rng.gen_range(0..nq),
            rng.gen_range(0..ns),
            rng.gen_range(0..nq),
            rng.gen_range(0..ns),
            *moves.choose(&mut rng).expect("nonempty"),
        ));
    }
    let accepting = if nq > 1 && rng.gen_bool(0.5) {
        vec![states[rng.gen_range(1..nq)].clone()]
    } else {
        Vec::new()
    };
    let delta = delta
        .into_iter()
        .map(|(q, s, q2, s2, m)| {
            (
                states[q].clone(),
                symbols[s].clone(),
                states[q2].clone(),
                symbols[s2].clone(),
                m,
            )
        })
        .collect();
    MachineSpec::new(states.clone(), symbols, "_", input, "q0", accepting, delta)
        .expect("generated machines satisfy the invariants")
}
