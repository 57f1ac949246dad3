//! Bundled example machines.

use crate::machine::{parse_machine, MachineSpec};

pub const L1_TEXT: &str = include_str!("../fixtures/l1.tm");
pub const L2_TEXT: &str = include_str!("../fixtures/l2.tm");

/// Deterministic machine for words ending in `1`.
pub fn l1() -> MachineSpec {
    parse_machine(L1_TEXT).expect("bundled L1 fixture parses")
}

/// Nondeterministic machine for words containing `11` or `00`.
pub fn l2() -> MachineSpec {
    parse_machine(L2_TEXT).expect("bundled L2 fixture parses")
}

/// Membership in L1, written directly from the language definition.
pub fn in_l1(word: &str) -> bool {
    word.ends_with('1')
}

/// Membership in L2, written directly from the language definition.
pub fn in_l2(word: &str) -> bool {
    word.contains("11") || word.contains("00")
}

/// All words over `{0,1}` of length at most `max_len`, shortest first.
pub fn binary_words(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| [format!("{w}0"), format!("{w}1")])
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}
