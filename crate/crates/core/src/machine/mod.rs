//! Machine model: the nondeterministic single-tape Turing machine under
//! analysis, its configurations and single-step semantics.
//!
//! States and symbols are interned into dense indices in declaration order,
//! so every derived structure (step tuples, graph nodes) orders the same way
//! the machine file declares things.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, ParseError, Result};

pub use parse::parse_machine;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u16);

/// Head movement of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    pub fn offset(self) -> i64 {
        match self {
            Move::L => -1,
            Move::R => 1,
            Move::S => 0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Move::L => 'L',
            Move::R => 'R',
            Move::S => 'S',
        }
    }

    pub fn from_token(tok: &str) -> Option<Move> {
        match tok {
            "L" => Some(Move::L),
            "R" => Some(Move::R),
            "S" => Some(Move::S),
            _ => None,
        }
    }
}

/// One element of the transition relation: `((from, read), (to, write, mv))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateId,
    pub read: Symbol,
    pub to: StateId,
    pub write: Symbol,
    pub mv: Move,
}

/// The 7-tuple `<Q, Gamma, b, Sigma, Delta, q_start, F>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineSpec {
    states: Vec<String>,
    symbols: Vec<String>,
    blank: Symbol,
    input_alphabet: Vec<Symbol>,
    start: StateId,
    accepting: BTreeSet<StateId>,
    delta: Vec<Transition>,
    // transitions grouped by (state, read symbol), indices into `delta`
    by_key: BTreeMap<(StateId, Symbol), Vec<usize>>,
    by_state: Vec<Vec<usize>>,
}

impl MachineSpec {
    /// Builds a machine from names, checking every structural invariant.
    pub fn new(
        states: Vec<String>,
        tape_alphabet: Vec<String>,
        blank: &str,
        input_alphabet: Vec<String>,
        start: &str,
        accepting: Vec<String>,
        delta: Vec<(String, String, String, String, Move)>,
    ) -> Result<Self, ParseError> {
        fn semantic(token: &str, message: &str) -> ParseError {
            ParseError::Semantic {
                token: token.to_string(),
                message: message.to_string(),
            }
        }
        fn index_of(
            names: &[String],
            tok: &str,
            kind: &str,
        ) -> std::result::Result<u16, ParseError> {
            names
                .iter()
                .position(|n| n == tok)
                .map(|i| i as u16)
                .ok_or_else(|| semantic(tok, &format!("undeclared {kind}")))
        }

        if states.is_empty() {
            return Err(semantic("states", "at least one state is required"));
        }
        if tape_alphabet.is_empty() {
            return Err(semantic("tape_alphabet", "tape alphabet is empty"));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(semantic(s, "state declared twice"));
            }
        }
        for (i, s) in tape_alphabet.iter().enumerate() {
            if tape_alphabet[..i].contains(s) {
                return Err(semantic(s, "symbol declared twice"));
            }
        }
        if states.len() > u16::MAX as usize || tape_alphabet.len() > u16::MAX as usize {
            return Err(semantic("states", "too many states or symbols"));
        }
        let blank_id = Symbol(index_of(&tape_alphabet, blank, "blank symbol")?);
        let mut input = Vec::new();
        for s in &input_alphabet {
            let id = Symbol(index_of(&tape_alphabet, s, "input symbol")?);
            if id == blank_id {
                return Err(semantic(s, "blank symbol must not be an input symbol"));
            }
            if !input.contains(&id) {
                input.push(id);
            }
        }
        let start_id = StateId(index_of(&states, start, "start state")?);
        let mut acc = BTreeSet::new();
        for q in &accepting {
            acc.insert(StateId(index_of(&states, q, "accepting state")?));
        }
        if delta.is_empty() {
            return Err(semantic("delta", "the transition relation is empty"));
        }
        let mut ts = BTreeSet::new();
        for (q, s, q2, s2, mv) in &delta {
            ts.insert(Transition {
                from: StateId(index_of(&states, q, "state")?),
                read: Symbol(index_of(&tape_alphabet, s, "symbol")?),
                to: StateId(index_of(&states, q2, "state")?),
                write: Symbol(index_of(&tape_alphabet, s2, "symbol")?),
                mv: *mv,
            });
        }
        let delta: Vec<Transition> = ts.into_iter().collect();
        let mut by_key: BTreeMap<(StateId, Symbol), Vec<usize>> = BTreeMap::new();
        let mut by_state = vec![Vec::new(); states.len()];
        for (i, t) in delta.iter().enumerate() {
            by_key.entry((t.from, t.read)).or_default().push(i);
            by_state[t.from.0 as usize].push(i);
        }
        Ok(MachineSpec {
            states,
            symbols: tape_alphabet,
            blank: blank_id,
            input_alphabet: input,
            start: start_id,
            accepting: acc,
            delta,
            by_key,
            by_state,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u16).map(StateId)
    }

    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.symbols.len() as u16).map(Symbol)
    }

    pub fn blank(&self) -> Symbol {
        self.blank
    }

    pub fn input_alphabet(&self) -> &[Symbol] {
        &self.input_alphabet
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.contains(&q)
    }

    pub fn delta(&self) -> &[Transition] {
        &self.delta
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0 as usize]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.symbols[s.0 as usize]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|n| n == name)
            .map(|i| StateId(i as u16))
    }

    pub fn symbol_by_name(&self, name: &str) -> Option<Symbol> {
        self.symbols
            .iter()
            .position(|n| n == name)
            .map(|i| Symbol(i as u16))
    }

    /// Transitions applicable in state `q` reading `s`.
    pub fn transitions_at(&self, q: StateId, s: Symbol) -> impl Iterator<Item = &Transition> {
        self.by_key
            .get(&(q, s))
            .into_iter()
            .flatten()
            .map(move |&i| &self.delta[i])
    }

    /// Every transition leaving state `q`, whatever it reads.
    pub fn transitions_from(&self, q: StateId) -> impl Iterator<Item = &Transition> {
        self.by_state[q.0 as usize].iter().map(move |&i| &self.delta[i])
    }

    /// Every state other than the start state.
    pub fn non_start_states(&self) -> BTreeSet<StateId> {
        self.states().filter(|&q| q != self.start).collect()
    }

    pub fn all_states(&self) -> BTreeSet<StateId> {
        self.states().collect()
    }

    /// Splits `text` into a word over the input alphabet. Whitespace
    /// separated tokens are used when present, otherwise one character per
    /// symbol.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Symbol>> {
        let tokens: Vec<String> = if text.chars().any(char::is_whitespace) {
            text.split_whitespace().map(str::to_string).collect()
        } else {
            text.chars().map(|c| c.to_string()).collect()
        };
        tokens
            .iter()
            .map(|tok| {
                self.symbol_by_name(tok)
                    .filter(|s| self.input_alphabet.contains(s))
                    .ok_or_else(|| {
                        Error::InvalidWord(format!("`{tok}` is not an input symbol"))
                    })
            })
            .collect()
    }

    pub fn format_word(&self, word: &[Symbol]) -> String {
        let single = word.iter().all(|&s| self.symbol_name(s).chars().count() == 1);
        let names: Vec<&str> = word.iter().map(|&s| self.symbol_name(s)).collect();
        if single {
            names.concat()
        } else {
            names.join(" ")
        }
    }

    /// The initial content of cell `k` for input `x` (cell 1 holds the
    /// leftmost input symbol; every cell outside `1..=|x|` is blank).
    pub fn input_symbol(&self, x: &[Symbol], k: i64) -> Symbol {
        if k >= 1 && (k as usize) <= x.len() {
            x[k as usize - 1]
        } else {
            self.blank
        }
    }

    pub fn initial_configuration(&self, x: &[Symbol]) -> Configuration {
        let mut tape = BTreeMap::new();
        for (i, &s) in x.iter().enumerate() {
            if s != self.blank {
                tape.insert(i as i64 + 1, s);
            }
        }
        Configuration {
            state: self.start,
            tape,
            head: 1,
        }
    }

    /// Successor configurations of `c`, one per applicable transition.
    /// An empty result means the machine halts in `c`.
    pub fn step(&self, c: &Configuration) -> Vec<Configuration> {
        let read = c.read(self.blank);
        self.transitions_at(c.state, read)
            .map(|t| c.apply(t, self.blank))
            .collect()
    }

    /// Maximum number of distinct read symbols over the states.
    pub fn sigma(&self) -> SigmaConstant {
        let value = self
            .by_state
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|&i| self.delta[i].read)
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .max()
            .unwrap_or(0);
        SigmaConstant(value as u32)
    }

    /// Renders the machine in the line-oriented file format.
    pub fn to_text(&self) -> String {
        parse::render(self)
    }
}

/// `max_q |{ s : ((q, s), _) in Delta }|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SigmaConstant(pub u32);

/// An instantaneous description. The tape stores non-blank cells only, so two
/// configurations compare equal exactly when they describe the same tape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub tape: BTreeMap<i64, Symbol>,
    pub head: i64,
}

impl Configuration {
    pub fn read(&self, blank: Symbol) -> Symbol {
        self.symbol_at(self.head, blank)
    }

    pub fn symbol_at(&self, k: i64, blank: Symbol) -> Symbol {
        self.tape.get(&k).copied().unwrap_or(blank)
    }

    /// Applies `t` without checking that it is applicable.
    pub fn apply(&self, t: &Transition, blank: Symbol) -> Configuration {
        let mut tape = self.tape.clone();
        if t.write == blank {
            tape.remove(&self.head);
        } else {
            tape.insert(self.head, t.write);
        }
        Configuration {
            state: t.to,
            tape,
            head: self.head + t.mv.offset(),
        }
    }

    pub fn display<'a>(&'a self, m: &'a MachineSpec) -> impl fmt::Display + 'a {
        ConfigDisplay { c: self, m }
    }
}

struct ConfigDisplay<'a> {
    c: &'a Configuration,
    m: &'a MachineSpec,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @{} [", self.m.state_name(self.c.state), self.c.head)?;
        for (i, (k, s)) in self.c.tape.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}:{}", k, self.m.symbol_name(*s))?;
        }
        write!(f, "]")
    }
}
