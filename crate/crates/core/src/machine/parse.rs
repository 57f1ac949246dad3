//! Line-oriented machine description format.
//!
//! ```text
//! # comment
//! states: q0 qc qacc
//! tape_alphabet: 0 1 _
//! blank: _
//! input_alphabet: 0 1
//! start: q0
//! accept: qacc
//! delta:
//! q0 0 -> q0 0 R
//! ```

use super::{MachineSpec, Move};
use crate::error::ParseError;

const HEADERS: [&str; 6] = [
    "states",
    "tape_alphabet",
    "blank",
    "input_alphabet",
    "start",
    "accept",
];

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_machine(text: &str) -> Result<MachineSpec, ParseError> {
    let mut headers: [Option<Vec<String>>; 6] = Default::default();
    let mut delta = Vec::new();
    let mut in_delta = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_delta {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 6 || toks[2] != "->" {
                return Err(syntax(line_no, "expected `q s -> q' s' M`"));
            }
            let mv = Move::from_token(toks[5])
                .ok_or_else(|| syntax(line_no, format!("bad move `{}`, expected L, R or S", toks[5])))?;
            delta.push((
                toks[0].to_string(),
                toks[1].to_string(),
                toks[3].to_string(),
                toks[4].to_string(),
                mv,
            ));
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| syntax(line_no, "expected `key: values`"))?;
        let key = key.trim();
        if key == "delta" {
            if !rest.trim().is_empty() {
                return Err(syntax(line_no, "`delta:` must stand alone on its line"));
            }
            in_delta = true;
            continue;
        }
        let slot = HEADERS
            .iter()
            .position(|h| *h == key)
            .ok_or_else(|| syntax(line_no, format!("unknown key `{key}`")))?;
        if headers[slot].is_some() {
            return Err(syntax(line_no, format!("duplicate key `{key}`")));
        }
        let values: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        let needs_one = matches!(key, "blank" | "start");
        if needs_one && values.len() != 1 {
            return Err(syntax(line_no, format!("`{key}` takes exactly one token")));
        }
        if !needs_one && key != "accept" && values.is_empty() {
            return Err(syntax(line_no, format!("`{key}` needs at least one token")));
        }
        headers[slot] = Some(values);
    }

    if !in_delta {
        return Err(syntax(last_line + 1, "missing `delta:` section"));
    }
    for (i, h) in headers.iter().enumerate() {
        if h.is_none() {
            return Err(syntax(last_line + 1, format!("missing `{}:` line", HEADERS[i])));
        }
    }
    let [states, tape, blank, input, start, accept] = headers.map(Option::unwrap);
    MachineSpec::new(states, tape, &blank[0], input, &start[0], accept, delta)
}

pub(super) fn render(m: &MachineSpec) -> String {
    let join = |it: Vec<&str>| it.join(" ");
    let mut out = String::new();
    out.push_str(&format!("states: {}\n", join(m.states.iter().map(String::as_str).collect())));
    out.push_str(&format!("tape_alphabet: {}\n", join(m.symbols.iter().map(String::as_str).collect())));
    out.push_str(&format!("blank: {}\n", m.symbol_name(m.blank)));
    out.push_str(&format!(
        "input_alphabet: {}\n",
        join(m.input_alphabet.iter().map(|&s| m.symbol_name(s)).collect())
    ));
    out.push_str(&format!("start: {}\n", m.state_name(m.start)));
    let acc: Vec<&str> = m.accepting.iter().map(|&q| m.state_name(q)).collect();
    if acc.is_empty() {
        out.push_str("accept:\n");
    } else {
        out.push_str(&format!("accept: {}\n", join(acc)));
    }
    out.push_str("delta:\n");
    for t in &m.delta {
        out.push_str(&format!(
            "{} {} -> {} {} {}\n",
            m.state_name(t.from),
            m.symbol_name(t.read),
            m.state_name(t.to),
            m.symbol_name(t.write),
            t.mv.as_char()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn l1_fixture_shape() {
        let m = fixtures::l1();
        assert_eq!(m.state_count(), 3);
        assert_eq!(m.symbol_count(), 3);
        assert_eq!(m.delta().len(), 4);
    }

    #[test]
    fn l2_fixture_is_nondeterministic() {
        let m = fixtures::l2();
        let nondet = m
            .delta()
            .iter()
            .any(|t| m.transitions_at(t.from, t.read).count() >= 2);
        assert!(nondet);
    }

    #[test]
    fn undeclared_state_is_a_semantic_error() {
        let text = "states: a\ntape_alphabet: _ 0\nblank: _\ninput_alphabet: 0\nstart: a\naccept:\ndelta:\na 0 -> zz 0 R\n";
        match parse_machine(text) {
            Err(ParseError::Semantic { token, .. }) => assert_eq!(token, "zz"),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn blank_in_input_alphabet_is_rejected() {
        let text = "states: a\ntape_alphabet: _ 0\nblank: _\ninput_alphabet: 0 _\nstart: a\naccept:\ndelta:\na 0 -> a 0 R\n";
        match parse_machine(text) {
            Err(ParseError::Semantic { token, .. }) => assert_eq!(token, "_"),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "states: a\ntape_alphabet: _ 0\nblank: _\ninput_alphabet: 0\nstart: a\naccept:\ndelta:\n# ok\na 0 -> a 0 X\n";
        assert_eq!(
            parse_machine(text),
            Err(ParseError::Syntax {
                line: 9,
                message: "bad move `X`, expected L, R or S".into()
            })
        );
        let text = "states: a\nbogus: 1\n";
        assert!(matches!(parse_machine(text), Err(ParseError::Syntax { line: 2, .. })));
    }

    #[test]
    fn empty_delta_is_rejected() {
        let text = "states: a\ntape_alphabet: _ 0\nblank: _\ninput_alphabet: 0\nstart: a\naccept:\ndelta:\n";
        assert!(matches!(parse_machine(text), Err(ParseError::Semantic { .. })));
    }

    #[test]
    fn render_round_trips() {
        for m in [fixtures::l1(), fixtures::l2()] {
            let again = parse_machine(&m.to_text()).unwrap();
            assert_eq!(again, m);
        }
    }
}
