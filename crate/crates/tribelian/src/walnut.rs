//! Plain-text automaton files.
//!
//! The format follows the layout used by automaton theorem-prover result
//! files. The first line names the numeration system once per track; each
//! state then contributes a header line `<id> <output>` followed by one
//! transition line `<d1> <d2> ... <dk> -> <target>` per column. State 0 is
//! initial. For plain automata the output is 1 (accepting) or 0; DFAOs carry
//! their integer outputs, `-1` on the illegal-input sink.
//!
//! ```text
//! msd_trib msd_trib
//! 0 1
//! 0 0 -> 0
//! 1 0 -> 1
//! ...
//! ```
//!
//! Serialization relabels states in breadth-first order first, so equal
//! automata serialize to identical bytes and a parse/serialize round trip is
//! the identity on files.

use crate::automata::{Automaton, Dfao, StateId, Symbol, TrackSignature};

pub const NUMERATION_TOKEN: &str = "msd_trib";

#[derive(Debug, thiserror::Error)]
pub enum WalnutError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unsupported numeration token `{0}`")]
    BadNumeration(String),
    #[error("state {0} has a duplicate or missing transition table")]
    IncompleteState(StateId),
    #[error("no states in file")]
    Empty,
    #[error(transparent)]
    Automaton(#[from] crate::automata::AutomatonError),
}

/// Text form of a plain automaton (outputs 0/1).
pub fn serialize_automaton(a: &Automaton) -> String {
    let canon = a.canonicalize();
    let outputs: Vec<i64> = (0..canon.num_states() as StateId)
        .map(|q| canon.is_accepting(q) as i64)
        .collect();
    serialize_parts(canon.signature(), &outputs, |q, s| canon.next(q, s))
}

/// Text form of a DFAO with its integer outputs.
pub fn serialize_dfao(d: &Dfao) -> String {
    let canon = d.canonicalize();
    serialize_parts(canon.signature(), canon.outputs(), |q, s| canon.next(q, s))
}

fn serialize_parts(
    sig: TrackSignature,
    outputs: &[i64],
    next: impl Fn(StateId, Symbol) -> StateId,
) -> String {
    assert!(sig.tracks() >= 1, "sentences are not serialized");
    let mut out = String::new();
    for t in 0..sig.tracks() {
        if t > 0 {
            out.push(' ');
        }
        out.push_str(NUMERATION_TOKEN);
    }
    out.push('\n');
    for (q, output) in outputs.iter().enumerate() {
        out.push('\n');
        out.push_str(&format!("{q} {output}\n"));
        for s in sig.symbols() {
            for t in 0..sig.tracks() {
                out.push_str(&format!("{} ", sig.digit(s, t)));
            }
            out.push_str(&format!("-> {}\n", next(q as StateId, s)));
        }
    }
    out
}

/// Parsed file contents, convertible to either automaton kind.
pub struct WalnutFile {
    pub sig: TrackSignature,
    pub outputs: Vec<i64>,
    pub table: Vec<StateId>,
}

impl WalnutFile {
    pub fn to_automaton(&self) -> Result<Automaton, WalnutError> {
        let accepting = self.outputs.iter().map(|&o| o != 0).collect();
        Ok(Automaton::dfa(self.sig, 0, accepting, self.table.clone())?)
    }

    pub fn to_dfao(&self) -> Result<Dfao, WalnutError> {
        Ok(Dfao::new(
            self.sig,
            0,
            self.outputs.clone(),
            self.table.clone(),
        )?)
    }
}

pub fn parse(text: &str) -> Result<WalnutFile, WalnutError> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut lines = lines;
    let (first_no, header) = lines.next().ok_or(WalnutError::Empty)?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(WalnutError::Malformed {
            line: first_no,
            msg: "missing numeration line".into(),
        });
    }
    for t in &tokens {
        if *t != NUMERATION_TOKEN {
            return Err(WalnutError::BadNumeration(t.to_string()));
        }
    }
    let tracks = tokens.len() as u32;
    let sig = TrackSignature::new(tracks);
    let nsyms = sig.symbol_count() as usize;

    struct StateAcc {
        output: i64,
        row: Vec<Option<StateId>>,
    }
    let mut states: Vec<StateAcc> = Vec::new();
    let mut current: Option<usize> = None;
    for (line_no, line) in lines {
        let malformed = |msg: &str| WalnutError::Malformed {
            line: line_no,
            msg: msg.to_string(),
        };
        if let Some((lhs, rhs)) = line.split_once("->") {
            let state_index = current.ok_or_else(|| malformed("transition before any state"))?;
            let digits: Vec<u32> = lhs
                .split_whitespace()
                .map(|d| d.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| malformed("bad digit"))?;
            if digits.len() != tracks as usize || digits.iter().any(|&d| d > 1) {
                return Err(malformed("wrong number of digits or digit out of range"));
            }
            let mut sym: Symbol = 0;
            for (t, &d) in digits.iter().enumerate() {
                sym |= d << t;
            }
            let target: StateId = rhs
                .trim()
                .parse()
                .map_err(|_| malformed("bad transition target"))?;
            let slot = &mut states[state_index].row[sym as usize];
            if slot.is_some() {
                return Err(malformed("duplicate transition"));
            }
            *slot = Some(target);
        } else {
            let mut parts = line.split_whitespace();
            let id: usize = parts
                .next()
                .ok_or_else(|| malformed("missing state id"))?
                .parse()
                .map_err(|_| malformed("bad state id"))?;
            let output: i64 = parts
                .next()
                .ok_or_else(|| malformed("missing state output"))?
                .parse()
                .map_err(|_| malformed("bad state output"))?;
            if parts.next().is_some() {
                return Err(malformed("trailing tokens on state header"));
            }
            if id != states.len() {
                return Err(malformed("state headers must be consecutive from 0"));
            }
            states.push(StateAcc {
                output,
                row: vec![None; nsyms],
            });
            current = Some(id);
        }
    }
    if states.is_empty() {
        return Err(WalnutError::Empty);
    }
    let n = states.len();
    let mut outputs = Vec::with_capacity(n);
    let mut table = Vec::with_capacity(n * nsyms);
    for (q, st) in states.into_iter().enumerate() {
        outputs.push(st.output);
        for slot in st.row {
            let target = slot.ok_or(WalnutError::IncompleteState(q as StateId))?;
            if target as usize >= n {
                return Err(WalnutError::IncompleteState(q as StateId));
            }
            table.push(target);
        }
    }
    Ok(WalnutFile {
        sig,
        outputs,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeration::{shift_rel, valid_dfa};
    use crate::worddfao::build_tr;

    #[test]
    fn automaton_round_trip() {
        for a in [valid_dfa(), shift_rel()] {
            let text = serialize_automaton(&a);
            let parsed = parse(&text).unwrap().to_automaton().unwrap();
            assert!(parsed.isomorphic(&a));
            assert_eq!(serialize_automaton(&parsed), text);
        }
    }

    #[test]
    fn dfao_round_trip() {
        let d = build_tr();
        let text = serialize_dfao(&d);
        let parsed = parse(&text).unwrap().to_dfao().unwrap();
        assert!(parsed.isomorphic(&d));
        assert_eq!(serialize_dfao(&parsed), text);
        assert!(text.contains("-1"), "sink output serialized");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("msd_fib\n0 1\n0 -> 0\n1 -> 0\n").is_err());
        assert!(parse("msd_trib\n0 1\n0 -> 0\n").is_err()); // missing digit-1 row
        assert!(parse("msd_trib\n0 1\n0 -> 0\n1 -> 1\n1 -> 0\n").is_err());
    }

    #[test]
    fn header_arity_sets_tracks() {
        let two =
            parse("msd_trib msd_trib\n0 1\n0 0 -> 0\n1 0 -> 0\n0 1 -> 0\n1 1 -> 0\n").unwrap();
        assert_eq!(two.sig.tracks(), 2);
    }
}
