//! DFAOs for the Tribonacci word `TR` and its last-digit helper `TRL`.

use std::collections::BTreeMap;

use crate::automata::{Dfao, TrackSignature, DEAD_OUTPUT};
use crate::numeration::{encode_values, to_trib};

/// `TRL[n]`: the final digit of the canonical representation of `n`
/// (0 for `n = 0`). Inputs containing `111` end in a sink with output `-1`.
pub fn build_trl() -> Dfao {
    // states: last digit 0 (also start), one trailing 1, two trailing 1s, sink
    let sig = TrackSignature::new(1);
    Dfao::new(
        sig,
        0,
        vec![0, 1, 1, DEAD_OUTPUT],
        vec![0, 1, 0, 2, 0, 3, 3, 3],
    )
    .unwrap()
}

/// `TR[n]`: 0, 1 or 2 according to whether the (zero-prefixed) canonical
/// representation of `n` ends in `0`, `01` or `11`.
pub fn build_tr() -> Dfao {
    // states: ends in 0 (also start), ends in 01, ends in 11, sink
    let sig = TrackSignature::new(1);
    Dfao::new(
        sig,
        0,
        vec![0, 1, 2, DEAD_OUTPUT],
        vec![0, 1, 0, 2, 0, 3, 3, 3],
    )
    .unwrap()
}

/// Evaluates a 1-track DFAO at an integer index, feeding the canonical
/// representation msd-first; `n = 0` reads the empty word.
pub fn eval(dfao: &Dfao, n: u64) -> i64 {
    debug_assert_eq!(dfao.signature().tracks(), 1);
    let word: Vec<u32> = to_trib(n).iter().map(|&b| b as u32).collect();
    dfao.eval_word(&word)
}

/// Evaluates a multi-track DFAO at a tuple of integer indices.
pub fn eval_tuple(dfao: &Dfao, values: &[u64]) -> i64 {
    debug_assert_eq!(dfao.signature().tracks() as usize, values.len());
    dfao.eval_word(&encode_values(values))
}

/// Named collection of word automata (`TR`, `TRL`, and pipeline outputs).
#[derive(Default)]
pub struct WordDfaoRegistry {
    entries: BTreeMap<String, Dfao>,
}

impl WordDfaoRegistry {
    pub fn new() -> WordDfaoRegistry {
        WordDfaoRegistry::default()
    }

    /// Registry preloaded with `TR` and `TRL`.
    pub fn standard() -> WordDfaoRegistry {
        let mut reg = WordDfaoRegistry::new();
        reg.insert("TR", build_tr());
        reg.insert("TRL", build_trl());
        reg
    }

    pub fn insert(&mut self, name: &str, dfao: Dfao) {
        assert_eq!(
            dfao.signature().tracks(),
            1,
            "word automata read a single track"
        );
        self.entries.insert(name.to_string(), dfao);
    }

    pub fn get(&self, name: &str) -> Option<&Dfao> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn trl_values() {
        let trl = build_trl();
        assert_eq!(eval(&trl, 6), 0);
        assert_eq!(eval(&trl, 12), 1);
        assert_eq!(eval(&trl, 0), 0);
        for n in 1..50_000u64 {
            let rep = to_trib(n);
            assert_eq!(eval(&trl, n), *rep.last().unwrap() as i64, "TRL[{n}]");
        }
    }

    #[test]
    fn trl_rejects_illegal_input() {
        let trl = build_trl();
        assert_eq!(trl.eval_word(&[1, 1, 1]), DEAD_OUTPUT);
        assert_eq!(trl.eval_word(&[1, 1, 1, 0]), DEAD_OUTPUT);
    }

    #[test]
    fn tr_prefix() {
        let tr = build_tr();
        let got: Vec<i64> = (0..7).map(|n| eval(&tr, n)).collect();
        assert_eq!(got, vec![0, 1, 0, 2, 0, 1, 0]);
        assert_eq!(eval(&tr, 1), 1);
        assert_eq!(eval(&tr, 3), 2);
    }

    #[test]
    fn tr_matches_morphism_word() {
        let tr = build_tr();
        let oracle = oracle::TribOracle::new(100_000);
        for n in 0..oracle.len() {
            assert_eq!(
                eval(&tr, n as u64),
                oracle.letter(n) as i64,
                "TR[{n}] disagrees with the morphism word"
            );
        }
    }

    #[test]
    fn dfao_minimization_is_stable_here() {
        let tr = build_tr();
        let min = tr.minimize();
        assert_eq!(min.num_states(), 4);
        assert!(min.isomorphic(&tr));
    }
}
