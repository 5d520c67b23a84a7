//! The Tribonacci numeration system.
//!
//! A natural number is written msd-first over the weights `T_2, T_3, ...`
//! where `T_0 = 0, T_1 = T_2 = 1` and `T_n = T_{n-1} + T_{n-2} + T_{n-3}`.
//! The canonical representation is the greedy one: it starts with `1` (or is
//! empty, for zero) and never contains the factor `111`. Relation automata
//! work over zero-padded canonical representations read in parallel.

use crate::automata::{Automaton, BoolOp, Symbol, TrackSignature};

/// Precomputed Tribonacci numbers `T_0 .. T_64`.
#[derive(Clone, Debug)]
pub struct TribBasis {
    values: Vec<u64>,
}

impl Default for TribBasis {
    fn default() -> Self {
        Self::new()
    }
}

impl TribBasis {
    pub fn new() -> TribBasis {
        let mut values = vec![0u64, 1, 1];
        // extend until the next value no longer fits in u64 (index 73),
        // which makes every u64 representable
        loop {
            let n = values.len();
            let next = values[n - 1]
                .checked_add(values[n - 2])
                .and_then(|v| v.checked_add(values[n - 3]));
            match next {
                Some(v) => values.push(v),
                None => break,
            }
        }
        TribBasis { values }
    }

    pub fn value(&self, index: usize) -> u64 {
        self.values[index]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }
}

thread_local! {
    static BASIS: TribBasis = TribBasis::new();
}

/// Canonical msd-first representation of `n`; empty for zero.
pub fn to_trib(n: u64) -> Vec<u8> {
    if n == 0 {
        return Vec::new();
    }
    BASIS.with(|basis| {
        let t = basis.values();
        let mut top = 2;
        while top + 1 < t.len() && t[top + 1] <= n {
            top += 1;
        }
        let mut rest = n;
        let mut digits = Vec::with_capacity(top - 1);
        for k in (2..=top).rev() {
            if t[k] <= rest {
                rest -= t[k];
                digits.push(1);
            } else {
                digits.push(0);
            }
        }
        debug_assert_eq!(rest, 0);
        digits
    })
}

/// Value of an arbitrary binary word under the Tribonacci weights; leading
/// zeros and non-canonical digit patterns are fine.
pub fn from_trib(bits: &[u8]) -> u64 {
    BASIS.with(|basis| {
        let t = basis.values();
        let r = bits.len();
        bits.iter()
            .enumerate()
            .map(|(i, &b)| if b != 0 { t[r + 1 - i] } else { 0 })
            .sum()
    })
}

/// Packs per-track representations of the given values into parallel columns,
/// padding shorter ones with leading zeros.
pub fn encode_values(values: &[u64]) -> Vec<Symbol> {
    let reps: Vec<Vec<u8>> = values.iter().map(|&v| to_trib(v)).collect();
    let width = reps.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut word = Vec::with_capacity(width);
    for col in 0..width {
        let mut sym: Symbol = 0;
        for (track, rep) in reps.iter().enumerate() {
            let pad = width - rep.len();
            if col >= pad && rep[col - pad] != 0 {
                sym |= 1 << track;
            }
        }
        word.push(sym);
    }
    word
}

/// Reads each track of a padded word back into a value.
pub fn decode_word(word: &[Symbol], tracks: u32) -> Vec<u64> {
    (0..tracks)
        .map(|t| {
            let bits: Vec<u8> = word.iter().map(|&s| ((s >> t) & 1) as u8).collect();
            from_trib(&bits)
        })
        .collect()
}

/// Drops leading all-zero columns.
pub fn strip_leading_zeros(word: &[Symbol]) -> &[Symbol] {
    let start = word.iter().position(|&s| s != 0).unwrap_or(word.len());
    &word[start..]
}

/// One-track automaton accepting exactly the zero-padded canonical
/// representations, i.e. all binary words with no `111` factor.
pub fn valid_dfa() -> Automaton {
    // states: number of trailing ones (0, 1, 2), plus the sink
    let sig = TrackSignature::new(1);
    Automaton::dfa(
        sig,
        0,
        vec![true, true, true, false],
        vec![0, 1, 0, 2, 0, 3, 3, 3],
    )
    .unwrap()
}

/// `valid_dfa` widened to one track of a `tracks`-track signature.
pub fn track_validity(tracks: u32, track: u32) -> Automaton {
    let base = valid_dfa();
    let sig = TrackSignature::new(tracks);
    let nsyms = sig.symbol_count() as usize;
    let mut table = Vec::with_capacity(base.num_states() * nsyms);
    for q in 0..base.num_states() as u32 {
        for s in 0..nsyms as Symbol {
            table.push(base.next(q, (s >> track) & 1));
        }
    }
    Automaton::dfa(sig, 0, base.accepting_flags().to_vec(), table).unwrap()
}

/// Conjunction of `track_validity` over all tracks: the universe every
/// published relation lives in.
pub fn all_tracks_valid(tracks: u32) -> Automaton {
    if tracks == 0 {
        return Automaton::all(TrackSignature::new(0));
    }
    let mut acc = track_validity(tracks, 0);
    for t in 1..tracks {
        acc = acc
            .product(&track_validity(tracks, t), BoolOp::And)
            .unwrap()
            .minimize()
            .unwrap();
    }
    acc
}

#[derive(Debug, thiserror::Error)]
pub enum AdderError {
    #[error(
        "addition automaton not stable at discrepancy bound {bound}: \
         language changed at bound {larger}"
    )]
    Unstable { bound: i64, larger: i64 },
}

/// Default discrepancy bound for [`build_adder`].
pub const DEFAULT_ADDER_BOUND: i64 = 16;

/// The 3-track relation `{(x, y, z) : x = y + z}` over zero-padded canonical
/// representations.
///
/// Construction: explore columns msd-first, carrying the running differences
/// `value(x) - value(y) - value(z)` under the weight sequence and its two
/// upward shifts. Appending a digit column moves each difference by the
/// linear recurrence, so these three integers form a finite state space once
/// paths whose discrepancy exceeds the bound are pruned. The result is
/// intersected with per-track validity and minimized, and construction fails
/// if enlarging the bound changes the language.
pub fn build_adder() -> Result<Automaton, AdderError> {
    let mut bound = DEFAULT_ADDER_BOUND;
    loop {
        let base = adder_at_bound(bound);
        let check = adder_at_bound(bound + 4);
        if base.language_equal(&check).unwrap() {
            return Ok(base);
        }
        if bound >= 1 << 12 {
            return Err(AdderError::Unstable {
                bound,
                larger: bound + 4,
            });
        }
        bound *= 2;
    }
}

fn adder_at_bound(bound: i64) -> Automaton {
    let sig = TrackSignature::new(3);
    let mut index = std::collections::HashMap::new();
    let mut states: Vec<(i64, i64, i64)> = vec![(0, 0, 0)];
    index.insert((0, 0, 0), 0u32);
    let mut table: Vec<u32> = Vec::new();
    let mut i = 0;
    // transitions filled with a placeholder for the sink until its id is known
    const PENDING_SINK: u32 = u32::MAX;
    while i < states.len() {
        let (d0, d1, d2) = states[i];
        for sym in sig.symbols() {
            let x = (sym & 1) as i64;
            let y = ((sym >> 1) & 1) as i64;
            let z = ((sym >> 2) & 1) as i64;
            let step = x - y - z;
            // weights T_2 = 1, T_3 = 2, T_4 = 4 enter at the new column
            let n0 = d1 + step;
            let n1 = d2 + 2 * step;
            let n2 = d0 + d1 + d2 + 4 * step;
            if n0.abs() > bound || n1.abs() > bound || n2.abs() > bound {
                table.push(PENDING_SINK);
            } else {
                let key = (n0, n1, n2);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = states.len() as u32;
                        index.insert(key, id);
                        states.push(key);
                        id
                    }
                };
                table.push(id);
            }
        }
        i += 1;
    }
    let sink = states.len() as u32;
    for entry in &mut table {
        if *entry == PENDING_SINK {
            *entry = sink;
        }
    }
    table.extend(std::iter::repeat(sink).take(sig.symbol_count() as usize));
    let mut accepting: Vec<bool> = states.iter().map(|s| s.0 == 0).collect();
    accepting.push(false);
    let raw = Automaton::dfa(sig, 0, accepting, table).unwrap();
    raw.product(&all_tracks_valid(3), BoolOp::And)
        .unwrap()
        .minimize()
        .unwrap()
}

/// 2-track equality relation on values.
pub fn eq_rel() -> Automaton {
    let sig = TrackSignature::new(2);
    // state 0: equal so far; state 1: sink
    let diag = Automaton::dfa(sig, 0, vec![true, false], vec![0, 1, 1, 0, 1, 1, 1, 1]).unwrap();
    diag.product(&all_tracks_valid(2), BoolOp::And)
        .unwrap()
        .minimize()
        .unwrap()
}

/// 2-track strict order `x < y` by the first differing column. For
/// equal-length zero-padded canonical words the lexicographic order is the
/// numeric order, since a higher weight always beats every valid suffix.
pub fn lt_rel() -> Automaton {
    let sig = TrackSignature::new(2);
    // state 0: equal so far; 1: strictly less; 2: sink (greater)
    // columns: bit 0 = x digit, bit 1 = y digit
    let order = Automaton::dfa(
        sig,
        0,
        vec![false, true, false],
        vec![
            0, 2, 1, 0, // from "equal": (0,0)->eq, (1,0)->greater, (0,1)->less, (1,1)->eq
            1, 1, 1, 1, // less stays less
            2, 2, 2, 2,
        ],
    )
    .unwrap();
    order
        .product(&all_tracks_valid(2), BoolOp::And)
        .unwrap()
        .minimize()
        .unwrap()
}

/// 2-track order `x <= y`.
pub fn leq_rel() -> Automaton {
    eq_rel()
        .product(&lt_rel(), BoolOp::Or)
        .unwrap()
        .minimize()
        .unwrap()
}

/// 2-track right-shift relation: accepts `(m, n)` when the digit stream of
/// `n` equals that of `m` delayed by one column and `m`'s track is valid.
/// `(0, 0)` is accepted.
pub fn shift_rel() -> Automaton {
    let sig = TrackSignature::new(2);
    // states 0/1 remember the previous m digit (start acts like previous 0);
    // state 2 is the sink. Column bit 0 = m digit, bit 1 = n digit.
    let mut table = Vec::new();
    for prev in 0..2u32 {
        for sym in sig.symbols() {
            let m = sym & 1;
            let n = (sym >> 1) & 1;
            table.push(if n != prev { 2 } else { m });
        }
    }
    table.extend([2, 2, 2, 2]);
    let shift = Automaton::dfa(sig, 0, vec![true, true, false], table).unwrap();
    shift
        .product(&all_tracks_valid(2), BoolOp::And)
        .unwrap()
        .minimize()
        .unwrap()
}

/// 1-track singleton relation: the zero-padded representations of `c`.
pub fn const_rel(c: u64) -> Automaton {
    let sig = TrackSignature::new(1);
    let digits = to_trib(c);
    let n = digits.len() + 1; // chain states, then sink
    let sink = n as u32;
    let mut table = Vec::with_capacity((n + 1) * 2);
    for state in 0..n {
        for digit in 0..2u8 {
            let target = if state == 0 && digit == 0 {
                0 // leading zeros keep waiting
            } else if state < digits.len() && digit == digits[state] {
                state as u32 + 1
            } else {
                sink
            };
            table.push(target);
        }
    }
    table.extend([sink, sink]);
    let mut accepting = vec![false; n + 1];
    accepting[digits.len()] = true;
    let a = Automaton::dfa(sig, 0, accepting, table).unwrap();
    a.minimize().unwrap()
}
