//! Named-variable relation algebra over Tribonacci-synchronized automata.
//!
//! A [`Relation`] pairs an automaton with one variable name per track; all
//! published relations keep their variables sorted by name, live inside the
//! universe "every track is a zero-padded canonical representation", and are
//! zero-prefix invariant. The combinators here realize the first-order
//! connectives: boolean operations auto-align variable sets, existential
//! quantification is projection + determinization, universal quantification
//! is its dual.

use std::collections::BTreeSet;

use crate::automata::{Automaton, BoolOp, Dfao, StateId, Symbol};
use crate::numeration::{
    all_tracks_valid, build_adder, const_rel, decode_word, encode_values, eq_rel, leq_rel, lt_rel,
    strip_leading_zeros, track_validity, AdderError,
};

#[derive(Debug, thiserror::Error)]
pub enum RelationError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVar(String),
    #[error("variable count {vars} does not match track count {tracks}")]
    VarCountMismatch { vars: usize, tracks: u32 },
    #[error("variable `{0}` is not part of the relation")]
    UnknownVar(String),
    #[error("alignment target must contain `{0}`")]
    TargetMissingVar(String),
    #[error("renaming produces duplicate variable `{0}`")]
    RenameCollision(String),
    #[error(transparent)]
    Automaton(#[from] crate::automata::AutomatonError),
    #[error(transparent)]
    Adder(#[from] AdderError),
}

/// An automaton together with an ordered list of distinct variable names,
/// one per track. Instances built by this module keep variables sorted.
#[derive(Clone, Debug)]
pub struct Relation {
    automaton: Automaton,
    vars: Vec<String>,
}

impl Relation {
    /// Wraps an automaton whose track `i` carries variable `vars[i]`;
    /// tracks are reordered so the variables end up sorted.
    pub fn lift(automaton: Automaton, vars: &[&str]) -> Result<Relation, RelationError> {
        let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let mut set = BTreeSet::new();
        for v in &names {
            if !set.insert(v.clone()) {
                return Err(RelationError::DuplicateVar(v.clone()));
            }
        }
        if names.len() != automaton.signature().tracks() as usize {
            return Err(RelationError::VarCountMismatch {
                vars: names.len(),
                tracks: automaton.signature().tracks(),
            });
        }
        let mut sorted = names.clone();
        sorted.sort();
        let map: Vec<usize> = sorted
            .iter()
            .map(|v| names.iter().position(|n| n == v).unwrap())
            .collect();
        let automaton = if map.iter().enumerate().all(|(i, &s)| i == s) {
            automaton
        } else {
            automaton.reorder_tracks(&map)?
        };
        Ok(Relation {
            automaton,
            vars: sorted,
        })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> Automaton {
        self.automaton
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    fn track_of(&self, var: &str) -> Result<usize, RelationError> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| RelationError::UnknownVar(var.to_string()))
    }

    /// Simultaneous variable renaming; the result is re-sorted.
    pub fn renamed(&self, map: &[(&str, &str)]) -> Result<Relation, RelationError> {
        let new_names: Vec<String> = self
            .vars
            .iter()
            .map(|v| {
                map.iter()
                    .find(|(from, _)| from == v)
                    .map(|(_, to)| to.to_string())
                    .unwrap_or_else(|| v.clone())
            })
            .collect();
        let mut seen = BTreeSet::new();
        for v in &new_names {
            if !seen.insert(v.clone()) {
                return Err(RelationError::RenameCollision(v.clone()));
            }
        }
        let refs: Vec<&str> = new_names.iter().map(|s| s.as_str()).collect();
        Relation::lift(self.automaton.clone(), &refs)
    }

    /// Extends the variable set to `target` (a superset of the current
    /// variables): new tracks are unconstrained apart from track validity.
    pub fn aligned(&self, target: &[String]) -> Result<Relation, RelationError> {
        let mut sorted = target.to_vec();
        sorted.sort();
        sorted.dedup();
        for v in &self.vars {
            if !sorted.contains(v) {
                return Err(RelationError::TargetMissingVar(v.clone()));
            }
        }
        if sorted == self.vars {
            return Ok(self.clone());
        }
        let mut automaton = self.automaton.clone();
        let mut inserted = Vec::new();
        for (i, v) in sorted.iter().enumerate() {
            if !self.vars.contains(v) {
                automaton = automaton.insert_track(i)?;
                inserted.push(i as u32);
            }
        }
        let tracks = sorted.len() as u32;
        for t in inserted {
            automaton = automaton.product(&track_validity(tracks, t), BoolOp::And)?;
        }
        Ok(Relation {
            automaton: automaton.minimize()?,
            vars: sorted,
        })
    }

    fn combine(&self, other: &Relation, op: BoolOp) -> Result<Relation, RelationError> {
        let mut union: Vec<String> = self.vars.clone();
        union.extend(other.vars.iter().cloned());
        union.sort();
        union.dedup();
        let a = self.aligned(&union)?;
        let b = other.aligned(&union)?;
        let mut product = a.automaton.product(&b.automaton, op)?;
        // implication and biconditional hold vacuously outside the universe;
        // keep the result within valid-track words
        if matches!(op, BoolOp::Implies | BoolOp::Iff) {
            product = product.product(&all_tracks_valid(union.len() as u32), BoolOp::And)?;
        }
        Ok(Relation {
            automaton: product.minimize()?,
            vars: union,
        })
    }

    pub fn and(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.combine(other, BoolOp::And)
    }

    pub fn or(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.combine(other, BoolOp::Or)
    }

    pub fn implies(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.combine(other, BoolOp::Implies)
    }

    pub fn iff(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.combine(other, BoolOp::Iff)
    }

    pub fn xor(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.combine(other, BoolOp::Xor)
    }

    /// Complement within the all-tracks-valid universe.
    pub fn not(&self) -> Result<Relation, RelationError> {
        let complemented = self.automaton.complement()?;
        let bounded =
            complemented.product(&all_tracks_valid(self.vars.len() as u32), BoolOp::And)?;
        Ok(Relation {
            automaton: bounded.minimize()?,
            vars: self.vars.clone(),
        })
    }

    /// Existential quantification over the listed variables.
    pub fn exists(&self, vars: &[&str]) -> Result<Relation, RelationError> {
        let mut tracks: Vec<usize> = Vec::new();
        for v in vars {
            tracks.push(self.track_of(v)?);
        }
        tracks.sort_unstable();
        tracks.dedup();
        let mut automaton = self.automaton.clone();
        for &t in tracks.iter().rev() {
            automaton = automaton.project(t)?;
        }
        let remaining: Vec<String> = self
            .vars
            .iter()
            .filter(|v| !vars.contains(&v.as_str()))
            .cloned()
            .collect();
        Ok(Relation {
            automaton: automaton.determinize().minimize()?,
            vars: remaining,
        })
    }

    /// Universal quantification, as the dual of [`Relation::exists`].
    pub fn forall(&self, vars: &[&str]) -> Result<Relation, RelationError> {
        self.not()?.exists(vars)?.not()
    }

    /// Membership of a value tuple, given positionally against the sorted
    /// variable list.
    pub fn accepts_values(&self, values: &[u64]) -> bool {
        debug_assert_eq!(values.len(), self.vars.len());
        self.automaton.accepts(&encode_values(values))
    }

    pub fn is_empty(&self) -> bool {
        self.automaton.is_language_empty()
    }

    /// For sentences (zero variables): whether the relation holds.
    pub fn holds(&self) -> bool {
        debug_assert!(self.vars.is_empty());
        !self.is_empty()
    }

    /// Decoded value tuple of the shortest accepted word.
    pub fn shortest_values(&self) -> Option<Vec<u64>> {
        let word = self.automaton.shortest_accepted()?;
        Some(decode_word(
            strip_leading_zeros(&word),
            self.vars.len() as u32,
        ))
    }

    /// Restriction to canonical words (no leading all-zero column), one word
    /// per value tuple.
    pub fn canonical_part(&self) -> Automaton {
        let sig = self.automaton.signature();
        let nsyms = sig.symbol_count() as usize;
        // start (accepts empty), body, sink
        let mut table = Vec::with_capacity(3 * nsyms);
        for s in 0..nsyms {
            table.push(if s == 0 { 2 } else { 1 });
        }
        table.extend(std::iter::repeat(1 as StateId).take(nsyms));
        table.extend(std::iter::repeat(2 as StateId).take(nsyms));
        let canonical = Automaton::dfa(sig, 0, vec![true, true, false], table).unwrap();
        self.automaton
            .product(&canonical, BoolOp::And)
            .unwrap()
            .minimize()
            .unwrap()
    }

    /// Whether infinitely many value tuples are accepted.
    pub fn has_infinitely_many_values(&self) -> bool {
        self.canonical_part().accepts_infinitely_many()
    }

    /// All value tuples, when finitely many; `None` on infinite relations.
    pub fn finite_values(&self) -> Option<BTreeSet<Vec<u64>>> {
        let canonical = self.canonical_part();
        if canonical.accepts_infinitely_many() {
            return None;
        }
        // a finite language's longest word is shorter than the state count
        let max_len = canonical.num_states();
        let tracks = self.vars.len() as u32;
        Some(
            canonical
                .enumerate(max_len)
                .into_iter()
                .map(|w| decode_word(&w, tracks))
                .collect(),
        )
    }

    /// The first `count` value tuples by shortlex order of their canonical
    /// words.
    pub fn first_values(&self, count: usize) -> Vec<Vec<u64>> {
        let canonical = self.canonical_part();
        let cap = canonical.num_states() + 64;
        let tracks = self.vars.len() as u32;
        canonical
            .enumerate_bounded(cap, count)
            .into_iter()
            .map(|w| decode_word(&w, tracks))
            .collect()
    }

    /// Zero-prefix invariance of the underlying automaton.
    pub fn is_zero_prefix_invariant(&self) -> bool {
        self.automaton.zero_prefix_invariant().unwrap_or(false)
    }

    /// Evaluates the relation as a function `input -> output`, assuming it is
    /// one (see [`RelationContext::check_functional`]). Works by searching a
    /// digit assignment for the output track along the fixed input digits,
    /// with a little extra zero padding so longer outputs fit.
    pub fn eval_function(&self, input_var: &str, input: u64, output_var: &str) -> Option<u64> {
        let it = self.track_of(input_var).ok()?;
        let ot = self.track_of(output_var).ok()?;
        debug_assert_eq!(self.vars.len(), 2);
        let digits: Vec<u8> = crate::numeration::to_trib(input).iter().copied().collect();
        for pad in 0..=8usize {
            let mut cols: Vec<u8> = vec![0; pad];
            cols.extend_from_slice(&digits);
            if let Some(out) = self.solve_output(&cols, it, ot) {
                return Some(out);
            }
        }
        None
    }

    fn solve_output(
        &self,
        input_digits: &[u8],
        input_track: usize,
        output_track: usize,
    ) -> Option<u64> {
        let len = input_digits.len();
        let n = self.automaton.num_states();
        // memo: 0 unknown, 1 reachable-to-accept, 2 not
        let mut memo = vec![0u8; (len + 1) * n];
        fn rec(
            a: &Automaton,
            memo: &mut [u8],
            n: usize,
            input_digits: &[u8],
            it: usize,
            ot: usize,
            pos: usize,
            q: StateId,
        ) -> bool {
            let len = input_digits.len();
            let slot = pos * n + q as usize;
            if memo[slot] != 0 {
                return memo[slot] == 1;
            }
            let ok = if pos == len {
                a.is_accepting(q)
            } else {
                (0..2u32).any(|d| {
                    let sym = ((input_digits[pos] as Symbol) << it) | (d << ot);
                    rec(a, memo, n, input_digits, it, ot, pos + 1, a.next(q, sym))
                })
            };
            memo[slot] = if ok { 1 } else { 2 };
            ok
        }
        let start = self.automaton.initials()[0];
        if !rec(
            &self.automaton,
            &mut memo,
            n,
            input_digits,
            input_track,
            output_track,
            0,
            start,
        ) {
            return None;
        }
        // reconstruct: prefer digit 0, guided by the memo
        let mut out_digits = Vec::with_capacity(len);
        let mut q = start;
        for pos in 0..len {
            let mut advanced = false;
            for d in 0..2u32 {
                let sym = ((input_digits[pos] as Symbol) << input_track) | (d << output_track);
                let t = self.automaton.next(q, sym);
                let ok = if pos + 1 == len {
                    self.automaton.is_accepting(t)
                } else {
                    memo[(pos + 1) * n + t as usize] == 1
                };
                if ok {
                    out_digits.push(d as u8);
                    q = t;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                return None;
            }
        }
        Some(crate::numeration::from_trib(&out_digits))
    }
}

/// Shared base relations: the addition automaton and the order relations,
/// built once and lifted with fresh variable names on demand.
pub struct RelationContext {
    adder: Automaton,
    eq: Automaton,
    lt: Automaton,
    leq: Automaton,
}

impl RelationContext {
    pub fn new() -> Result<RelationContext, RelationError> {
        Ok(RelationContext {
            adder: build_adder()?,
            eq: eq_rel(),
            lt: lt_rel(),
            leq: leq_rel(),
        })
    }

    pub fn adder(&self) -> &Automaton {
        &self.adder
    }

    /// `x = y + z`.
    pub fn rel_sum(&self, x: &str, y: &str, z: &str) -> Result<Relation, RelationError> {
        Relation::lift(self.adder.clone(), &[x, y, z])
    }

    pub fn rel_eq(&self, x: &str, y: &str) -> Result<Relation, RelationError> {
        Relation::lift(self.eq.clone(), &[x, y])
    }

    pub fn rel_lt(&self, x: &str, y: &str) -> Result<Relation, RelationError> {
        Relation::lift(self.lt.clone(), &[x, y])
    }

    pub fn rel_leq(&self, x: &str, y: &str) -> Result<Relation, RelationError> {
        Relation::lift(self.leq.clone(), &[x, y])
    }

    /// `x = c`.
    pub fn rel_const(&self, x: &str, c: u64) -> Result<Relation, RelationError> {
        Relation::lift(const_rel(c), &[x])
    }

    /// The 1-variable relation holding for every natural.
    pub fn rel_true(&self, x: &str) -> Result<Relation, RelationError> {
        Relation::lift(all_tracks_valid(1), &[x])
    }

    /// The 1-variable relation holding for nothing.
    pub fn rel_false(&self, x: &str) -> Result<Relation, RelationError> {
        self.rel_true(x)?.not()
    }

    /// `x = y + c`.
    pub fn rel_plus_const(&self, x: &str, y: &str, c: u64) -> Result<Relation, RelationError> {
        let aux = "#plus";
        let sum = self.rel_sum(x, y, aux)?;
        let k = self.rel_const(aux, c)?;
        sum.and(&k)?.exists(&[aux])
    }

    /// Pins `var` to the constant `value` and projects it away.
    pub fn substitute_const(
        &self,
        rel: &Relation,
        var: &str,
        value: u64,
    ) -> Result<Relation, RelationError> {
        rel.and(&self.rel_const(var, value)?)?.exists(&[var])
    }

    /// Checks that `rel` (binary) is the graph of a total function
    /// `input -> output`: some output for every valid input, and never two.
    pub fn check_functional(
        &self,
        rel: &Relation,
        input: &str,
        output: &str,
    ) -> Result<bool, RelationError> {
        let total = rel.exists(&[output])?;
        let universe = Relation::lift(all_tracks_valid(1), &[input])?;
        if !total
            .automaton()
            .language_equal(universe.automaton())
            .map_err(RelationError::from)?
        {
            return Ok(false);
        }
        let alt = "#alt";
        let second = rel.renamed(&[(output, alt)])?;
        let clash = rel.and(&second)?.and(&self.rel_lt(output, alt)?)?;
        Ok(clash.is_empty())
    }
}

/// `var` ranges over the `n` with `eval(word, n) = value`.
pub fn dfao_eq(word: &Dfao, var: &str, value: i64) -> Result<Relation, RelationError> {
    let accept = word.accept_set(value);
    let tracks = accept.signature().tracks();
    let bounded = accept.product(&all_tracks_valid(tracks), BoolOp::And)?;
    Relation::lift(bounded.minimize()?, &[var])
}
