//! Multi-track finite automata over `{0,1}^k`.
//!
//! A symbol is a column of digits, one per track, packed into the low bits of
//! a `u32` (track `t` is bit `t`). Reading a word therefore feeds all tracks
//! in parallel, one column at a time, which is exactly the padded msd-first
//! convention used by relations over a numeration system.
//!
//! Deterministic automata are always complete: every state has a successor on
//! every column, with rejection expressed through an ordinary sink state.
//! Nondeterministic automata appear only transiently, between [`Automaton::project`]
//! and [`Automaton::determinize`].

use std::collections::HashMap;

pub type StateId = u32;
pub type Symbol = u32;

/// Number of parallel tracks; each track's alphabet is `{0,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrackSignature {
    tracks: u32,
}

impl TrackSignature {
    pub const MAX_TRACKS: u32 = 16;

    pub fn new(tracks: u32) -> TrackSignature {
        assert!(
            tracks <= Self::MAX_TRACKS,
            "symbol space too large: {tracks} tracks"
        );
        TrackSignature { tracks }
    }

    pub fn tracks(&self) -> u32 {
        self.tracks
    }

    /// Size of the symbol space, `2^tracks` (a single empty column for zero
    /// tracks, so sentences still have a well-defined word universe).
    pub fn symbol_count(&self) -> u32 {
        1 << self.tracks
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.symbol_count()
    }

    pub fn digit(&self, sym: Symbol, track: u32) -> u32 {
        debug_assert!(track < self.tracks);
        (sym >> track) & 1
    }
}

/// Boolean connective for the product construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Xor,
    Implies,
    Iff,
}

impl BoolOp {
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            BoolOp::And => a && b,
            BoolOp::Or => a || b,
            BoolOp::Xor => a != b,
            BoolOp::Implies => !a || b,
            BoolOp::Iff => a == b,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AutomatonError {
    #[error("track signatures differ: {left} vs {right} tracks")]
    SignatureMismatch { left: u32, right: u32 },
    #[error("operation requires a deterministic automaton")]
    NotDeterministic,
    #[error("track index {track} out of range for {tracks}-track automaton")]
    TrackOutOfRange { track: usize, tracks: u32 },
    #[error("track map must use every source track; track {track} unused")]
    TrackUnused { track: usize },
    #[error("transition target {0} out of range")]
    StateOutOfRange(StateId),
    #[error("transition table has wrong length: expected {expected}, got {got}")]
    BadTableLength { expected: usize, got: usize },
}

#[derive(Clone, Debug)]
enum Delta {
    /// Dense total table, row-major: `table[state * nsyms + sym]`.
    Det(Vec<StateId>),
    /// Per `(state, sym)` sorted target list.
    Nfa(Vec<Vec<StateId>>),
}

/// A finite automaton over tuple-of-bits columns.
#[derive(Clone, Debug)]
pub struct Automaton {
    sig: TrackSignature,
    initials: Vec<StateId>,
    accepting: Vec<bool>,
    delta: Delta,
}

impl Automaton {
    /// A complete deterministic automaton. The table must be total.
    pub fn dfa(
        sig: TrackSignature,
        initial: StateId,
        accepting: Vec<bool>,
        table: Vec<StateId>,
    ) -> Result<Automaton, AutomatonError> {
        let n = accepting.len();
        let nsyms = sig.symbol_count() as usize;
        if table.len() != n * nsyms {
            return Err(AutomatonError::BadTableLength {
                expected: n * nsyms,
                got: table.len(),
            });
        }
        for &t in &table {
            if t as usize >= n {
                return Err(AutomatonError::StateOutOfRange(t));
            }
        }
        if initial as usize >= n {
            return Err(AutomatonError::StateOutOfRange(initial));
        }
        Ok(Automaton {
            sig,
            initials: vec![initial],
            accepting,
            delta: Delta::Det(table),
        })
    }

    /// A nondeterministic automaton from a transition list.
    pub fn nfa(
        sig: TrackSignature,
        num_states: usize,
        initials: Vec<StateId>,
        accepting: Vec<StateId>,
        transitions: &[(StateId, Symbol, StateId)],
    ) -> Result<Automaton, AutomatonError> {
        let nsyms = sig.symbol_count() as usize;
        let mut rows = vec![Vec::new(); num_states * nsyms];
        for &(q, s, t) in transitions {
            if q as usize >= num_states || t as usize >= num_states {
                return Err(AutomatonError::StateOutOfRange(q.max(t)));
            }
            rows[q as usize * nsyms + s as usize].push(t);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        let mut acc = vec![false; num_states];
        for &q in &accepting {
            if q as usize >= num_states {
                return Err(AutomatonError::StateOutOfRange(q));
            }
            acc[q as usize] = true;
        }
        let mut inits = initials;
        inits.sort_unstable();
        inits.dedup();
        for &q in &inits {
            if q as usize >= num_states {
                return Err(AutomatonError::StateOutOfRange(q));
            }
        }
        Ok(Automaton {
            sig,
            initials: inits,
            accepting: acc,
            delta: Delta::Nfa(rows),
        })
    }

    /// One-state automaton rejecting everything.
    pub fn empty(sig: TrackSignature) -> Automaton {
        Automaton {
            sig,
            initials: vec![0],
            accepting: vec![false],
            delta: Delta::Det(vec![0; sig.symbol_count() as usize]),
        }
    }

    /// One-state automaton accepting everything.
    pub fn all(sig: TrackSignature) -> Automaton {
        Automaton {
            sig,
            initials: vec![0],
            accepting: vec![true],
            delta: Delta::Det(vec![0; sig.symbol_count() as usize]),
        }
    }

    pub fn signature(&self) -> TrackSignature {
        self.sig
    }

    pub fn num_states(&self) -> usize {
        self.accepting.len()
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.delta, Delta::Det(_)) && self.initials.len() == 1
    }

    pub fn initial(&self) -> StateId {
        debug_assert!(self.is_deterministic());
        self.initials[0]
    }

    pub fn initials(&self) -> &[StateId] {
        &self.initials
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepting_flags(&self) -> &[bool] {
        &self.accepting
    }

    /// Deterministic successor; only valid on deterministic automata.
    pub fn next(&self, q: StateId, sym: Symbol) -> StateId {
        match &self.delta {
            Delta::Det(table) => {
                table[q as usize * self.sig.symbol_count() as usize + sym as usize]
            }
            Delta::Nfa(_) => panic!("next() on a nondeterministic automaton"),
        }
    }

    pub fn det_table(&self) -> Option<&[StateId]> {
        match &self.delta {
            Delta::Det(table) => Some(table),
            Delta::Nfa(_) => None,
        }
    }

    /// States counted as "dead": a rejecting state looping to itself on every
    /// symbol. A trim state count excludes these.
    pub fn count_dead_states(&self) -> usize {
        let nsyms = self.sig.symbol_count();
        (0..self.num_states() as StateId)
            .filter(|&q| {
                !self.accepting[q as usize]
                    && matches!(&self.delta, Delta::Det(_))
                    && (0..nsyms).all(|s| self.next(q, s) == q)
            })
            .count()
    }

    /// State count excluding rejecting sink states.
    pub fn trim_state_count(&self) -> usize {
        self.num_states() - self.count_dead_states()
    }

    pub fn accepts(&self, word: &[Symbol]) -> bool {
        match &self.delta {
            Delta::Det(_) => {
                let mut q = self.initials[0];
                for &s in word {
                    q = self.next(q, s);
                }
                self.accepting[q as usize]
            }
            Delta::Nfa(rows) => {
                let nsyms = self.sig.symbol_count() as usize;
                let mut cur: Vec<StateId> = self.initials.clone();
                for &s in word {
                    let mut nxt = Vec::new();
                    for &q in &cur {
                        nxt.extend_from_slice(&rows[q as usize * nsyms + s as usize]);
                    }
                    nxt.sort_unstable();
                    nxt.dedup();
                    cur = nxt;
                }
                cur.iter().any(|&q| self.accepting[q as usize])
            }
        }
    }

    /// Subset construction. Deterministic input is relabeled unchanged; the
    /// result is always deterministic and complete, with states numbered in
    /// breadth-first discovery order.
    pub fn determinize(&self) -> Automaton {
        if self.is_deterministic() {
            return self.canonicalize();
        }
        let nsyms = self.sig.symbol_count() as usize;
        let rows: Vec<Vec<StateId>> = match &self.delta {
            Delta::Nfa(rows) => rows.clone(),
            Delta::Det(table) => table.iter().map(|&t| vec![t]).collect(),
        };
        let mut index: HashMap<Box<[StateId]>, StateId> = HashMap::new();
        let mut subsets: Vec<Box<[StateId]>> = Vec::new();
        let start: Box<[StateId]> = self.initials.clone().into_boxed_slice();
        index.insert(start.clone(), 0);
        subsets.push(start);
        let mut table: Vec<StateId> = Vec::new();
        let mut accepting = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            let cur = subsets[i].clone();
            accepting.push(cur.iter().any(|&q| self.accepting[q as usize]));
            for s in 0..nsyms {
                let mut nxt: Vec<StateId> = Vec::new();
                for &q in cur.iter() {
                    nxt.extend_from_slice(&rows[q as usize * nsyms + s]);
                }
                nxt.sort_unstable();
                nxt.dedup();
                let boxed = nxt.into_boxed_slice();
                let id = match index.get(&boxed) {
                    Some(&id) => id,
                    None => {
                        let id = subsets.len() as StateId;
                        index.insert(boxed.clone(), id);
                        subsets.push(boxed);
                        id
                    }
                };
                table.push(id);
            }
            i += 1;
        }
        Automaton {
            sig: self.sig,
            initials: vec![0],
            accepting,
            delta: Delta::Det(table),
        }
    }

    /// Relabels reachable states in breadth-first order (initial state 0,
    /// successors explored in ascending symbol order). Unreachable states are
    /// dropped. Requires a deterministic automaton.
    pub fn canonicalize(&self) -> Automaton {
        assert!(self.is_deterministic());
        let nsyms = self.sig.symbol_count() as usize;
        let mut order: Vec<StateId> = vec![self.initials[0]];
        let mut new_id: HashMap<StateId, StateId> = HashMap::new();
        new_id.insert(self.initials[0], 0);
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for s in 0..nsyms as Symbol {
                let t = self.next(q, s);
                if !new_id.contains_key(&t) {
                    new_id.insert(t, order.len() as StateId);
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut table = Vec::with_capacity(order.len() * nsyms);
        let mut accepting = Vec::with_capacity(order.len());
        for &q in &order {
            accepting.push(self.accepting[q as usize]);
            for s in 0..nsyms as Symbol {
                table.push(new_id[&self.next(q, s)]);
            }
        }
        Automaton {
            sig: self.sig,
            initials: vec![0],
            accepting,
            delta: Delta::Det(table),
        }
    }

    /// Minimal complete automaton for the language. The dead state survives
    /// exactly when it is reachable.
    pub fn minimize(&self) -> Result<Automaton, AutomatonError> {
        if !self.is_deterministic() {
            return Err(AutomatonError::NotDeterministic);
        }
        let reach = self.canonicalize();
        let init_class: Vec<u32> = reach.accepting.iter().map(|&a| a as u32).collect();
        let table = reach.det_table().unwrap();
        let (class_of, nclasses) = refine_partition(
            reach.num_states(),
            reach.sig.symbol_count() as usize,
            table,
            &init_class,
        );
        Ok(reach.quotient(&class_of, nclasses).canonicalize())
    }

    fn quotient(&self, class_of: &[u32], nclasses: usize) -> Automaton {
        let nsyms = self.sig.symbol_count() as usize;
        let mut table = vec![0 as StateId; nclasses * nsyms];
        let mut accepting = vec![false; nclasses];
        let mut seen = vec![false; nclasses];
        for q in 0..self.num_states() {
            let c = class_of[q] as usize;
            if !seen[c] {
                seen[c] = true;
                accepting[c] = self.accepting[q];
                for s in 0..nsyms {
                    table[c * nsyms + s] = class_of[self.next(q as StateId, s as Symbol) as usize];
                }
            }
        }
        Automaton {
            sig: self.sig,
            initials: vec![class_of[self.initials[0] as usize]],
            accepting,
            delta: Delta::Det(table),
        }
    }

    /// Direct product with a boolean connective on acceptance. Both operands
    /// must be deterministic and share a signature; only reachable pairs are
    /// materialized.
    pub fn product(&self, other: &Automaton, op: BoolOp) -> Result<Automaton, AutomatonError> {
        if self.sig != other.sig {
            return Err(AutomatonError::SignatureMismatch {
                left: self.sig.tracks(),
                right: other.sig.tracks(),
            });
        }
        if !self.is_deterministic() || !other.is_deterministic() {
            return Err(AutomatonError::NotDeterministic);
        }
        let nsyms = self.sig.symbol_count() as usize;
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut pairs: Vec<(StateId, StateId)> = vec![(self.initials[0], other.initials[0])];
        index.insert(pairs[0], 0);
        let mut table: Vec<StateId> = Vec::new();
        let mut accepting: Vec<bool> = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (qa, qb) = pairs[i];
            accepting.push(op.apply(self.accepting[qa as usize], other.accepting[qb as usize]));
            for s in 0..nsyms as Symbol {
                let key = (self.next(qa, s), other.next(qb, s));
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None => {
                        let id = pairs.len() as StateId;
                        index.insert(key, id);
                        pairs.push(key);
                        id
                    }
                };
                table.push(id);
            }
            i += 1;
        }
        Ok(Automaton {
            sig: self.sig,
            initials: vec![0],
            accepting,
            delta: Delta::Det(table),
        })
    }

    /// Complement within the full padded-word universe. Requires a complete
    /// deterministic automaton, which is the only deterministic form this
    /// type constructs.
    pub fn complement(&self) -> Result<Automaton, AutomatonError> {
        if !self.is_deterministic() {
            return Err(AutomatonError::NotDeterministic);
        }
        Ok(Automaton {
            sig: self.sig,
            initials: self.initials.clone(),
            accepting: self.accepting.iter().map(|&a| !a).collect(),
            delta: self.delta.clone(),
        })
    }

    /// Existentially quantifies one track away. The result is
    /// nondeterministic; its initial states are saturated under the all-zeros
    /// column so that shorter paddings of the remaining tracks stay in the
    /// language. Callers determinize afterwards.
    pub fn project(&self, track: usize) -> Result<Automaton, AutomatonError> {
        let tracks = self.sig.tracks();
        if track >= tracks as usize {
            return Err(AutomatonError::TrackOutOfRange { track, tracks });
        }
        let new_sig = TrackSignature::new(tracks - 1);
        let nsyms = self.sig.symbol_count() as usize;
        let new_nsyms = new_sig.symbol_count() as usize;
        let n = self.num_states();
        let mut rows: Vec<Vec<StateId>> = vec![Vec::new(); n * new_nsyms];
        let low_mask: Symbol = (1 << track) - 1;
        for q in 0..n {
            for s in 0..nsyms as Symbol {
                let projected = (s & low_mask) | ((s >> 1) & !low_mask);
                let row = &mut rows[q * new_nsyms + projected as usize];
                match &self.delta {
                    Delta::Det(table) => row.push(table[q * nsyms + s as usize]),
                    Delta::Nfa(old) => row.extend_from_slice(&old[q * nsyms + s as usize]),
                }
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        // Saturate: anything reachable by all-zero columns joins the initial set.
        let mut initials = self.initials.clone();
        let mut stack = initials.clone();
        let mut seen = vec![false; n];
        for &q in &initials {
            seen[q as usize] = true;
        }
        while let Some(q) = stack.pop() {
            for &t in &rows[q as usize * new_nsyms] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    initials.push(t);
                    stack.push(t);
                }
            }
        }
        initials.sort_unstable();
        Ok(Automaton {
            sig: new_sig,
            initials,
            accepting: self.accepting.clone(),
            delta: Delta::Nfa(rows),
        })
    }

    /// Inserts an unconstrained track at `position` (digits on the new track
    /// are ignored by the transition function).
    pub fn insert_track(&self, position: usize) -> Result<Automaton, AutomatonError> {
        let tracks = self.sig.tracks();
        if position > tracks as usize {
            return Err(AutomatonError::TrackOutOfRange {
                track: position,
                tracks: tracks + 1,
            });
        }
        let new_sig = TrackSignature::new(tracks + 1);
        let low_mask: Symbol = (1 << position) - 1;
        let remap = |s: Symbol| -> Symbol { (s & low_mask) | ((s >> position >> 1) << position) };
        self.rebuild_symbols(new_sig, remap)
    }

    /// Rewires tracks: result track `i` reads source track `map[i]`. The map
    /// must cover every source track; mapping one source track onto several
    /// result tracks constrains those result tracks to carry equal digits
    /// (columns violating that go to a fresh sink).
    pub fn reorder_tracks(&self, map: &[usize]) -> Result<Automaton, AutomatonError> {
        let tracks = self.sig.tracks() as usize;
        let mut used = vec![false; tracks];
        for &src in map {
            if src >= tracks {
                return Err(AutomatonError::TrackOutOfRange {
                    track: src,
                    tracks: tracks as u32,
                });
            }
            used[src] = true;
        }
        if let Some(t) = used.iter().position(|&u| !u) {
            return Err(AutomatonError::TrackUnused { track: t });
        }
        let new_sig = TrackSignature::new(map.len() as u32);
        let new_nsyms = new_sig.symbol_count() as usize;
        // Translate each result column into a source column, or None when
        // duplicated tracks disagree.
        let mut translate: Vec<Option<Symbol>> = Vec::with_capacity(new_nsyms);
        for s in 0..new_nsyms as Symbol {
            let mut src_sym: Symbol = 0;
            let mut fixed: u32 = 0; // bitmask of source tracks already set
            let mut ok = true;
            for (i, &src) in map.iter().enumerate() {
                let d = (s >> i) & 1;
                if fixed >> src & 1 == 1 {
                    if (src_sym >> src) & 1 != d {
                        ok = false;
                        break;
                    }
                } else {
                    fixed |= 1 << src;
                    src_sym |= d << src;
                }
            }
            translate.push(ok.then_some(src_sym));
        }
        let needs_sink = translate.iter().any(|t| t.is_none());
        match (&self.delta, needs_sink) {
            (Delta::Det(table), _) => {
                let n = self.num_states();
                let nsyms = self.sig.symbol_count() as usize;
                let sink = n as StateId;
                let total = if needs_sink { n + 1 } else { n };
                let mut new_table = Vec::with_capacity(total * new_nsyms);
                for q in 0..n {
                    for t in &translate {
                        new_table.push(match t {
                            Some(src) => table[q * nsyms + *src as usize],
                            None => sink,
                        });
                    }
                }
                let mut accepting = self.accepting.clone();
                if needs_sink {
                    accepting.push(false);
                    new_table.extend(std::iter::repeat(sink).take(new_nsyms));
                }
                Ok(Automaton {
                    sig: new_sig,
                    initials: self.initials.clone(),
                    accepting,
                    delta: Delta::Det(new_table),
                })
            }
            (Delta::Nfa(rows), _) => {
                let n = self.num_states();
                let nsyms = self.sig.symbol_count() as usize;
                let mut new_rows: Vec<Vec<StateId>> = vec![Vec::new(); n * new_nsyms];
                for q in 0..n {
                    for (s2, t) in translate.iter().enumerate() {
                        if let Some(src) = t {
                            new_rows[q * new_nsyms + s2] = rows[q * nsyms + *src as usize].clone();
                        }
                    }
                }
                Ok(Automaton {
                    sig: new_sig,
                    initials: self.initials.clone(),
                    accepting: self.accepting.clone(),
                    delta: Delta::Nfa(new_rows),
                })
            }
        }
    }

    fn rebuild_symbols(
        &self,
        new_sig: TrackSignature,
        remap: impl Fn(Symbol) -> Symbol,
    ) -> Result<Automaton, AutomatonError> {
        let new_nsyms = new_sig.symbol_count() as usize;
        let nsyms = self.sig.symbol_count() as usize;
        let n = self.num_states();
        let delta = match &self.delta {
            Delta::Det(table) => {
                let mut new_table = Vec::with_capacity(n * new_nsyms);
                for q in 0..n {
                    for s in 0..new_nsyms as Symbol {
                        new_table.push(table[q * nsyms + remap(s) as usize]);
                    }
                }
                Delta::Det(new_table)
            }
            Delta::Nfa(rows) => {
                let mut new_rows = Vec::with_capacity(n * new_nsyms);
                for q in 0..n {
                    for s in 0..new_nsyms as Symbol {
                        new_rows.push(rows[q * nsyms + remap(s) as usize].clone());
                    }
                }
                Delta::Nfa(new_rows)
            }
        };
        Ok(Automaton {
            sig: new_sig,
            initials: self.initials.clone(),
            accepting: self.accepting.clone(),
            delta,
        })
    }

    pub fn is_language_empty(&self) -> bool {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<StateId> = self.initials.clone();
        for &q in &stack {
            seen[q as usize] = true;
        }
        let nsyms = self.sig.symbol_count() as usize;
        while let Some(q) = stack.pop() {
            if self.accepting[q as usize] {
                return false;
            }
            let push = |t: StateId, seen: &mut Vec<bool>, stack: &mut Vec<StateId>| {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            };
            match &self.delta {
                Delta::Det(table) => {
                    for s in 0..nsyms {
                        push(table[q as usize * nsyms + s], &mut seen, &mut stack);
                    }
                }
                Delta::Nfa(rows) => {
                    for s in 0..nsyms {
                        for &t in &rows[q as usize * nsyms + s] {
                            push(t, &mut seen, &mut stack);
                        }
                    }
                }
            }
        }
        true
    }

    /// Shortest accepted word; length ties break lexicographically on the
    /// column read as an integer. Deterministic automata only.
    pub fn shortest_accepted(&self) -> Option<Vec<Symbol>> {
        assert!(self.is_deterministic());
        let n = self.num_states();
        let nsyms = self.sig.symbol_count() as usize;
        let mut parent: Vec<Option<(StateId, Symbol)>> = vec![None; n];
        let mut seen = vec![false; n];
        let start = self.initials[0];
        seen[start as usize] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        let mut hit = if self.accepting[start as usize] {
            Some(start)
        } else {
            None
        };
        while hit.is_none() {
            let q = queue.pop_front()?;
            for s in 0..nsyms as Symbol {
                let t = self.next(q, s);
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((q, s));
                    if self.accepting[t as usize] {
                        hit = Some(t);
                        break;
                    }
                    queue.push_back(t);
                }
            }
        }
        let mut word = Vec::new();
        let mut cur = hit?;
        while let Some((p, s)) = parent[cur as usize] {
            word.push(s);
            cur = p;
        }
        word.reverse();
        Some(word)
    }

    /// All accepted words of length at most `max_len`, in shortlex order.
    /// Prefixes that cannot reach acceptance within the remaining budget are
    /// pruned, so the cost is near-linear in the output for finite languages.
    pub fn enumerate(&self, max_len: usize) -> Vec<Vec<Symbol>> {
        self.enumerate_bounded(max_len, usize::MAX)
    }

    /// Like [`Automaton::enumerate`], stopping after `max_count` words.
    pub fn enumerate_bounded(&self, max_len: usize, max_count: usize) -> Vec<Vec<Symbol>> {
        assert!(self.is_deterministic());
        let dist = self.distance_to_accepting();
        let nsyms = self.sig.symbol_count() as usize;
        let mut out = Vec::new();
        let mut frontier: Vec<(StateId, Vec<Symbol>)> = vec![(self.initials[0], Vec::new())];
        for len in 0..=max_len {
            let mut next = Vec::new();
            for (q, word) in &frontier {
                if self.accepting[*q as usize] {
                    if out.len() >= max_count {
                        return out;
                    }
                    out.push(word.clone());
                }
                if len < max_len {
                    for s in 0..nsyms as Symbol {
                        let t = self.next(*q, s);
                        if dist[t as usize] as usize <= max_len - len - 1 {
                            let mut w = word.clone();
                            w.push(s);
                            next.push((t, w));
                        }
                    }
                }
            }
            if out.len() >= max_count {
                return out;
            }
            frontier = next;
        }
        out
    }

    /// Whether infinitely many words are accepted: some cycle lies on a path
    /// from the initial state to an accepting state.
    pub fn accepts_infinitely_many(&self) -> bool {
        assert!(self.is_deterministic());
        let dist = self.distance_to_accepting();
        let nsyms = self.sig.symbol_count() as usize;
        // useful = reachable and co-accessible
        let n = self.num_states();
        let mut reach = vec![false; n];
        let mut stack = vec![self.initials[0]];
        reach[self.initials[0] as usize] = true;
        while let Some(q) = stack.pop() {
            for s in 0..nsyms as Symbol {
                let t = self.next(q, s);
                if !reach[t as usize] {
                    reach[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        let useful: Vec<bool> = (0..n).map(|q| reach[q] && dist[q] != u32::MAX).collect();
        // cycle detection on the useful subgraph
        let mut color = vec![0u8; n]; // 0 white, 1 on stack, 2 done
        for start in 0..n {
            if !useful[start] || color[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = 1;
            while let Some(&mut (q, ref mut s)) = stack.last_mut() {
                if *s == nsyms {
                    color[q] = 2;
                    stack.pop();
                    continue;
                }
                let t = self.next(q as StateId, *s as Symbol) as usize;
                *s += 1;
                if !useful[t] {
                    continue;
                }
                match color[t] {
                    0 => {
                        color[t] = 1;
                        stack.push((t, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            }
        }
        false
    }

    fn distance_to_accepting(&self) -> Vec<u32> {
        let n = self.num_states();
        let nsyms = self.sig.symbol_count() as usize;
        let table = self.det_table().expect("deterministic automaton required");
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for s in 0..nsyms {
                preds[table[q * nsyms + s] as usize].push(q as StateId);
            }
        }
        let mut dist = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for q in 0..n {
            if self.accepting[q] {
                dist[q] = 0;
                queue.push_back(q as StateId);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &p in &preds[q as usize] {
                if dist[p as usize] == u32::MAX {
                    dist[p as usize] = dist[q as usize] + 1;
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// Language equality via emptiness of the symmetric difference.
    pub fn language_equal(&self, other: &Automaton) -> Result<bool, AutomatonError> {
        Ok(self.product(other, BoolOp::Xor)?.is_language_empty())
    }

    /// True when prepending an all-zeros column never changes acceptance.
    pub fn zero_prefix_invariant(&self) -> Result<bool, AutomatonError> {
        if !self.is_deterministic() {
            return Err(AutomatonError::NotDeterministic);
        }
        let mut shifted = self.clone();
        shifted.initials = vec![self.next(self.initials[0], 0)];
        self.language_equal(&shifted)
    }

    /// Structural isomorphism of the reachable parts, for minimized machines
    /// the same thing as language equality.
    pub fn isomorphic(&self, other: &Automaton) -> bool {
        if self.sig != other.sig {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.accepting == b.accepting && a.det_table() == b.det_table()
    }
}

/// A deterministic finite automaton with an integer output per state
/// (a Moore machine). The transition table is total; illegal inputs are
/// conventionally routed to a sink whose output is `-1`.
#[derive(Clone, Debug)]
pub struct Dfao {
    sig: TrackSignature,
    initial: StateId,
    outputs: Vec<i64>,
    table: Vec<StateId>,
}

/// Output of the sink reached by illegal representations.
pub const DEAD_OUTPUT: i64 = -1;

impl Dfao {
    pub fn new(
        sig: TrackSignature,
        initial: StateId,
        outputs: Vec<i64>,
        table: Vec<StateId>,
    ) -> Result<Dfao, AutomatonError> {
        let n = outputs.len();
        let nsyms = sig.symbol_count() as usize;
        if table.len() != n * nsyms {
            return Err(AutomatonError::BadTableLength {
                expected: n * nsyms,
                got: table.len(),
            });
        }
        for &t in &table {
            if t as usize >= n {
                return Err(AutomatonError::StateOutOfRange(t));
            }
        }
        if initial as usize >= n {
            return Err(AutomatonError::StateOutOfRange(initial));
        }
        Ok(Dfao {
            sig,
            initial,
            outputs,
            table,
        })
    }

    pub fn signature(&self) -> TrackSignature {
        self.sig
    }

    pub fn num_states(&self) -> usize {
        self.outputs.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn output(&self, q: StateId) -> i64 {
        self.outputs[q as usize]
    }

    pub fn outputs(&self) -> &[i64] {
        &self.outputs
    }

    pub fn next(&self, q: StateId, sym: Symbol) -> StateId {
        self.table[q as usize * self.sig.symbol_count() as usize + sym as usize]
    }

    pub fn table(&self) -> &[StateId] {
        &self.table
    }

    /// Output of the state reached from the initial state; the empty word
    /// evaluates to the initial state's output.
    pub fn eval_word(&self, word: &[Symbol]) -> i64 {
        let mut q = self.initial;
        for &s in word {
            q = self.next(q, s);
        }
        self.outputs[q as usize]
    }

    /// Breadth-first relabel, dropping unreachable states.
    pub fn canonicalize(&self) -> Dfao {
        let nsyms = self.sig.symbol_count() as usize;
        let mut order = vec![self.initial];
        let mut new_id: HashMap<StateId, StateId> = HashMap::new();
        new_id.insert(self.initial, 0);
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for s in 0..nsyms as Symbol {
                let t = self.next(q, s);
                if !new_id.contains_key(&t) {
                    new_id.insert(t, order.len() as StateId);
                    order.push(t);
                }
            }
            i += 1;
        }
        let mut table = Vec::with_capacity(order.len() * nsyms);
        let mut outputs = Vec::with_capacity(order.len());
        for &q in &order {
            outputs.push(self.outputs[q as usize]);
            for s in 0..nsyms as Symbol {
                table.push(new_id[&self.next(q, s)]);
            }
        }
        Dfao {
            sig: self.sig,
            initial: 0,
            outputs,
            table,
        }
    }

    /// Minimal Moore machine computing the same output function.
    pub fn minimize(&self) -> Dfao {
        let reach = self.canonicalize();
        // dense class ids per distinct output, in output order
        let mut classes: Vec<i64> = reach.outputs.clone();
        classes.sort_unstable();
        classes.dedup();
        let init_class: Vec<u32> = reach
            .outputs
            .iter()
            .map(|o| classes.binary_search(o).unwrap() as u32)
            .collect();
        let (class_of, nclasses) = refine_partition(
            reach.num_states(),
            reach.sig.symbol_count() as usize,
            &reach.table,
            &init_class,
        );
        let nsyms = reach.sig.symbol_count() as usize;
        let mut table = vec![0 as StateId; nclasses * nsyms];
        let mut outputs = vec![0i64; nclasses];
        let mut seen = vec![false; nclasses];
        for q in 0..reach.num_states() {
            let c = class_of[q] as usize;
            if !seen[c] {
                seen[c] = true;
                outputs[c] = reach.outputs[q];
                for s in 0..nsyms {
                    table[c * nsyms + s] = class_of[reach.table[q * nsyms + s] as usize];
                }
            }
        }
        Dfao {
            sig: reach.sig,
            initial: class_of[reach.initial as usize],
            outputs,
            table,
        }
        .canonicalize()
    }

    pub fn isomorphic(&self, other: &Dfao) -> bool {
        if self.sig != other.sig {
            return false;
        }
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.outputs == b.outputs && a.table == b.table
    }

    /// Plain automaton accepting exactly the words whose output is `value`.
    pub fn accept_set(&self, value: i64) -> Automaton {
        Automaton {
            sig: self.sig,
            initials: vec![self.initial],
            accepting: self.outputs.iter().map(|&o| o == value).collect(),
            delta: Delta::Det(self.table.clone()),
        }
    }

    /// Distinct outputs over reachable states.
    pub fn reachable_outputs(&self) -> Vec<i64> {
        let c = self.canonicalize();
        let mut outs = c.outputs;
        outs.sort_unstable();
        outs.dedup();
        outs
    }
}

/// Partition refinement (Hopcroft) on a complete deterministic transition
/// table, starting from the given state classes. Returns the class of every
/// state and the number of classes.
pub(crate) fn refine_partition(
    n: usize,
    nsyms: usize,
    table: &[StateId],
    init_class: &[u32],
) -> (Vec<u32>, usize) {
    if n == 0 {
        return (Vec::new(), 0);
    }
    // inverse transitions, CSR per symbol
    let mut pred_count = vec![0u32; n * nsyms];
    for q in 0..n {
        for s in 0..nsyms {
            pred_count[table[q * nsyms + s] as usize * nsyms + s] += 1;
        }
    }
    let mut pred_offset = vec![0u32; n * nsyms + 1];
    for i in 0..n * nsyms {
        pred_offset[i + 1] = pred_offset[i] + pred_count[i];
    }
    let mut preds = vec![0 as StateId; n * nsyms];
    let mut fill = pred_offset.clone();
    for q in 0..n {
        for s in 0..nsyms {
            let slot = table[q * nsyms + s] as usize * nsyms + s;
            preds[fill[slot] as usize] = q as StateId;
            fill[slot] += 1;
        }
    }

    // partition structure
    let nclasses0 = (init_class.iter().copied().max().unwrap_or(0) + 1) as usize;
    let mut elems: Vec<StateId> = (0..n as StateId).collect();
    elems.sort_by_key(|&q| init_class[q as usize]);
    let mut pos = vec![0u32; n];
    for (i, &q) in elems.iter().enumerate() {
        pos[q as usize] = i as u32;
    }
    struct Block {
        start: u32,
        end: u32,
        mid: u32,
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut block_of = vec![0u32; n];
    {
        let mut i = 0usize;
        while i < n {
            let c = init_class[elems[i] as usize];
            let start = i;
            while i < n && init_class[elems[i] as usize] == c {
                block_of[elems[i] as usize] = blocks.len() as u32;
                i += 1;
            }
            blocks.push(Block {
                start: start as u32,
                end: i as u32,
                mid: start as u32,
            });
        }
    }
    debug_assert!(blocks.len() <= nclasses0.max(blocks.len()));

    let mut in_work = vec![false; n * nsyms]; // indexed block * nsyms + sym, blocks <= n
    let mut work: std::collections::VecDeque<(u32, u32)> = std::collections::VecDeque::new();
    for b in 0..blocks.len() as u32 {
        for s in 0..nsyms as u32 {
            in_work[b as usize * nsyms + s as usize] = true;
            work.push_back((b, s));
        }
    }

    let mut touched: Vec<u32> = Vec::new();
    while let Some((b, s)) = work.pop_front() {
        in_work[b as usize * nsyms + s as usize] = false;
        // snapshot of splitter contents
        let splitter: Vec<StateId> =
            elems[blocks[b as usize].start as usize..blocks[b as usize].end as usize].to_vec();
        touched.clear();
        for &q in &splitter {
            let base = q as usize * nsyms + s as usize;
            for k in pred_offset[base]..pred_offset[base + 1] {
                let p = preds[k as usize];
                let pb = block_of[p as usize];
                let blk = &mut blocks[pb as usize];
                let pp = pos[p as usize];
                if pp < blk.mid {
                    continue; // already marked
                }
                if blk.mid == blk.start {
                    touched.push(pb);
                }
                // swap p into the marked zone
                let other = elems[blk.mid as usize];
                elems[blk.mid as usize] = p;
                elems[pp as usize] = other;
                pos[p as usize] = blk.mid;
                pos[other as usize] = pp;
                blk.mid += 1;
            }
        }
        for &tb in &touched {
            let (start, end, mid) = {
                let blk = &blocks[tb as usize];
                (blk.start, blk.end, blk.mid)
            };
            if mid == end {
                blocks[tb as usize].mid = start;
                continue; // fully marked, no split
            }
            // new block takes the marked zone [start, mid)
            let nb = blocks.len() as u32;
            blocks.push(Block {
                start,
                end: mid,
                mid: start,
            });
            blocks[tb as usize].start = mid;
            blocks[tb as usize].mid = mid;
            for i in start..mid {
                block_of[elems[i as usize] as usize] = nb;
            }
            let small = if mid - start <= end - mid { nb } else { tb };
            for t in 0..nsyms as u32 {
                let idx = tb as usize * nsyms + t as usize;
                if in_work[idx] {
                    // splitter already queued: queue the new part as well
                    in_work[nb as usize * nsyms + t as usize] = true;
                    work.push_back((nb, t));
                } else {
                    let idx_small = small as usize * nsyms + t as usize;
                    if !in_work[idx_small] {
                        in_work[idx_small] = true;
                        work.push_back((small, t));
                    }
                }
            }
        }
    }

    let nclasses = blocks.len();
    (block_of, nclasses)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(k: u32) -> TrackSignature {
        TrackSignature::new(k)
    }

    /// 1-track automaton accepting words containing at least one 1.
    fn contains_one() -> Automaton {
        Automaton::dfa(sig(1), 0, vec![false, true], vec![0, 1, 1, 1]).unwrap()
    }

    #[test]
    fn determinize_two_initials_accepting_empty() {
        // Two initial states, both accepting, no transitions that accept more.
        let nfa =
            Automaton::nfa(sig(1), 3, vec![0, 1], vec![0, 1], &[(0, 0, 2), (1, 1, 2)]).unwrap();
        let dfa = nfa.determinize();
        assert!(dfa.is_deterministic());
        assert!(dfa.accepts(&[]));
        assert!(!dfa.accepts(&[0]));
        assert!(!dfa.accepts(&[1]));
    }

    #[test]
    fn determinize_is_identity_on_dfas() {
        let a = contains_one();
        let d = a.determinize();
        assert!(a.language_equal(&d).unwrap());
    }

    #[test]
    fn determinize_some_column_equals_one() {
        // NFA guessing the position of a 1: q0 loops on both, jumps to q1 on 1.
        let nfa = Automaton::nfa(
            sig(1),
            2,
            vec![0],
            vec![1],
            &[(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 0, 1), (1, 1, 1)],
        )
        .unwrap();
        let dfa = nfa.determinize().minimize().unwrap();
        assert_eq!(dfa.num_states(), 2);
        assert!(dfa.language_equal(&contains_one()).unwrap());
    }

    #[test]
    fn minimize_idempotent() {
        let a = contains_one().product(&contains_one(), BoolOp::Or).unwrap();
        let m1 = a.minimize().unwrap();
        let m2 = m1.minimize().unwrap();
        assert!(m1.isomorphic(&m2));
    }

    #[test]
    fn minimize_all_accepting_is_one_state() {
        let big =
            Automaton::dfa(sig(1), 0, vec![true, true, true], vec![1, 2, 2, 0, 0, 1]).unwrap();
        assert_eq!(big.minimize().unwrap().num_states(), 1);
    }

    #[test]
    fn product_self_and_complement() {
        let a = contains_one();
        assert!(a
            .product(&a, BoolOp::And)
            .unwrap()
            .language_equal(&a)
            .unwrap());
        let never = a.product(&a.complement().unwrap(), BoolOp::And).unwrap();
        assert!(never.is_language_empty());
    }

    #[test]
    fn complement_involution() {
        let a = contains_one();
        assert!(a
            .complement()
            .unwrap()
            .complement()
            .unwrap()
            .language_equal(&a)
            .unwrap());
        let empty = Automaton::empty(sig(1));
        let full = empty.complement().unwrap();
        assert!(full.accepts(&[]));
        assert!(full.accepts(&[0, 1, 0]));
    }

    #[test]
    fn product_signature_mismatch_rejected() {
        let a = contains_one();
        let b = Automaton::all(sig(2));
        assert!(matches!(
            a.product(&b, BoolOp::And),
            Err(AutomatonError::SignatureMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn project_single_track_of_nonempty() {
        // zero-prefix invariant input: projecting the only track of a
        // nonempty invariant language gives the all-accepting sentence
        let projected = contains_one()
            .project(0)
            .unwrap()
            .determinize()
            .minimize()
            .unwrap();
        assert!(projected.language_equal(&Automaton::all(sig(0))).unwrap());

        // non-invariant input: saturation additionally strips leading zeros,
        // so "exactly length 2" projects to lengths {0, 1, 2}
        let len2 = Automaton::dfa(
            sig(1),
            0,
            vec![false, false, true, false],
            vec![1, 1, 2, 2, 3, 3, 3, 3],
        )
        .unwrap();
        let projected = len2.project(0).unwrap().determinize().minimize().unwrap();
        assert!(projected.accepts(&[0, 0]));
        assert!(projected.accepts(&[0]));
        assert!(projected.accepts(&[]));
        assert!(!projected.accepts(&[0, 0, 0]));
    }

    #[test]
    fn reorder_identity_and_swap() {
        // 2 tracks: accept words whose first column is (1,0)
        let a = Automaton::dfa(
            sig(2),
            0,
            vec![false, true, false],
            vec![2, 1, 2, 2, 1, 1, 1, 1, 2, 2, 2, 2],
        )
        .unwrap();
        let same = a.reorder_tracks(&[0, 1]).unwrap();
        assert!(a.language_equal(&same).unwrap());
        let swapped = a.reorder_tracks(&[1, 0]).unwrap();
        assert!(swapped.accepts(&[2])); // column (0,1) in swapped order
        assert!(!swapped.accepts(&[1]));
    }

    #[test]
    fn reorder_duplicate_constrains_equality() {
        let all = Automaton::all(sig(1));
        let diag = all.reorder_tracks(&[0, 0]).unwrap();
        assert!(diag.accepts(&[0, 3, 0])); // columns (0,0),(1,1),(0,0)
        assert!(!diag.accepts(&[1]));
        assert!(!diag.accepts(&[2]));
        assert!(diag.accepts(&[]));
    }

    #[test]
    fn reorder_must_cover_sources() {
        let a = Automaton::all(sig(2));
        assert!(matches!(
            a.reorder_tracks(&[0, 0]),
            Err(AutomatonError::TrackUnused { track: 1 })
        ));
        assert!(matches!(
            a.reorder_tracks(&[0, 3]),
            Err(AutomatonError::TrackOutOfRange { track: 3, .. })
        ));
    }

    #[test]
    fn shortest_and_enumerate() {
        let a = contains_one();
        assert_eq!(a.shortest_accepted(), Some(vec![1]));
        let words = a.enumerate(2);
        assert_eq!(words, vec![vec![1], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let empty = Automaton::empty(sig(1));
        assert!(empty.is_language_empty());
        assert_eq!(empty.shortest_accepted(), None);
    }

    #[test]
    fn infinite_language_detection() {
        assert!(contains_one().accepts_infinitely_many());
        // exactly one word accepted
        let single =
            Automaton::dfa(sig(1), 0, vec![false, true, false], vec![2, 1, 2, 2, 2, 2]).unwrap();
        assert!(!single.accepts_infinitely_many());
        assert_eq!(single.enumerate(5), vec![vec![1]]);
    }

    #[test]
    fn isomorphism_on_minimal_machines() {
        let a = contains_one();
        assert!(a.isomorphic(&a));
        // same language built differently
        let b = Automaton::nfa(
            sig(1),
            3,
            vec![0],
            vec![2],
            &[
                (0, 0, 0),
                (0, 1, 0),
                (0, 1, 1),
                (1, 0, 2),
                (1, 1, 2),
                (0, 1, 2),
                (2, 0, 2),
                (2, 1, 2),
            ],
        )
        .unwrap()
        .determinize()
        .minimize()
        .unwrap();
        // b accepts "words with a 1 somewhere" as well? q0 loops, guesses 1 then anything.
        // Its minimal DFA must equal contains_one's.
        assert!(b.isomorphic(&a.minimize().unwrap()));
    }

    #[test]
    fn zero_prefix_invariance_check() {
        // "contains a one" is zero-prefix invariant
        assert!(contains_one().zero_prefix_invariant().unwrap());
        // "starts with 1" is not
        let starts =
            Automaton::dfa(sig(1), 0, vec![false, true, false], vec![2, 1, 1, 1, 2, 2]).unwrap();
        assert!(!starts.zero_prefix_invariant().unwrap());
    }
}
