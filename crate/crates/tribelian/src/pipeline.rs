//! The end-to-end construction: synchronized Parikh automata for `TR`,
//! factor-count relations, coordinate ranges of the relative Parikh vectors,
//! the nine triple predicates, subset discovery, and the final two DFAOs.
//!
//! Stage by stage:
//!
//! 1. `tribsync{a}(n, s)`: `s = |TR[0..n-1]|_a`, from the right-shift
//!    relation and the last-digit automaton.
//! 2. `tribfac{a}(i, n, s)`: `s = |TR[i..i+n-1]|_a`, by subtracting prefix
//!    counts under two universal quantifiers.
//! 3. `posrange{a}` / `negrange{a}`: the attainable positive and negative
//!    excursions of each coordinate of `f(i,n)`.
//! 4. `validtriples(s, t, u)`: the range of `f(i,n) + (1,1,1)`, which must
//!    consist of exactly nine triples.
//! 5. One predicate per triple (`t000` through `tm1m12`), their occurrence
//!    projections, and the subset-equality relation `subseteq(m, n)`.
//! 6. Iterative discovery of the realized subsets, and assembly of the two
//!    output DFAOs `TRAS` (least equivalent index) and `TRAC` (abelian
//!    complexity) from the direct product of the occurrence automata.

use std::collections::BTreeSet;

use crate::automata::{Dfao, StateId, Symbol, TrackSignature, DEAD_OUTPUT};
use crate::numeration::encode_values;
use crate::oracle::RelativeVector;
use crate::relations::{dfao_eq, Relation, RelationContext, RelationError};
use crate::worddfao::{build_tr, build_trl, eval};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error("{relation} is not a function of {input}")]
    NotFunctional {
        relation: String,
        input: &'static str,
    },
    #[error("coordinate range of letter {letter} did not stabilize to a finite set")]
    UnboundedRange { letter: u8 },
    #[error("triple enumeration produced {got} triples (bound {bound})")]
    TooManyTriples { got: usize, bound: usize },
    #[error("expected exactly nine triples, found {got}: {triples:?}")]
    WrongTripleCount {
        got: usize,
        triples: Vec<RelativeVector>,
    },
    #[error("subset discovery exceeded {0} iterations")]
    TooManyIterations(usize),
    #[error("reachable product state carries subset {mask:#011b} which is not in the class table")]
    UnknownSubset { mask: u16 },
    #[error("discovered subset at n={0} does not contain the zero vector")]
    MissingZeroVector(u64),
}

fn stage(name: &'static str, e: PipelineError) -> PipelineError {
    PipelineError::Stage {
        stage: name,
        source: Box::new(e),
    }
}

/// The nine relative Parikh vectors realized by `TR`, in lexicographic
/// order. Bit `i` of a [`SubsetOfA`] refers to `vectors()[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeSetA {
    vectors: Vec<RelativeVector>,
}

impl RangeSetA {
    pub fn from_vectors(set: &BTreeSet<RelativeVector>) -> Result<RangeSetA, PipelineError> {
        if set.len() != 9 {
            return Err(PipelineError::WrongTripleCount {
                got: set.len(),
                triples: set.iter().copied().collect(),
            });
        }
        let vectors: Vec<RelativeVector> = set.iter().copied().collect();
        Ok(RangeSetA { vectors })
    }

    pub fn vectors(&self) -> &[RelativeVector] {
        &self.vectors
    }

    pub fn index_of(&self, v: RelativeVector) -> Option<usize> {
        self.vectors.iter().position(|&x| x == v)
    }

    pub fn zero_index(&self) -> usize {
        self.index_of(RelativeVector::ZERO)
            .expect("zero vector is always realized")
    }
}

/// A subset of the nine-element range set, as a 9-bit mask over the
/// lexicographic order of [`RangeSetA`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetOfA(pub u16);

impl SubsetOfA {
    pub fn contains(&self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    pub fn cardinality(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn vectors(&self, range: &RangeSetA) -> Vec<RelativeVector> {
        (0..9)
            .filter(|&i| self.contains(i))
            .map(|i| range.vectors()[i])
            .collect()
    }

    pub fn from_vectors(range: &RangeSetA, set: &BTreeSet<RelativeVector>) -> Option<SubsetOfA> {
        let mut mask = 0u16;
        for &v in set {
            mask |= 1 << range.index_of(v)?;
        }
        Some(SubsetOfA(mask))
    }
}

/// One discovered equivalence class: the least `n` realizing the subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassRow {
    pub min_index: u64,
    pub subset: SubsetOfA,
    pub cardinality: u32,
}

/// All classes, ordered by increasing minimal index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTable {
    pub rows: Vec<ClassRow>,
}

impl ClassTable {
    pub fn find_subset(&self, subset: SubsetOfA) -> Option<&ClassRow> {
        self.rows.iter().find(|r| r.subset == subset)
    }

    pub fn find_min_index(&self, min_index: u64) -> Option<&ClassRow> {
        self.rows.iter().find(|r| r.min_index == min_index)
    }

    pub fn min_indices(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.min_index).collect()
    }
}

/// Attainable excursions of one coordinate of `f(i,n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordinateRange {
    pub positive: u64,
    pub negative: u64,
}

/// A named build product: either a relation or a word automaton.
#[derive(Clone, Debug)]
pub enum Artifact {
    Relation(Relation),
    Word(Dfao),
}

/// Everything the build produces, in build order.
pub struct Artifacts {
    entries: Vec<(String, Artifact)>,
    pub range_set: RangeSetA,
    pub ranges: [CoordinateRange; 3],
    pub class_table: ClassTable,
}

impl Artifacts {
    /// Reassembles a set of artifacts from externally stored parts, e.g. a
    /// deserialized cache directory.
    pub fn from_parts(
        entries: Vec<(String, Artifact)>,
        range_set: RangeSetA,
        ranges: [CoordinateRange; 3],
        class_table: ClassTable,
    ) -> Artifacts {
        Artifacts {
            entries,
            range_set,
            ranges,
            class_table,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Artifact)> {
        self.entries.iter().map(|(n, a)| (n.as_str(), a))
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Artifact> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        match self.get(name) {
            Some(Artifact::Relation(r)) => Some(r),
            _ => None,
        }
    }

    pub fn word(&self, name: &str) -> Option<&Dfao> {
        match self.get(name) {
            Some(Artifact::Word(d)) => Some(d),
            _ => None,
        }
    }

    /// Query environment over all named artifacts. `subseteq` is also bound
    /// as `$subset`; callers use the two names interchangeably.
    pub fn query_env(&self) -> crate::formula::QueryEnv {
        let mut env = crate::formula::QueryEnv::new();
        for (name, artifact) in &self.entries {
            match artifact {
                Artifact::Relation(r) => {
                    env.relations.insert(name.clone(), r.clone());
                }
                Artifact::Word(w) => {
                    env.words.insert(name, w.clone());
                }
            }
        }
        if let Some(r) = self.relation("subseteq") {
            env.relations.insert("subset".to_string(), r.clone());
        }
        env
    }

    /// Per-artifact state counts: the complete automaton, and with rejecting
    /// sinks excluded. The reference counts follow the trim convention for
    /// relations and the complete convention for the output DFAOs.
    pub fn stats(&self) -> Vec<ArtifactStat> {
        self.entries
            .iter()
            .map(|(name, artifact)| {
                let (complete, trim, kind) = match artifact {
                    Artifact::Relation(r) => (
                        r.automaton().num_states(),
                        r.automaton().trim_state_count(),
                        "relation",
                    ),
                    Artifact::Word(w) => {
                        let dead = w
                            .outputs()
                            .iter()
                            .enumerate()
                            .filter(|&(q, &o)| {
                                o == DEAD_OUTPUT
                                    && (0..w.signature().symbol_count())
                                        .all(|s| w.next(q as StateId, s) == q as StateId)
                            })
                            .count();
                        (w.num_states(), w.num_states() - dead, "dfao")
                    }
                };
                ArtifactStat {
                    name: name.clone(),
                    kind,
                    states_complete: complete,
                    states_trim: trim,
                    expected_trim: expected_trim_count(name),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ArtifactStat {
    pub name: String,
    pub kind: &'static str,
    pub states_complete: usize,
    pub states_trim: usize,
    pub expected_trim: Option<usize>,
}

const VECTOR_NAME_SUFFIXES: [&str; 9] = [
    "m1m12", "m101", "m110", "m12m1", "0m11", "000", "01m1", "1m10", "10m1",
];

/// Reference state counts for these constructions, under the trim
/// convention (rejecting sink excluded).
pub fn expected_trim_count(name: &str) -> Option<usize> {
    match name {
        "tribfac0" => Some(239),
        "tribfac1" => Some(283),
        "tribfac2" => Some(406),
        "tribsyncall" => Some(31),
        "subseteq" => Some(5251),
        _ => VECTOR_NAME_SUFFIXES
            .iter()
            .any(|s| name == format!("t{s}"))
            .then_some(101),
    }
}

/// `(1,0,-1)` names as `10m1` (`m` marks a minus sign).
pub fn vector_name(v: RelativeVector) -> String {
    let part = |c: i64| match c {
        -1 => "m1".to_string(),
        c => c.to_string(),
    };
    format!("{}{}{}", part(v.0), part(v.1), part(v.2))
}

/// Runs the whole construction.
pub fn build() -> Result<Artifacts, PipelineError> {
    build_with_progress(|_| {})
}

/// Runs the whole construction, reporting stage names as they start.
pub fn build_with_progress(mut progress: impl FnMut(&str)) -> Result<Artifacts, PipelineError> {
    let mut entries: Vec<(String, Artifact)> = Vec::new();

    progress("base relations");
    let ctx = RelationContext::new().map_err(|e| stage("base relations", e.into()))?;
    let trl = build_trl();
    let tr = build_tr();
    let rst = Relation::lift(crate::numeration::shift_rel(), &["m", "n"])
        .map_err(|e| stage("base relations", e.into()))?;
    entries.push((
        "addition".into(),
        Artifact::Relation(
            Relation::lift(ctx.adder().clone(), &["x", "y", "z"])
                .map_err(|e| stage("base relations", e.into()))?,
        ),
    ));
    entries.push(("rst".into(), Artifact::Relation(rst.clone())));
    entries.push(("TRL".into(), Artifact::Word(trl.clone())));
    entries.push(("TR".into(), Artifact::Word(tr.clone())));

    let mut syncs = Vec::new();
    for letter in 0..3u8 {
        let name = format!("tribsync{letter}");
        progress(&name);
        let sync = build_tribsync(&ctx, &rst, &trl, letter).map_err(|e| stage("tribsync", e))?;
        if !ctx
            .check_functional(&sync, "n", "s")
            .map_err(|e| stage("tribsync", e.into()))?
        {
            return Err(stage(
                "tribsync",
                PipelineError::NotFunctional {
                    relation: name,
                    input: "n",
                },
            ));
        }
        entries.push((name, Artifact::Relation(sync.clone())));
        syncs.push(sync);
    }

    progress("tribsyncall");
    let combined = build_sync_combined(&syncs).map_err(|e| stage("tribsyncall", e))?;
    entries.push(("tribsyncall".into(), Artifact::Relation(combined)));

    let mut facs = Vec::new();
    for letter in 0..3u8 {
        let name = format!("tribfac{letter}");
        progress(&name);
        let fac = build_tribfac(&ctx, &syncs[letter as usize]).map_err(|e| stage("tribfac", e))?;
        entries.push((name, Artifact::Relation(fac.clone())));
        facs.push(fac);
    }

    // base pair per letter: fac(i,n,x) & fac(0,n,y), shared by the range
    // computation, the triple enumeration and the predicates
    progress("ranges");
    let mut base_pairs = Vec::new();
    for fac in &facs {
        base_pairs.push(build_base_pair(&ctx, fac).map_err(|e| stage("ranges", e))?);
    }
    let mut range_list = Vec::new();
    for letter in 0..3u8 {
        let (pos_rel, neg_rel, range) = compute_range(&ctx, &base_pairs[letter as usize], letter)
            .map_err(|e| stage("ranges", e))?;
        entries.push((format!("posrange{letter}"), Artifact::Relation(pos_rel)));
        entries.push((format!("negrange{letter}"), Artifact::Relation(neg_rel)));
        range_list.push(range);
    }
    let ranges: [CoordinateRange; 3] = [range_list[0], range_list[1], range_list[2]];

    progress("validtriples");
    let (validtriples, range_set) =
        compute_valid_triples(&ctx, &base_pairs).map_err(|e| stage("validtriples", e))?;
    entries.push(("validtriples".into(), Artifact::Relation(validtriples)));

    progress("triple predicates");
    let mut predicates = Vec::new();
    for &v in range_set.vectors() {
        let pred = build_triple_predicate(&ctx, &base_pairs, v)
            .map_err(|e| stage("triple predicates", e))?;
        entries.push((
            format!("t{}", vector_name(v)),
            Artifact::Relation(pred.clone()),
        ));
        predicates.push(pred);
    }

    progress("occurrence relations");
    let mut occurrences = Vec::new();
    for (pred, &v) in predicates.iter().zip(range_set.vectors()) {
        let occ = pred
            .exists(&["i"])
            .map_err(|e| stage("occurrence relations", e.into()))?;
        entries.push((
            format!("occ{}", vector_name(v)),
            Artifact::Relation(occ.clone()),
        ));
        occurrences.push(occ);
    }

    progress("subseteq");
    let subseteq = build_subset_equiv(&occurrences).map_err(|e| stage("subseteq", e))?;
    entries.push(("subseteq".into(), Artifact::Relation(subseteq.clone())));

    progress("subset discovery");
    let discovery = discover_subsets(&ctx, &subseteq, &occurrences, &range_set)
        .map_err(|e| stage("subset discovery", e))?;
    entries.push(("last".into(), Artifact::Relation(discovery.last_at_25)));
    entries.push((
        "missing".into(),
        Artifact::Relation(discovery.missing_at_25),
    ));
    let class_table = discovery.table;

    progress("dfao assembly");
    let (tras, trac) = assemble_dfaos(&occurrences, &class_table, &range_set)
        .map_err(|e| stage("dfao assembly", e))?;
    entries.push(("TRAS".into(), Artifact::Word(tras)));
    entries.push(("TRAC".into(), Artifact::Word(trac)));

    Ok(Artifacts {
        entries,
        range_set,
        ranges,
        class_table,
    })
}

/// `tribsync{a}(n, s)`: `s = |TR[0..n-1]|_a`.
///
/// Letter 0 uses `s = a + b` where `a` is the right shift of `n` and `b` its
/// last digit; letters 1 and 2 shift once resp. twice more.
pub fn build_tribsync(
    ctx: &RelationContext,
    rst: &Relation,
    trl: &Dfao,
    letter: u8,
) -> Result<Relation, PipelineError> {
    let last_digit_pins = |of: &str, digit_var: &str| -> Result<Relation, RelationError> {
        let zero = dfao_eq(trl, of, 0)?.implies(&ctx.rel_const(digit_var, 0)?)?;
        let one = dfao_eq(trl, of, 1)?.implies(&ctx.rel_const(digit_var, 1)?)?;
        zero.and(&one)
    };
    let shifted = |from: &str, to: &str| -> Result<Relation, RelationError> {
        rst.renamed(&[("m", from), ("n", to)])
    };
    let rel = match letter {
        0 => ctx
            .rel_sum("s", "a", "b")?
            .and(&last_digit_pins("n", "b")?)?
            .and(&shifted("n", "a")?)?
            .exists(&["a", "b"])?,
        1 => ctx
            .rel_sum("s", "b", "c")?
            .and(&last_digit_pins("a", "c")?)?
            .and(&shifted("n", "a")?)?
            .and(&shifted("a", "b")?)?
            .exists(&["a", "b", "c"])?,
        2 => ctx
            .rel_sum("s", "c", "d")?
            .and(&last_digit_pins("b", "d")?)?
            .and(&shifted("n", "a")?)?
            .and(&shifted("a", "b")?)?
            .and(&shifted("b", "c")?)?
            .exists(&["a", "b", "c", "d"])?,
        _ => unreachable!("letters are 0, 1, 2"),
    };
    Ok(rel)
}

/// The single synchronized automaton carrying all three prefix counts.
fn build_sync_combined(syncs: &[Relation]) -> Result<Relation, PipelineError> {
    let s0 = syncs[0].renamed(&[("s", "s0")])?;
    let s1 = syncs[1].renamed(&[("s", "s1")])?;
    let s2 = syncs[2].renamed(&[("s", "s2")])?;
    Ok(s0.and(&s1)?.and(&s2)?)
}

/// `tribfac{a}(i, n, s)`: for all `q`, `r`, if `q` counts the prefix of
/// length `i+n` and `r` the prefix of length `i`, then `q = r + s`.
pub fn build_tribfac(ctx: &RelationContext, sync: &Relation) -> Result<Relation, PipelineError> {
    let sync_wq = sync.renamed(&[("n", "w"), ("s", "q")])?;
    let sum_w = ctx.rel_sum("w", "i", "n")?;
    let prefix_of_sum = sum_w.and(&sync_wq)?.exists(&["w"])?; // (i, n, q)
    let sync_ir = sync.renamed(&[("n", "i"), ("s", "r")])?;
    let against = ctx.rel_sum("q", "r", "s")?.not()?;
    let violating = prefix_of_sum.and(&sync_ir)?.and(&against)?;
    let some_violation = violating.exists(&["q", "r"])?;
    Ok(some_violation.not()?)
}

/// `fac(i,n,x) & fac(0,n,y)` with variables `(i, n, x, y)`.
fn build_base_pair(ctx: &RelationContext, fac: &Relation) -> Result<Relation, PipelineError> {
    let with_x = fac.renamed(&[("s", "x")])?;
    let at_zero = ctx.substitute_const(fac, "i", 0)?; // (n, s)
    let with_y = at_zero.renamed(&[("s", "y")])?;
    Ok(with_x.and(&with_y)?)
}

/// Positive and negative excursions of one coordinate of `f(i,n)`:
/// `u` such that `u + y = x`, resp. `u + x = y`, for some factor pair.
fn compute_range(
    ctx: &RelationContext,
    base_pair: &Relation,
    letter: u8,
) -> Result<(Relation, Relation, CoordinateRange), PipelineError> {
    let pos = base_pair
        .and(&ctx.rel_sum("x", "u", "y")?)?
        .exists(&["i", "n", "x", "y"])?;
    let neg = base_pair
        .and(&ctx.rel_sum("y", "u", "x")?)?
        .exists(&["i", "n", "x", "y"])?;
    let max_of = |rel: &Relation| -> Result<u64, PipelineError> {
        let values = rel
            .finite_values()
            .ok_or(PipelineError::UnboundedRange { letter })?;
        debug_assert!(
            values.iter().any(|v| v[0] == 0),
            "u = 0 attainable at i = 0"
        );
        Ok(values.iter().map(|v| v[0]).max().unwrap_or(0))
    };
    let range = CoordinateRange {
        positive: max_of(&pos)?,
        negative: max_of(&neg)?,
    };
    Ok((pos, neg, range))
}

/// The range of `f(i,n) + (1,1,1)` as a relation over `(s, t, u)`, together
/// with the nine offset-corrected vectors.
fn compute_valid_triples(
    ctx: &RelationContext,
    base_pairs: &[Relation],
) -> Result<(Relation, RangeSetA), PipelineError> {
    let out_vars = ["s", "t", "u"];
    let mut blocks = Vec::new();
    for (letter, base) in base_pairs.iter().enumerate() {
        let out = out_vars[letter];
        // p = x + 1 and p = out + y, i.e. out = f_letter(i,n) + 1
        let conj = base
            .and(&ctx.rel_plus_const("p", "x", 1)?)?
            .and(&ctx.rel_sum("p", out, "y")?)?;
        blocks.push(conj.exists(&["p", "x", "y"])?); // (i, n, out)
    }
    let all = blocks[0].and(&blocks[1])?.and(&blocks[2])?;
    let triples = all.exists(&["i", "n"])?; // (s, t, u)
    let values = triples
        .finite_values()
        .ok_or(PipelineError::TooManyTriples {
            got: usize::MAX,
            bound: 512,
        })?;
    if values.len() > 512 {
        return Err(PipelineError::TooManyTriples {
            got: values.len(),
            bound: 512,
        });
    }
    let mut set = BTreeSet::new();
    for v in &values {
        set.insert(RelativeVector(
            v[0] as i64 - 1,
            v[1] as i64 - 1,
            v[2] as i64 - 1,
        ));
    }
    let range_set = RangeSetA::from_vectors(&set)?;
    Ok((triples, range_set))
}

/// The pairs `(i, n)` with `f(i,n) = v`.
pub fn build_triple_predicate(
    ctx: &RelationContext,
    base_pairs: &[Relation],
    v: RelativeVector,
) -> Result<Relation, PipelineError> {
    let coords = [v.0, v.1, v.2];
    let mut out: Option<Relation> = None;
    for (letter, base) in base_pairs.iter().enumerate() {
        let d = coords[letter];
        let offset = match d {
            0 => ctx.rel_eq("x", "y")?,
            d if d > 0 => ctx.rel_plus_const("x", "y", d as u64)?,
            d => ctx.rel_plus_const("y", "x", (-d) as u64)?,
        };
        let block = base.and(&offset)?.exists(&["x", "y"])?; // (i, n)
        out = Some(match out {
            None => block,
            Some(acc) => acc.and(&block)?,
        });
    }
    Ok(out.unwrap())
}

/// `subseteq(m, n)`: the nine occurrence biconditionals.
fn build_subset_equiv(occurrences: &[Relation]) -> Result<Relation, PipelineError> {
    let mut out: Option<Relation> = None;
    for occ in occurrences {
        let at_m = occ.renamed(&[("n", "m")])?;
        let both = at_m.iff(occ)?;
        out = Some(match out {
            None => both,
            Some(acc) => acc.and(&both)?,
        });
    }
    Ok(out.unwrap())
}

struct Discovery {
    table: ClassTable,
    /// `last` and `missing` as built with the first 25 representatives
    /// installed: the machines that expose the final index 3914.
    last_at_25: Relation,
    missing_at_25: Relation,
}

fn subset_at(
    occurrences: &[Relation],
    range_set: &RangeSetA,
    n: u64,
) -> Result<SubsetOfA, PipelineError> {
    let mut mask = 0u16;
    for (i, occ) in occurrences.iter().enumerate() {
        if occ.accepts_values(&[n]) {
            mask |= 1 << i;
        }
    }
    let subset = SubsetOfA(mask);
    if !subset.contains(range_set.zero_index()) {
        return Err(PipelineError::MissingZeroVector(n));
    }
    Ok(subset)
}

/// Iteratively finds the least `n` whose subset differs from everything seen
/// so far, reading the subset off the occurrence automata, until no such `n`
/// remains.
fn discover_subsets(
    ctx: &RelationContext,
    subseteq: &Relation,
    occurrences: &[Relation],
    range_set: &RangeSetA,
) -> Result<Discovery, PipelineError> {
    const MAX_ITERATIONS: usize = 512;
    let zero_subset = subset_at(occurrences, range_set, 0)?;
    let mut reps: Vec<u64> = vec![0];
    let mut rows = vec![ClassRow {
        min_index: 0,
        subset: zero_subset,
        cardinality: zero_subset.cardinality(),
    }];
    let mut known: Option<Relation> = None; // union of equiv-to-some-rep
    let mut saved: Option<(Relation, Relation)> = None;
    loop {
        if reps.len() > MAX_ITERATIONS {
            return Err(PipelineError::TooManyIterations(MAX_ITERATIONS));
        }
        let newest = *reps.last().unwrap();
        let equiv_newest = ctx.substitute_const(subseteq, "m", newest)?; // (n)
        known = Some(match known.take() {
            None => equiv_newest,
            Some(acc) => acc.or(&equiv_newest)?,
        });
        let last = known.as_ref().unwrap().not()?;
        // missing(n): last(n) and no smaller member of last
        let last_m = last.renamed(&[("n", "m")])?;
        let smaller = last_m.and(&ctx.rel_lt("m", "n")?)?.exists(&["m"])?;
        let missing = last.and(&smaller.not()?)?;
        if reps.len() == 25 {
            saved = Some((last.clone(), missing.clone()));
        }
        if last.is_empty() {
            let (last_at_25, missing_at_25) =
                saved.ok_or(PipelineError::TooManyIterations(MAX_ITERATIONS))?;
            return Ok(Discovery {
                table: ClassTable { rows },
                last_at_25,
                missing_at_25,
            });
        }
        let next = missing
            .shortest_values()
            .expect("nonempty `last` has a least element")[0];
        let subset = subset_at(occurrences, range_set, next)?;
        rows.push(ClassRow {
            min_index: next,
            subset,
            cardinality: subset.cardinality(),
        });
        reps.push(next);
    }
}

/// Direct product of the nine occurrence automata, mapped to outputs. Each
/// product state reached by valid input determines the subset `A_n`; its row
/// supplies the two outputs. Words containing `111` fall into the all-sinks
/// product state, which gets output `-1`.
fn assemble_dfaos(
    occurrences: &[Relation],
    table: &ClassTable,
    range_set: &RangeSetA,
) -> Result<(Dfao, Dfao), PipelineError> {
    let sig = TrackSignature::new(1);
    let autos: Vec<&crate::automata::Automaton> =
        occurrences.iter().map(|r| r.automaton()).collect();
    let start: Vec<StateId> = autos.iter().map(|a| a.initials()[0]).collect();
    let mut index = std::collections::HashMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0u32);
    let mut delta: Vec<StateId> = Vec::new();
    let mut tau1: Vec<i64> = Vec::new();
    let mut tau2: Vec<i64> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut mask = 0u16;
        for (k, a) in autos.iter().enumerate() {
            if a.is_accepting(cur[k]) {
                mask |= 1 << k;
            }
        }
        if mask == 0 {
            tau1.push(DEAD_OUTPUT);
            tau2.push(DEAD_OUTPUT);
        } else {
            let subset = SubsetOfA(mask);
            if !subset.contains(range_set.zero_index()) {
                return Err(PipelineError::UnknownSubset { mask });
            }
            let row = table
                .find_subset(subset)
                .ok_or(PipelineError::UnknownSubset { mask })?;
            tau1.push(row.min_index as i64);
            tau2.push(row.cardinality as i64);
        }
        for sym in 0..2 as Symbol {
            let next: Vec<StateId> = autos
                .iter()
                .zip(cur.iter())
                .map(|(a, &q)| a.next(q, sym))
                .collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = states.len() as u32;
                    index.insert(next.clone(), id);
                    states.push(next);
                    id
                }
            };
            delta.push(id);
        }
        i += 1;
    }
    let tras = Dfao::new(sig, 0, tau1, delta.clone()).expect("well-formed product");
    let trac = Dfao::new(sig, 0, tau2, delta).expect("well-formed product");
    Ok((tras.minimize(), trac.minimize()))
}

/// Whether the set `{n : eval(dfao, n) = value}` is infinite.
pub fn check_infinitude(dfao: &Dfao, value: i64) -> Result<bool, PipelineError> {
    Ok(dfao_eq(dfao, "n", value)?.has_infinitely_many_values())
}

/// Whether the class of `row` (indices with `A_n` equal to its subset) is
/// infinite, read off `TRAS`.
pub fn check_subset_infinitude(tras: &Dfao, row: &ClassRow) -> Result<bool, PipelineError> {
    check_infinitude(tras, row.min_index as i64)
}

/// Evaluates a 1-track DFAO at `n`.
pub fn eval_dfao(dfao: &Dfao, n: u64) -> i64 {
    eval(dfao, n)
}

/// The subset `A_n` as explicit vectors, read off the occurrence relations.
pub fn subset_vectors_at(artifacts: &Artifacts, n: u64) -> Vec<RelativeVector> {
    let mut out = Vec::new();
    for &v in artifacts.range_set.vectors() {
        let name = format!("occ{}", vector_name(v));
        if let Some(occ) = artifacts.relation(&name) {
            if occ.automaton().accepts(&encode_values(&[n])) {
                out.push(v);
            }
        }
    }
    out
}
