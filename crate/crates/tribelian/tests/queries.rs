//! Conformance of the textual query language: the canonical textual
//! definition of every pipeline relation must compile to the same language
//! as the programmatic build.

use std::sync::OnceLock;

use tribelian::formula::{parse, run_query, QueryEnv};
use tribelian::pipeline::{self, Artifacts};
use tribelian::relations::RelationContext;

struct Setup {
    artifacts: Artifacts,
    ctx: RelationContext,
    env: QueryEnv,
}

fn setup() -> &'static Setup {
    static SETUP: OnceLock<Setup> = OnceLock::new();
    SETUP.get_or_init(|| {
        let artifacts = pipeline::build().expect("pipeline build");
        let ctx = RelationContext::new().expect("context");
        let env = artifacts.query_env();
        Setup {
            artifacts,
            ctx,
            env,
        }
    })
}

fn assert_same_language(query: &str, artifact: &str) {
    let s = setup();
    let compiled = run_query(query, &s.ctx, &s.env).expect("query compiles");
    let reference = s.artifacts.relation(artifact).expect("artifact exists");
    assert_eq!(compiled.vars(), reference.vars(), "variables of {artifact}");
    assert!(
        compiled
            .automaton()
            .language_equal(reference.automaton())
            .unwrap(),
        "{artifact} differs from its query"
    );
}

#[test]
fn tribsync_definitions() {
    assert_same_language(
        "?msd_trib Ea Eb (s=a+b) & ((TRL[n]=@0)=>b=0) & ((TRL[n]=@1)=>b=1) & $rst(n,a)",
        "tribsync0",
    );
    assert_same_language(
        "?msd_trib Ea Eb Ec (s=b+c) & ((TRL[a]=@0)=>c=0) & ((TRL[a]=@1)=>c=1) & $rst(n,a) & $rst(a,b)",
        "tribsync1",
    );
    assert_same_language(
        "?msd_trib Ea Eb Ec Ed (s=c+d) & ((TRL[b]=@0)=>d=0) & ((TRL[b]=@1)=>d=1) & $rst(n,a) & $rst(a,b) & $rst(b,c)",
        "tribsync2",
    );
}

#[test]
fn tribfac_definitions() {
    assert_same_language(
        "?msd_trib Aq Ar ($tribsync0(i+n,q) & $tribsync0(i,r)) => (q=r+s)",
        "tribfac0",
    );
    assert_same_language(
        "?msd_trib Aq Ar ($tribsync1(i+n,q) & $tribsync1(i,r)) => (q=r+s)",
        "tribfac1",
    );
}

#[test]
fn range_definitions() {
    assert_same_language(
        "?msd_trib E i,n,s,t $tribfac0(i,n,s) & $tribfac0(0,n,t) & u+t=s",
        "posrange0",
    );
    assert_same_language(
        "?msd_trib E i,n,s,t $tribfac0(i,n,s) & $tribfac0(0,n,t) & u+s=t",
        "negrange0",
    );
    assert_same_language(
        "?msd_trib E i,n,s,t $tribfac1(i,n,s) & $tribfac1(0,n,t) & u+t=s",
        "posrange1",
    );
}

#[test]
fn validtriples_definition() {
    assert_same_language(
        "?msd_trib Ei,n,a,b,c,d,e,f $tribfac0(i,n,a) & \
         $tribfac0(0,n,b) & s+b=a+1 & $tribfac1(i,n,c) & $tribfac1(0,n,d) \
         & t+d=c+1 & $tribfac2(i,n,e) & $tribfac2(0,n,f) & u+f=e+1",
        "validtriples",
    );
}

#[test]
fn triple_predicate_definitions() {
    assert_same_language(
        "?msd_trib Ea,b,c,d,e,f $tribfac0(i,n,a) & \
         $tribfac0(0,n,b) & a=b & $tribfac1(i,n,c) & $tribfac1(0,n,d) \
         & c=d & $tribfac2(i,n,e) & $tribfac2(0,n,f) & e=f",
        "t000",
    );
    assert_same_language(
        "?msd_trib Ea,b,c,d,e,f $tribfac0(i,n,a) & \
         $tribfac0(0,n,b) & a=b+1 & $tribfac1(i,n,c) & $tribfac1(0,n,d) \
         & c=d & $tribfac2(i,n,e) & $tribfac2(0,n,f) & e+1=f",
        "t10m1",
    );
    assert_same_language(
        "?msd_trib Ea,b,c,d,e,f $tribfac0(i,n,a) & \
         $tribfac0(0,n,b) & a+1=b & $tribfac1(i,n,c) & $tribfac1(0,n,d) \
         & c=d+2 & $tribfac2(i,n,e) & $tribfac2(0,n,f) & e+1=f",
        "tm12m1",
    );
}

#[test]
fn occurrence_via_query() {
    assert_same_language("?msd_trib Ei $t000(i,n)", "occ000");
    assert_same_language("?msd_trib Ei $t10m1(i,n)", "occ10m1");
}

#[test]
fn subseteq_definition() {
    assert_same_language(
        "?msd_trib ((Ei $t000(i,m)) <=> (Ej $t000(j,n))) \
         & ((Ei $t10m1(i,m)) <=> (Ej $t10m1(j,n))) & ((Ei $t1m10(i,m)) <=> (Ej $t1m10(j,n))) \
         & ((Ei $t01m1(i,m)) <=> (Ej $t01m1(j,n))) & ((Ei $tm12m1(i,m)) <=> (Ej $tm12m1(j,n))) \
         & ((Ei $tm110(i,m)) <=> (Ej $tm110(j,n))) & ((Ei $t0m11(i,m)) <=> (Ej $t0m11(j,n))) \
         & ((Ei $tm101(i,m)) <=> (Ej $tm101(j,n))) & ((Ei $tm1m12(i,m)) <=> (Ej $tm1m12(j,n)))",
        "subseteq",
    );
}

#[test]
fn last_and_missing_definitions() {
    // `$subset` is an alias of `subseteq`, the name used by these queries
    assert_same_language(
        "?msd_trib ~($subset(n,0) | $subset(n,1) | $subset(n,2) | $subset(n,3) \
         | $subset(n,4) | $subset(n,5) | $subset(n,6) | $subset(n,9) | $subset(n,11) \
         | $subset(n,17) | $subset(n,30) | $subset(n,31) | $subset(n,55) | $subset(n,57) \
         | $subset(n,101) | $subset(n,105) | $subset(n,185) | $subset(n,340) \
         | $subset(n,341) | $subset(n,342) | $subset(n,355) | $subset(n,629) \
         | $subset(n,653) | $subset(n,1157) | $subset(n,1201))",
        "last",
    );
    assert_same_language("?msd_trib $last(n) & Am (m<n) => ~$last(m)", "missing");
}

#[test]
fn infinitude_sentences() {
    let s = setup();
    for value in 3..=7 {
        let query = format!("?msd_trib An Em (m>n) & TRAC[m]=@{value}");
        let rel = run_query(&query, &s.ctx, &s.env).unwrap();
        assert!(rel.vars().is_empty(), "sentence has no free variables");
        assert!(rel.holds(), "value {value} should recur forever");
    }
    let never = run_query("?msd_trib En n=n+1", &s.ctx, &s.env).unwrap();
    assert!(!never.holds());
    let vacuous = run_query("?msd_trib An TRAC[n]=@2", &s.ctx, &s.env).unwrap();
    assert!(!vacuous.holds());
}

#[test]
fn small_formulas() {
    let s = setup();
    let all = run_query("x=x", &s.ctx, &s.env).unwrap();
    assert_eq!(all.vars(), &["x"]);
    for n in 0..50 {
        assert!(all.accepts_values(&[n]));
    }
    let chain = run_query("(x<y) & (y<z)", &s.ctx, &s.env).unwrap();
    assert!(chain.accepts_values(&[1, 2, 3]));
    assert!(!chain.accepts_values(&[1, 3, 2]));
    let shifted = run_query("$rst(12, n)", &s.ctx, &s.env).unwrap();
    assert_eq!(shifted.shortest_values(), Some(vec![6]));
}

#[test]
fn parse_errors_carry_positions() {
    assert!(parse("x =").is_err());
    assert!(parse("Ex (x=1").is_err());
    assert!(parse("?msd_fib x=1").is_err());
    let s = setup();
    let unbound = run_query("$nosuchrel(x)", &s.ctx, &s.env);
    assert!(unbound.is_err());
    let arity = run_query("$rst(x)", &s.ctx, &s.env);
    assert!(arity.is_err());
    let not_free = run_query("Ex y=y", &s.ctx, &s.env);
    assert!(not_free.is_err());
}

#[test]
fn compilation_is_deterministic() {
    let s = setup();
    let q = "?msd_trib Ea Eb (s=a+b) & ((TRL[n]=@0)=>b=0) & ((TRL[n]=@1)=>b=1) & $rst(n,a)";
    let first = run_query(q, &s.ctx, &s.env).unwrap();
    let second = run_query(q, &s.ctx, &s.env).unwrap();
    assert!(first.automaton().isomorphic(second.automaton()));
    assert_eq!(
        tribelian::walnut::serialize_automaton(first.automaton()),
        tribelian::walnut::serialize_automaton(second.automaton())
    );
}
