//! DOT and JSON renderings of cached artifacts.

use tribelian::automata::{Automaton, Dfao, StateId};
use tribelian::pipeline::{expected_trim_count, Artifact};

fn dot_symbol_label(tracks: u32, sym: u32) -> String {
    (0..tracks)
        .map(|t| ((sym >> t) & 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn dot_body(
    tracks: u32,
    n: usize,
    node_label: impl Fn(StateId) -> String,
    node_shape: impl Fn(StateId) -> &'static str,
    next: impl Fn(StateId, u32) -> StateId,
) -> String {
    let mut out =
        String::from("digraph automaton {\n  rankdir=LR;\n  start [shape=none, label=\"\"];\n");
    for q in 0..n as StateId {
        out.push_str(&format!(
            "  q{q} [shape={}, label=\"{}\"];\n",
            node_shape(q),
            node_label(q)
        ));
    }
    out.push_str("  start -> q0;\n");
    for q in 0..n as StateId {
        // group parallel edges by target
        let mut by_target: std::collections::BTreeMap<StateId, Vec<String>> =
            std::collections::BTreeMap::new();
        for sym in 0..(1u32 << tracks) {
            by_target
                .entry(next(q, sym))
                .or_default()
                .push(dot_symbol_label(tracks, sym));
        }
        for (target, labels) in by_target {
            out.push_str(&format!(
                "  q{q} -> q{target} [label=\"{}\"];\n",
                labels.join(" | ")
            ));
        }
    }
    out.push_str("}\n");
    out
}

pub fn automaton_dot(a: &Automaton) -> String {
    let canon = a.canonicalize();
    dot_body(
        canon.signature().tracks(),
        canon.num_states(),
        |q| format!("{q}"),
        |q| {
            if canon.is_accepting(q) {
                "doublecircle"
            } else {
                "circle"
            }
        },
        |q, s| canon.next(q, s),
    )
}

pub fn dfao_dot(d: &Dfao) -> String {
    let canon = d.canonicalize();
    dot_body(
        canon.signature().tracks(),
        canon.num_states(),
        |q| format!("{q}/{}", canon.output(q)),
        |_| "circle",
        |q, s| canon.next(q, s),
    )
}

pub fn artifact_json(name: &str, vars: &[String], artifact: &Artifact) -> serde_json::Value {
    match artifact {
        Artifact::Relation(rel) => {
            let a = rel.automaton().canonicalize();
            let tracks = a.signature().tracks();
            let nsyms = a.signature().symbol_count();
            let transitions: Vec<Vec<StateId>> = (0..a.num_states() as StateId)
                .map(|q| (0..nsyms).map(|s| a.next(q, s)).collect())
                .collect();
            serde_json::json!({
                "name": name,
                "kind": "relation",
                "vars": vars,
                "tracks": tracks,
                "states": a.trim_state_count(),
                "states_complete": a.num_states(),
                "expected_states": expected_trim_count(name),
                "initial": 0,
                "accepting": (0..a.num_states() as StateId).map(|q| a.is_accepting(q)).collect::<Vec<_>>(),
                "transitions": transitions,
            })
        }
        Artifact::Word(d) => {
            let d = d.canonicalize();
            let tracks = d.signature().tracks();
            let nsyms = d.signature().symbol_count();
            let transitions: Vec<Vec<StateId>> = (0..d.num_states() as StateId)
                .map(|q| (0..nsyms).map(|s| d.next(q, s)).collect())
                .collect();
            serde_json::json!({
                "name": name,
                "kind": "dfao",
                "vars": vars,
                "tracks": tracks,
                "states": d.num_states(),
                "initial": 0,
                "outputs": d.outputs(),
                "transitions": transitions,
            })
        }
    }
}
