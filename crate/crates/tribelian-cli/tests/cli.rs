//! End-to-end exercise of the binary against a fresh cache directory.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tribelian"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn cli_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cache");

    // commands needing the cache fail cleanly before a build
    let premature = run(&dir, &["eval", "rho", "1"]);
    assert!(!premature.status.success());

    // build
    let build = run(&dir, &["build"]);
    assert!(build.status.success(), "{}", stdout(&build));
    let manifest_text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest_text).unwrap();
    let artifacts = manifest["artifacts"].as_object().unwrap();
    assert!(artifacts.len() >= 20, "only {} artifacts", artifacts.len());
    for key in ["TRAS", "TRAC", "rst", "tribfac0", "subseteq", "missing"] {
        assert!(artifacts.contains_key(key), "{key} missing from manifest");
    }

    // idempotent second run
    let again = run(&dir, &["build"]);
    assert!(again.status.success());
    assert!(stdout(&again).contains("up to date"));

    // corrupting one artifact forces a rebuild that restores it
    let victim = dir.join("tribsync0.txt");
    let original = std::fs::read_to_string(&victim).unwrap();
    std::fs::write(&victim, "garbage\n").unwrap();
    let rebuilt = run(&dir, &["build"]);
    assert!(rebuilt.status.success());
    assert!(stdout(&rebuilt).contains("rebuilding"));
    assert_eq!(std::fs::read_to_string(&victim).unwrap(), original);

    // evaluations
    let rho1 = run(&dir, &["eval", "rho", "1"]);
    assert_eq!(stdout(&rho1).trim(), "3");
    let rho0 = run(&dir, &["eval", "rho", "0"]);
    assert_eq!(stdout(&rho0).trim(), "1");
    let set4 = run(&dir, &["eval", "set", "4"]);
    assert_eq!(stdout(&set4).trim(), "{(0,0,0),(0,1,-1),(1,0,-1)}");
    let tau = run(&dir, &["eval", "tau1", "3914"]);
    assert_eq!(stdout(&tau).trim(), "3914");

    // verification sweep (small), with the counted-values table
    let csv_path = tmp.path().join("counts.csv");
    let verify = run(
        &dir,
        &[
            "verify",
            "--max-n",
            "3000",
            "--csv",
            csv_path.to_str().unwrap(),
        ],
    );
    assert!(verify.status.success(), "{}", stdout(&verify));
    assert!(stdout(&verify).contains("mismatches: 0"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,complexity,subset_id"));
    assert_eq!(lines.next(), Some("0,1,0"));
    assert_eq!(csv.lines().count(), 3002);
    assert!(csv.lines().any(|l| l == "4,3,4"), "row for n=4");
    assert!(csv.lines().any(|l| l == "1201,6,1201"), "row for n=1201");

    // queries: a sentence, a contradiction, and a wrapped command line
    let truth = run(&dir, &["query", "?msd_trib An Em (m>n) & TRAC[m]=@4"]);
    assert_eq!(stdout(&truth).trim(), "true");
    let falsity = run(&dir, &["query", "En n=n+1"]);
    assert_eq!(stdout(&falsity).trim(), "false");
    let wrapped = run(
        &dir,
        &[
            "query",
            "eval test4 \"?msd_trib An Em (m>n) & TRAC[m]=@4\":",
        ],
    );
    assert_eq!(stdout(&wrapped).trim(), "true");
    let bad = run(&dir, &["query", "x = ("]);
    assert_eq!(bad.status.code(), Some(2));

    // a relation query prints a summary with witnesses
    let rel = run(&dir, &["query", "$rst(m,n) & m=12"]);
    let text = stdout(&rel);
    assert!(text.contains("free variables: (m, n)"), "{text}");
    assert!(text.contains("(12, 6)"), "{text}");

    // the cached `missing` machine names the final discovered index
    let missing = run(&dir, &["query", "$missing(n)"]);
    let text = stdout(&missing);
    assert!(text.contains("(3914)"), "{text}");

    // exports
    let exp_dir = tmp.path().join("exports");
    std::fs::create_dir_all(&exp_dir).unwrap();
    let walnut_path = exp_dir.join("TRAC.txt");
    let exp = run(
        &dir,
        &[
            "export",
            "TRAC",
            "--format",
            "walnut",
            "--out",
            walnut_path.to_str().unwrap(),
        ],
    );
    assert!(exp.status.success());
    let reparsed = tribelian::walnut::parse(&std::fs::read_to_string(&walnut_path).unwrap())
        .unwrap()
        .to_dfao()
        .unwrap();
    assert_eq!(reparsed.num_states(), 78);

    let dot_path = exp_dir.join("TRL.dot");
    run(
        &dir,
        &[
            "export",
            "TRL",
            "--format",
            "dot",
            "--out",
            dot_path.to_str().unwrap(),
        ],
    );
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("->"));

    let json_path = exp_dir.join("subseteq.json");
    run(
        &dir,
        &[
            "export",
            "subseteq",
            "--format",
            "json",
            "--out",
            json_path.to_str().unwrap(),
        ],
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["states"], 5251);

    let unknown = run(&dir, &["export", "nosuch"]);
    assert_eq!(unknown.status.code(), Some(2));

    // stats table
    let stats = run(&dir, &["stats"]);
    let table = stdout(&stats);
    assert!(table.contains("tribfac0"));
    assert!(table.contains("239"));
    assert!(table.contains("406"));
    assert!(table.contains("5251"));
    assert!(!table.contains("differs"), "{table}");
    let trac_row = table.lines().find(|l| l.starts_with("TRAC")).unwrap();
    assert!(trac_row.contains("78"), "{trac_row}");

    // byte-identical round trip for every cached artifact
    for (name, entry) in artifacts {
        let file = dir.join(entry["file"].as_str().unwrap());
        let text = std::fs::read_to_string(&file).unwrap();
        let parsed = tribelian::walnut::parse(&text).unwrap();
        let re_serialized = match entry["kind"].as_str().unwrap() {
            "dfao" => tribelian::walnut::serialize_dfao(&parsed.to_dfao().unwrap()),
            _ => tribelian::walnut::serialize_automaton(&parsed.to_automaton().unwrap()),
        };
        assert_eq!(re_serialized, text, "round trip of {name}");
    }
}

#[test]
fn rebuild_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    assert!(run(&dir_a, &["build"]).status.success());
    assert!(run(&dir_b, &["build"]).status.success());
    let manifest_a = std::fs::read_to_string(dir_a.join("manifest.json")).unwrap();
    let manifest_b = std::fs::read_to_string(dir_b.join("manifest.json")).unwrap();
    assert_eq!(manifest_a, manifest_b);
}
