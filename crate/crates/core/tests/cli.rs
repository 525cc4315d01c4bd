use toposlab::cli::{main_with, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["toposlab"];
    full.extend_from_slice(args);
    let code = main_with(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("toposlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const EDGE: &str = r#"{"site": "reflexive_graph",
 "carrier": {"E": ["e", "lu", "lv"], "V": ["u", "v"]},
 "action": {"d0": {"e": "u", "lu": "u", "lv": "v"},
            "d1": {"e": "v", "lu": "u", "lv": "v"},
            "s": {"u": "lu", "v": "lv"}}}"#;

#[test]
fn sites_lists_omega_sizes_deterministically() {
    let (code, a, _) = run(&["sites"]);
    assert_eq!(code, EXIT_OK);
    let line = a.lines().find(|l| l.starts_with("reflexive_graph")).unwrap();
    assert!(line.contains("V:2"), "{line}");
    assert_eq!(a, run(&["sites"]).1);
    let (_, j, _) = run(&["sites", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    let rg = v.as_array().unwrap().iter().find(|s| s["name"] == "reflexive_graph").unwrap();
    assert_eq!(rg["omega"]["V"], 2);
    assert_eq!(rg["objects"], 2);
}

#[test]
fn uiao_on_reflexive_graphs_passes() {
    let (code, out, _) = run(&["check", "reflexive_graph", "--suite", "uiao", "--bound", "3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("uiao") && out.contains(" pass "), "{out}");
}

#[test]
fn mclarty_on_zmod2_embeds_the_swap() {
    let (code, out, _) = run(&["check", "zmod2", "--suite", "mclarty-corollary", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let verdict = &v["verdicts"][0];
    assert_eq!(verdict["status"], "pass");
    let w = verdict["witness"].as_str().unwrap();
    assert!(w.contains("finite analogue") && w.contains(r#""g": ["1", "0"]"#), "{w}");
}

#[test]
fn json_report_has_the_published_fields() {
    let (_, out, _) = run(&["check", "sets", "--suite", "tau-negation", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["bound", "seed", "verdicts", "exploration", "millis"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let verdict = &v["verdicts"][0];
    for key in ["id", "topos", "status", "bound", "millis", "instances"] {
        assert!(verdict.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn bad_site_file_is_a_parse_error_with_location() {
    let p = write_temp("badfile.json", "{\"objects\": [\n");
    let (code, _, err) = run(&["check", p.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("badfile.json:2:"), "{err}");
}

#[test]
fn site_files_are_checked() {
    let p = write_temp(
        "arrow.json",
        r#"{"objects": ["a", "b"],
            "morphisms": [{"name": "1a", "src": "a", "tgt": "a"},
                          {"name": "1b", "src": "b", "tgt": "b"},
                          {"name": "f", "src": "a", "tgt": "b"}],
            "identities": {"a": "1a", "b": "1b"}}"#,
    );
    let (code, out, err) = run(&["check", p.to_str().unwrap(), "--suite", "decidable-eq-discrete", "--bound", "2"]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    assert!(out.contains("arrow"), "{out}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["check", "sets", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&["check", "sets", "--bound", "0"]).0, EXIT_USAGE);
    assert_eq!(run(&["check", "nosuch"]).0, EXIT_USAGE);
    assert_eq!(run(&["check", "sets", "--suite", "nosuch"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["--help"]).0, EXIT_OK);
}

#[test]
fn inspect_one_edge_reflexive_graph() {
    let p = write_temp("edge.json", EDGE);
    let (code, out, _) = run(&["inspect", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["decidable"], false);
    assert_eq!(v["coreflection"]["status"], "found");
    // CX is the two loops: the discrete graph on the two vertices
    assert_eq!(v["coreflection"]["cx"]["carrier"]["V"].as_array().unwrap().len(), 2);
    assert_eq!(v["coreflection"]["cx"]["carrier"]["E"].as_array().unwrap().len(), 2);
    assert_eq!(v["sheaf"]["separated"], true);
    assert_eq!(v["sheaf"]["sheaf"], false);
    // the sheafification is codiscrete on two vertices: four edges
    assert_eq!(v["sheafification"]["sheaf"]["carrier"]["E"].as_array().unwrap().len(), 4);
    assert_eq!(v["closure"]["subobjects"], 5);
    assert_eq!(v["closure"]["dense"], 2);
    assert_eq!(v["closure"]["closed"], 4);
}

#[test]
fn inspect_initial_object() {
    for site in ["terminal", "parallel_pair", "reflexive_graph", "zmod2", "delta1"] {
        let (code, out, _) = run(&["inspect", "0", "--site", site, "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["decidable"], true, "{site}");
        assert_eq!(v["sheaf"]["sheaf"], true, "{site}");
    }
}

#[test]
fn inspect_rejects_non_functorial_tables() {
    let bad = EDGE.replace(r#""lu": "u", "lv": "v"},
            "d1""#, r#""lu": "v", "lv": "v"},
            "d1""#);
    assert_ne!(bad, EDGE);
    let (code, _, err) = run(&["inspect", &bad]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("square"), "{err}");
}
