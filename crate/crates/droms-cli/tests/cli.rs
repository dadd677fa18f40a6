//! End-to-end tests of the `droms` binary: every subcommand, both input
//! formats, exit codes and the Graphviz export.

use std::io::Write;
use std::process::{Command, Output};

fn droms(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_droms"))
        .args(args)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .expect("spawn droms");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

const INTRO: &str = "vertices: a b t\nedges: a-t b-t\nsubgroup H = a ; b\nsubgroup K = t a ; b\n";
const FREE: &str = "vertices: a b\nedges:\nsubgroup H = a^2 ; b\nsubgroup K = a^3\n";

#[test]
fn check_droms_accepts_and_rejects() {
    let ok = droms(&["check-droms"], INTRO);
    assert_eq!(stdout_json(&ok)["droms"], true);

    let bad = droms(
        &["check-droms"],
        "vertices: a b c d\nedges: a-b b-c c-d d-a\n",
    );
    assert_eq!(bad.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["droms"], false);
    assert_eq!(v["kind"], "cycle4");
    assert_eq!(v["witness"].as_array().unwrap().len(), 4);
}

#[test]
fn decompose_renders_the_tree() {
    let v = stdout_json(&droms(&["decompose"], INTRO));
    assert_eq!(v["rendering"], "Z[t] x ((Z[a] x 1) * (Z[b] x 1))");
    assert_eq!(v["tree"]["type"], "central_extension");
}

#[test]
fn normal_form_reduces() {
    let v = stdout_json(&droms(&["normal-form", "a t a^-1 t"], INTRO));
    assert_eq!(v["canonical"], "t^2");
}

#[test]
fn member_reports_witness() {
    let v = stdout_json(&droms(&["member", "H", "a b a^-1"], INTRO));
    assert_eq!(v["member"], true);
    assert_eq!(v["witness"], "H[0] H[1] H[0]^-1");
    let v = stdout_json(&droms(&["member", "H", "t"], INTRO));
    assert_eq!(v["member"], false);
}

#[test]
fn basis_lists_generators() {
    let v = stdout_json(&droms(&["basis", "H"], FREE));
    assert_eq!(v["basis"].as_array().unwrap().len(), 2);
    assert_eq!(v["adjacency"].as_array().unwrap().len(), 0);
}

#[test]
fn intersect_both_outcomes() {
    let v = stdout_json(&droms(&["intersect", "H", "K", "--depth", "6"], FREE));
    assert_eq!(v["status"], "fg");
    let gens: Vec<String> = v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g.as_str().unwrap().to_string())
        .filter(|g| g != "1")
        .collect();
    assert_eq!(gens, vec!["a^6"]);

    let v = stdout_json(&droms(&["intersect", "H", "K", "--depth", "4"], INTRO));
    assert_eq!(v["status"], "not_fg");
    assert_ne!(v["witness"], "1");
}

#[test]
fn coset_intersect_decides() {
    let v = stdout_json(&droms(
        &["coset-intersect", "H", "K", "a", "1", "--depth", "6"],
        FREE,
    ));
    assert_eq!(v["status"], "nonempty");
    // a b a^-1 ∉ H and a b^-1 a^{3n-1} is never readable in H's automaton,
    // so (a b a^-1)·H never meets ⟨a^3⟩.
    let v = stdout_json(&droms(
        &["coset-intersect", "H", "K", "a b a^-1", "1"],
        FREE,
    ));
    assert_eq!(v["status"], "empty");
}

#[test]
fn kurosh_requires_free_product() {
    let v = stdout_json(&droms(&["kurosh", "H"], FREE));
    assert!(v["free"].is_array());
    assert!(v["vertex_groups"].is_array());

    let out = droms(&["kurosh", "H"], INTRO);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn query_line_supplies_arguments() {
    let with_query = format!("{INTRO}query intersect H K\n");
    let v = stdout_json(&droms(&["intersect"], &with_query));
    assert_eq!(v["status"], "not_fg");

    // A mismatched query line cannot stand in for missing arguments.
    let out = droms(&["member"], &with_query);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_input_mirror() {
    let json_input = r#"{"vertices":["a","b"],"edges":[],
        "subgroups":{"H":["a^2","b"],"K":["a^3"]},
        "query":{"op":"intersect","args":["H","K"]}}"#;
    let v = stdout_json(&droms(&["intersect"], json_input));
    assert_eq!(v["status"], "fg");
}

#[test]
fn text_format_output() {
    let out = droms(&["intersect", "H", "K", "--format", "text"], INTRO);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status: not_fg"), "got: {text}");
}

#[test]
fn parse_errors_exit_two() {
    for bad in [
        "verts: a\n",
        "vertices: a a\n",
        "vertices: a\nsubgroup H = x\nquery basis H\n",
    ] {
        let out = droms(&["basis", "H"], bad);
        assert_eq!(out.status.code(), Some(2), "input: {bad}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn dot_export_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = dir.path().join("graph.dot");
    let out = droms(
        &["decompose", "--dot", graph_path.to_str().unwrap()],
        INTRO,
    );
    assert!(out.status.success());
    let graph = std::fs::read_to_string(&graph_path).unwrap();
    assert!(graph.starts_with("graph ambient {"));
    assert!(graph.contains("a -- t;"));

    let auto_path = dir.path().join("auto.dot");
    let out = droms(&["basis", "H", "--dot", auto_path.to_str().unwrap()], FREE);
    assert!(out.status.success());
    let auto = std::fs::read_to_string(&auto_path).unwrap();
    assert!(auto.starts_with("digraph wedge {"), "got: {auto}");
}
