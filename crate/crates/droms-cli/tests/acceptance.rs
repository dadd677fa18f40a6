//! Acceptance check for the command-line tool: repeated runs of every
//! subcommand on the same input produce byte-identical JSON and DOT output.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

fn run(args: &[&str], stdin: &str, dot: &std::path::Path) -> (Vec<u8>, Vec<u8>) {
    let mut full: Vec<&str> = args.to_vec();
    let dot_str = dot.to_str().unwrap().to_string();
    full.push("--dot");
    full.push(&dot_str);
    let mut child = Command::new(env!("CARGO_BIN_EXE_droms"))
        .args(&full)
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
    let out = child.wait_with_output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (out.stdout, std::fs::read(dot).unwrap())
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let start = Instant::now();
    let input = "vertices: a b t\nedges: a-t b-t\n\
                 subgroup H = a ; b\nsubgroup K = t a ; b\nsubgroup F = a^2 t ; b a\n";
    let free = "vertices: a b c\nedges:\nsubgroup H = a b ; c^2 ; a c\nsubgroup K = a ; c b\n";
    let cases: Vec<(&[&str], &str)> = vec![
        (&["check-droms"], input),
        (&["decompose"], input),
        (&["normal-form", "a t b t^-1 a^-1"], input),
        (&["member", "F", "a^2 t b a"], input),
        (&["basis", "F"], input),
        (&["intersect", "H", "F"], input),
        (&["coset-intersect", "H", "K", "a b", "b"], input),
        (&["basis", "H"], free),
        (&["intersect", "H", "K"], free),
        (&["kurosh", "H"], free),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, (args, stdin)) in cases.iter().enumerate() {
        let dot = dir.path().join(format!("case{i}.dot"));
        let first = run(args, stdin, &dot);
        for rep in 0..3 {
            let again = run(args, stdin, &dot);
            assert_eq!(first, again, "case {i} rep {rep}: output changed across runs");
        }
    }
    println!(
        "acceptance: repeated runs produce byte-identical JSON and DOT: pass ({:.2?})",
        start.elapsed()
    );
}
