use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("sketchlab-{}-{name}", std::process::id()));
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

#[test]
fn kelley_example_passes() {
    let o = run(&["--suite", "kelley", "--max-space", "3", "--max-directed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("suite kelley: PASS"));
}

#[test]
fn count_examples() {
    let o = run(&["--suite", "preorder-counts", "--sizes", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for (k, c) in [(1, 1), (2, 4), (3, 29)] {
        assert!(text.contains(&format!("models/size-{k}: {c} models")), "{text}");
    }
    let o = run(&["--suite", "copreorders", "--max", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    let details: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["detail"].as_str().unwrap()).collect();
    assert!(details[0].starts_with("2 ") && details[1].starts_with("4 ") && details[2].starts_with("8 "));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--suite", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["--suite", "continuity", "--max-space", "7"]).status.code(), Some(3));
    assert_eq!(run(&["--suite", "continuity", "--max-space", "5", "--ceiling", "4"]).status.code(), Some(3));
    let bad = temp_file("bad.txt", "space { points: a; opens: {}; }");
    let o = run(&["--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("carrier not open"));
    let failing = temp_file(
        "fail.txt",
        "directed one { points: o; le: o o; }\nconvergence lonely { points: a b; bound: 1; net one (a) -> a; }\n",
    );
    let o =
        run(&["--suite", "kelley", "--max-space", "1", "--max-directed", "1", "--input", failing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL input/lonely"));
}

#[test]
fn normalized_print_round_trips() {
    let src = temp_file("s.txt", "# Sierpinski\nspace S { points: a b; opens: {} {b} {a b}; }\n");
    let o = run(&["--input", src.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let again = temp_file("s2.txt", &stdout(&o));
    let o2 = run(&["--input", again.to_str().unwrap()]);
    assert_eq!(stdout(&o), stdout(&o2));
}

#[test]
fn list_names_every_suite() {
    let text = stdout(&run(&["--list"]));
    assert_eq!(text.lines().count(), 13);
}
