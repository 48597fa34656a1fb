use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const EDGE: &str = "vocab E/2\nstructure edge\nelems v w\nrel E v w\n";
const LOOP: &str = "vocab E/2\nstructure loop\nelems u\nrel E u u\n";

fn order(n: usize) -> String {
    let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
    let mut s = format!("vocab E/2\nstructure L{n}\nelems {}\n", names.join(" "));
    for i in 0..n {
        for j in i + 1..n {
            s.push_str(&format!("rel E c{i} c{j}\n"));
        }
    }
    s
}

fn workdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("arboreal-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn file(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .output()
        .unwrap()
}

fn run_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_arboreal"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn orders_of_three_and_four_agree_at_rank_two() {
    let d = workdir("lines");
    let (a, b) = (file(&d, "l3.txt", &order(3)), file(&d, "l4.txt", &order(4)));
    for via in ["game", "oracle"] {
        let o = run(&["check", "--both", "-k", "2", "--via", via, &a, &b]);
        assert_eq!(o.status.code(), Some(0), "{via}: {}", stdout(&o));
        assert!(stdout(&o).contains("equivalent"));
    }
    let o = run(&[
        "check",
        "--both",
        "-k",
        "2",
        &file(&d, "l2.txt", &order(2)),
        &a,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn edge_into_loop_existential_fails_with_witness() {
    let d = workdir("edge");
    let (a, b) = (file(&d, "edge.txt", EDGE), file(&d, "loop.txt", LOOP));
    let o = run(&["check", "--mode", "existential", &a, &b]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness: "));

    let o = run(&["distinguish", "--mode", "existential", &a, &b]);
    assert_eq!(o.status.code(), Some(0));
    let formula = stdout(&o);
    let mc = run(&["modelcheck", formula.trim(), &a]);
    assert_eq!((mc.status.code(), stdout(&mc).trim()), (Some(0), "true"));
    let mc = run(&["modelcheck", formula.trim(), &b]);
    assert_eq!((mc.status.code(), stdout(&mc).trim()), (Some(1), "false"));

    for via in ["game", "oracle", "coalgebra"] {
        let o = run(&["check", "--mode", "ep", "--via", via, &a, &b]);
        assert_eq!(o.status.code(), Some(0), "{via}");
    }
}

#[test]
fn errors_exit_two() {
    let d = workdir("errors");
    let a = file(&d, "edge.txt", EDGE);
    let f = file(&d, "f.txt", "vocab F/2\nstructure z\nelems a\n");
    let o = run(&["check", &a, &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("vocabulary mismatch"));
    assert_eq!(
        run(&["check", &a, "/nonexistent/file"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["check", "--family", "pebble", "--via", "coalgebra", &a, &a])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["modelcheck", "E x1. (", &a]).status.code(), Some(2));
    assert_eq!(
        run(&["check", "--mode", "sideways", &a, &a]).status.code(),
        Some(2)
    );
}

#[test]
fn build_validate_and_morphisms() {
    let d = workdir("build");
    let (a, b) = (file(&d, "edge.txt", EDGE), file(&d, "loop.txt", LOOP));
    let lc = d.join("loop.co").to_string_lossy().into_owned();
    let ec = d.join("edge.co").to_string_lossy().into_owned();
    assert_eq!(
        run(&["build", "-k", "2", "-o", &lc, &b]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["build", "-k", "2", "-o", &ec, &a]).status.code(),
        Some(0)
    );
    let text = fs::read_to_string(&lc).unwrap();
    let elems = text.lines().find(|l| l.starts_with("elems ")).unwrap();
    assert_eq!(elems.split_whitespace().count() - 1, 2);

    let o = run(&["validate", &lc]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&["morphism", "--kind", "pathwise", &ec, &lc]);
    assert_eq!((o.status.code(), stdout(&o).trim()), (Some(1), "none"));
    let o = run(&["morphism", "--kind", "hom", &ec, &lc]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("map ")).count(), 6);
    assert!(out.lines().last().unwrap().starts_with("verified "));
}

#[test]
fn broken_coalgebra_is_reported() {
    let d = workdir("broken");
    let body = "vocab E/2\nstructure X\nelems p q\nrel E p q\nforest ef 2\nroot p\nroot q\n";
    let o = run(&["validate", &file(&d, "x.co", body)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated"));
}

#[test]
fn laws_hold() {
    let d = workdir("laws");
    let m = file(
        &d,
        "m.txt",
        "vocab R/2 P/1\nstructure M\nelems a b\nrel R a b\nrel P b\npoint a\n",
    );
    let o = run(&[
        "laws",
        "--family",
        "modal",
        "-k",
        "2",
        "--samples",
        "15",
        &m,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("all laws hold"));
    let e = file(&d, "edge.txt", EDGE);
    let o = run(&[
        "laws", "--family", "pebble", "-k", "2", "-n", "2", "--with-I", &e,
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn play_as_spoiler_and_duplicator() {
    let d = workdir("play");
    let (a, b) = (file(&d, "edge.txt", EDGE), file(&d, "loop.txt", LOOP));
    let o = run_with_input(
        &["play", "--mode", "existential", &a, &b],
        "moves\nmove w\n",
    );
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.contains("Spoiler wins"), "{out}");

    let o = run_with_input(
        &["play", "--mode", "ep", "--as", "duplicator", &b, &a],
        "answer q\nanswer v\n",
    );
    let out = stdout(&o);
    assert!(out.contains("error: no element q"), "{out}");
    assert!(out.contains("Spoiler wins"), "{out}");

    let o = run_with_input(
        &["play", "--mode", "ep", &a, &b],
        "move v\nmove w\nstatus\n",
    );
    let out = stdout(&o);
    assert!(out.contains("Duplicator wins"), "{out}");

    let o = run_with_input(
        &["play", "--family", "pebble", "-k", "2", "-n", "3", &a, &b],
        "move 3 v\nquit\n",
    );
    assert!(stdout(&o).contains("error: no legal move matches"));
}

#[test]
fn json_reports_are_deterministic() {
    let d = workdir("json");
    let (a, b) = (file(&d, "l3.txt", &order(3)), file(&d, "l2.txt", &order(2)));
    let args = ["check", "--both", "--format", "json", "-k", "2", &a, &b];
    let first = stdout(&run(&args));
    assert_eq!(first, stdout(&run(&args)));
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["equivalent"], false);
    assert!(
        v["forward"]["witnessFormula"].is_string() || v["backward"]["witnessFormula"].is_string()
    );

    let o = run(&["distinguish", "--format", "json", "-k", "2", &b, &a]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["stageTable"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn formulas_from_files() {
    let d = workdir("formula");
    let a = file(&d, "loop.txt", LOOP);
    let f = file(&d, "f.txt", "E x1. E(x1,x1)\n");
    let o = run(&["modelcheck", &format!("@{f}"), &a]);
    assert_eq!(stdout(&o).trim(), "true");
}
