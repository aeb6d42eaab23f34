use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macroplan")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_and_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    let (d, p) = (fixture("depots/domain.pddl"), fixture("depots/p01.pddl"));
    let o = run(&["solve", "--setup", "1", "--domain", s(&d), "--problem", s(&p), "--out", s(&plan)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("; expanded"));
    let o = run(&["validate", "--domain", s(&d), "--problem", s(&p), "--plan", s(&plan)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("plan valid"));

    // Drop the last step: the goal no longer holds.
    let text = fs::read_to_string(&plan).unwrap();
    let mut lines: Vec<&str> = text.lines().filter(|l| l.starts_with('(')).collect();
    lines.pop();
    fs::write(&plan, lines.join("\n")).unwrap();
    let o = run(&["validate", "--domain", s(&d), "--problem", s(&p), "--plan", s(&plan)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("plan invalid"));
}

#[test]
fn unsolvable_problems_exit_with_one() {
    let o = run(&[
        "solve",
        "--setup",
        "1",
        "--domain",
        s(&fixture("tokens/domain.pddl")),
        "--problem",
        s(&fixture("tokens/unsolvable.pddl")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("no plan exists"));
}

#[test]
fn usage_errors_exit_with_two() {
    let d = fixture("depots/domain.pddl");
    let p = fixture("depots/p01.pddl");
    // Setup 3 needs a macro file.
    let o = run(&["solve", "--setup", "3", "--domain", s(&d), "--problem", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--setup", "5", "--domain", s(&d), "--problem", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", "--setup", "1", "--domain", "/nonexistent.pddl", "--problem", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn train_then_solve_with_every_setup() {
    let dir = tempfile::tempdir().unwrap();
    let d = fixture("depots/domain.pddl");
    let (p1, p2) = (fixture("depots/p01.pddl"), fixture("depots/p02.pddl"));
    let o = run(&[
        "train",
        "--method",
        "both",
        "--domain",
        s(&d),
        "--problems",
        s(&p1),
        s(&p2),
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let enhanced = dir.path().join("enhanced-domain.pddl");
    let macros = dir.path().join("macros.txt");
    assert!(fs::read_to_string(&enhanced).unwrap().contains("--"));
    assert!(fs::read_to_string(&macros).unwrap().starts_with("(:domain depots)"));

    // Sequence macros learned alone stay on the plain domain.
    let plain_dir = dir.path().join("plain");
    let o = run(&["train", "--method", "solep", "--domain", s(&d), "--problems", s(&p1), s(&p2), "--out-dir", s(&plain_dir)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!plain_dir.join("enhanced-domain.pddl").exists());
    let plain_macros = plain_dir.join("macros.txt");

    for (setup, dom, mac) in [("2", &enhanced, None), ("3", &d, Some(&plain_macros)), ("4", &enhanced, Some(&macros))] {
        let plan = dir.path().join(format!("plan{setup}.txt"));
        let mut args = vec!["solve", "--setup", setup, "--domain", s(dom), "--problem", s(&p2), "--out", s(&plan)];
        if let Some(m) = mac {
            args.extend(["--macros", s(m)]);
        }
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "setup {setup}: {}", String::from_utf8_lossy(&o.stderr));
        // Plans are printed in primitive actions and check against the plain domain.
        let o = run(&["validate", "--domain", s(&d), "--problem", s(&p2), "--plan", s(&plan)]);
        assert_eq!(o.status.code(), Some(0), "setup {setup}: {}", stdout(&o));
    }
}

#[test]
fn reports_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = fixture("depots/domain.pddl");
    let p = fixture("depots/p01.pddl");
    let o = run(&["train", "--method", "caed", "--domain", s(&d), "--problems", s(&p), "--out-dir", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let enhanced = dir.path().join("enhanced-domain.pddl");

    let acc = dir.path().join("acc.csv");
    let o = run(&["report", "accuracy", "--domain", s(&d), "--enhanced", s(&enhanced), "--problems", s(&p), "--out", s(&acc)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&acc).unwrap();
    assert!(text.lines().skip(1).any(|l| l.contains(",1,")));
    assert!(text.lines().skip(1).any(|l| l.contains(",2,")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("setup2: mean"));

    let o = run(&["report", "cost", "--domain", s(&d), "--enhanced", s(&enhanced), "--problems", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("problem,setup,solved"));
    assert_eq!(out.lines().count(), 3);
}
