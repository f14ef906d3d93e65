//! Runs the `marble` binary and compares its output against golden files.
//! Set `UPDATE_GOLDEN=1` to rewrite them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn marble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marble"))
        .args(args)
        .env_remove("MARBLE_PHYSICS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core")
        .join(rel)
        .display()
        .to_string()
}

fn golden(name: &str, actual: &str) {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "output differs from {name}");
}

#[test]
fn run_fredkin_walkthrough() {
    let o = marble(&[
        "run",
        "FREDKIN_DIRECT",
        "--inputs",
        "010",
        "--mode",
        "bounce",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("v=0 y1=0 y2=1\n"));
    golden("run_fredkin_010.txt", &stdout(&o));
}

#[test]
fn run_and_merge_wastes_one_marble() {
    let o = marble(&["run", "AND", "--inputs", "11", "--mode", "merge"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("y=1\n"), "{out}");
    assert!(out.contains(" waste=1 "), "{out}");
}

#[test]
fn run_rejects_wrong_arity_and_bad_bits() {
    let o = marble(&["run", "AND", "--inputs", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("got 1 bit"), "{}", stderr(&o));
    let o = marble(&["run", "AND", "--inputs", "1x"]);
    assert!(!o.status.success());
}

#[test]
fn run_trace_records() {
    let o = marble(&[
        "run",
        "FREDKIN_DIRECT",
        "--inputs",
        "101",
        "--mode",
        "merge",
        "--trace",
        "--format",
        "records",
    ]);
    assert!(o.status.success());
    golden("run_fredkin_101_trace.txt", &stdout(&o));
}

#[test]
fn output_is_deterministic() {
    let args = ["run", "FULL_ADDER", "--inputs", "111", "--trace"];
    assert_eq!(marble(&args).stdout, marble(&args).stdout);
}

#[test]
fn table_goldens() {
    for (gate, file) in [("TOFFOLI", "table_toffoli.txt"), ("XOR", "table_xor.txt")] {
        let o = marble(&["table", gate]);
        assert!(o.status.success());
        golden(file, &stdout(&o));
    }
    let o = marble(&[
        "table",
        "FREDKIN_DIRECT",
        "--mode",
        "merge",
        "--format",
        "records",
    ]);
    golden("table_fredkin_records.txt", &stdout(&o));
}

#[test]
fn table_of_passthrough_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("wire.net");
    fs::write(&p, "circuit wire\ninput a\noutput y\nconnect a -> y\n").unwrap();
    let o = marble(&["table", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "a | y\n0 | 0\n1 | 1\n");
}

#[test]
fn verify_all_and_single() {
    let o = marble(&["verify", "--all"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("13/13 gates pass\n"));

    let o = marble(&["verify", "FREDKIN_DIRECT"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("PASS") && out.contains("physically conservative"));
    assert!(!out.contains("not physically conservative"));
    golden("verify_fredkin_direct.txt", &out);
}

#[test]
fn verify_unknown_gate_fails() {
    let o = marble(&["verify", "bogus_gate"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown gate"));
}

#[test]
fn lint_flags_skew_only_without_repair() {
    let net = fixture("tests/fixtures/imbalanced.net");
    let o = marble(&["lint", &net, "--no-repair"]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("(mismatch 3)"), "{}", stdout(&o));
    let o = marble(&["lint", &net]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("inserted K.A.hold (3 phases)"));
    assert!(marble(&["lint", "NAND"]).status.success());
}

#[test]
fn lint_and_run_report_positioned_parse_errors() {
    let net = fixture("tests/fixtures/malformed/dangling_arrow.net");
    for sub in ["lint", "print"] {
        let o = marble(&[sub, &net]);
        assert!(!o.status.success());
        assert!(
            stderr(&o).contains("dangling_arrow.net:3:11: syntax error"),
            "{}",
            stderr(&o)
        );
    }
}

#[test]
fn print_is_canonical() {
    let o = marble(&["print", &fixture("tests/fixtures/ok/nand_commented.net")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), stdout(&marble(&["print", "NAND"])));
    golden("print_nand.txt", &stdout(&o));
    let o = marble(&["print", "NAND", "--elaborated"]);
    assert!(stdout(&o).contains("hold(3)"), "{}", stdout(&o));
}

#[test]
fn auto_mode_reads_physics_and_env_wins() {
    let dir = tempfile::tempdir().unwrap();
    let fast = dir.path().join("fast.cfg");
    let mut f = fs::File::create(&fast).unwrap();
    writeln!(f, "# marbles released from higher up\nvelocity = 0.29").unwrap();
    let slow = dir.path().join("slow.cfg");
    fs::write(&slow, "velocity=0.21\n").unwrap();
    let mid = dir.path().join("mid.cfg");
    fs::write(&mid, "velocity=0.25\n").unwrap();

    let run = |cfg: &Path, env: Option<&Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_marble"));
        c.args([
            "run",
            "XOR",
            "--inputs",
            "11",
            "--mode",
            "auto",
            "--physics",
        ])
        .arg(cfg);
        c.env_remove("MARBLE_PHYSICS");
        if let Some(e) = env {
            c.env("MARBLE_PHYSICS", e);
        }
        c.output().unwrap()
    };
    // Two bouncing marbles are wasted separately; merged, they leave as one.
    assert!(stdout(&run(&fast, None)).contains(" waste=1 "));
    assert!(stdout(&run(&slow, None)).contains(" waste=2 "));
    assert!(stdout(&run(&slow, Some(&fast))).contains(" waste=1 "));

    let o = run(&mid, None);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));

    fs::write(&mid, "velocity=0.25\nmidband=reject\n").unwrap();
    assert!(!run(&mid, None).status.success());
}

#[test]
fn help_documents_flags() {
    let o = marble(&["run", "--help"]);
    let help = stdout(&o);
    for flag in [
        "--inputs",
        "--mode",
        "--physics",
        "--trace",
        "--format",
        "MARBLE_PHYSICS",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}
