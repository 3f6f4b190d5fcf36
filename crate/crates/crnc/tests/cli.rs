//! Black-box tests of the command-line interface: artifacts on disk, stdout
//! summaries, and the documented exit codes (0 ok, 2 parse, 3 validation,
//! 4 event budget, 5 refuted, 6 inconclusive, 7 slope band).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_crnc");

const X_PLUS_1: &str = "\
arity_in: 1
arity_out: 1

piece:
coeff: 1
denom: 1
b: 1
c: 0
domain: true
";

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("CRNC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn compile_simulate_check_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("x_plus_1.fnspec");
    fs::write(&spec, X_PLUS_1).unwrap();

    let net = dir.path().join("x_plus_1.crn");
    let out = run_in(dir.path(), &["compile", "x_plus_1.fnspec", "--out", "x_plus_1.crn"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("compiled 14 species, 11 reactions, gamma 22"),
        "{}",
        stdout(&out)
    );
    let net_text = fs::read_to_string(&net).unwrap();
    assert!(net_text.contains("inputs: X1"), "{net_text}");
    assert!(net_text.contains("outputs: Y1"), "{net_text}");
    let sidecar = fs::read_to_string(dir.path().join("x_plus_1.crn.toml")).unwrap();
    assert!(sidecar.contains("gamma = 22"), "{sidecar}");

    let out = run_in(
        dir.path(),
        &["simulate", "x_plus_1.crn", "--in", "X1=5", "--seed", "7", "--out", "traj.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("stopped: quiescent"), "{text}");
    assert!(text.contains("Y1: 6"), "{text}");
    let traj = fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    assert!(traj.starts_with('#'), "{traj}");

    let out = run_in(
        dir.path(),
        &["check", "x_plus_1.crn", "--in", "X1=2", "--spec", "x_plus_1.fnspec"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).to_lowercase().contains("certified"), "{}", stdout(&out));

    // Claiming the wrong settled count is refutable.
    let out = run_in(dir.path(), &["check", "x_plus_1.crn", "--in", "X1=2", "--expect", "4"]);
    assert_eq!(code(&out), 5, "{}{}", stdout(&out), stderr(&out));

    // A starved node budget cannot decide either way.
    let out = run_in(
        dir.path(),
        &["check", "x_plus_1.crn", "--in", "X1=2", "--expect", "3", "--budget", "5"],
    );
    assert_eq!(code(&out), 6, "{}{}", stdout(&out), stderr(&out));
}

#[test]
fn compile_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("garbage.fnspec"), "not a spec\n").unwrap();
    let out = run_in(dir.path(), &["compile", "garbage.fnspec"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(dir.path(), &["compile", "missing.fnspec"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    // y = x - 1 has no value at x = 0, which validation sweeps.
    let undefined = "arity_in: 1\narity_out: 1\n\npiece:\ncoeff: 1\ndenom: 1\nb: 0\nc: 1\ndomain: true\n";
    fs::write(dir.path().join("undefined.fnspec"), undefined).unwrap();
    let out = run_in(dir.path(), &["compile", "undefined.fnspec"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("specification rejected"), "{}", stderr(&out));
}

#[test]
fn simulate_error_paths_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.fnspec"), X_PLUS_1).unwrap();
    let out = run_in(dir.path(), &["compile", "spec.fnspec", "--out", "net.crn"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out = run_in(dir.path(), &["simulate", "net.crn", "--in", "X1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(dir.path(), &["simulate", "net.crn", "--in", "Z=3"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let out = run_in(dir.path(), &["simulate", "net.crn", "--in", "X1=5", "--stop", "bogus"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(
        dir.path(),
        &["simulate", "net.crn", "--in", "X1=5", "--stop", "events=3", "--event-budget", "3"],
    );
    assert_eq!(code(&out), 4, "{}{}", stdout(&out), stderr(&out));

    fs::write(dir.path().join("garbage.crn"), "-> nonsense\n").unwrap();
    let out = run_in(dir.path(), &["simulate", "garbage.crn"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn check_handles_decider_votes() {
    let dir = tempfile::tempdir().unwrap();
    // Reaction-free decider: whatever is seeded is already the consensus.
    fs::write(dir.path().join("vote.crn"), "species: A, B\nyesvoters: A\n").unwrap();

    let out = run_in(dir.path(), &["check", "vote.crn", "--in", "A=3", "--expect-vote", "yes"]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));

    let out = run_in(dir.path(), &["check", "vote.crn", "--in", "B=2", "--expect-vote", "yes"]);
    assert_eq!(code(&out), 5, "{}{}", stdout(&out), stderr(&out));

    let out = run_in(dir.path(), &["check", "vote.crn", "--in", "A=1", "--expect-vote", "maybe"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(dir.path(), &["check", "vote.crn", "--in", "A=1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn bench_reports_and_enforces_the_band() {
    let dir = tempfile::tempdir().unwrap();

    let out = run_in(
        dir.path(),
        &[
            "bench",
            "unimolecular",
            "--sizes",
            "50,100",
            "--trials",
            "40",
            "--out",
            "uni.csv",
            "--summary",
            "uni.toml",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("slope"), "{}", stdout(&out));
    assert!(dir.path().join("uni.csv").exists());
    assert!(dir.path().join("uni.toml").exists());

    // The doubling pattern settles in logarithmic time, far below a linear
    // band; the report must still land on disk.
    let out = run_in(
        dir.path(),
        &[
            "bench",
            "doubling",
            "--sizes",
            "10,20,40",
            "--trials",
            "30",
            "--band",
            "0.7,1.3",
            "--out",
            "doubling.csv",
        ],
    );
    assert_eq!(code(&out), 7, "{}{}", stdout(&out), stderr(&out));
    assert!(stderr(&out).contains("outside the required band"), "{}", stderr(&out));
    assert!(dir.path().join("doubling.csv").exists());

    let out = run_in(dir.path(), &["bench", "sideways", "--sizes", "10,20"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(dir.path(), &["bench", "compiled", "--sizes", "10,20"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = run_in(dir.path(), &["bench", "unimolecular", "--sizes", "50,100", "--trials", "10"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    let out = run_in(dir.path(), &["bench", "unimolecular", "--sizes", "100,50", "--trials", "40"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn default_artifacts_respect_the_output_directory_variable() {
    let dir = tempfile::tempdir().unwrap();
    let sink = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.fnspec"), X_PLUS_1).unwrap();

    let out = Command::new(BIN)
        .args(["compile", "spec.fnspec"])
        .current_dir(dir.path())
        .env("CRNC_OUT_DIR", sink.path())
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(sink.path().join("spec.crn").exists());
    assert!(sink.path().join("spec.crn.toml").exists());
}
