use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use keyhole_stc::io::{read_matrix, write_matrix};
use keyhole_stc::{reference, ComplexMatrix};

const BIN: &str = env!("CARGO_BIN_EXE_keyhole-stc");

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(dir).env_remove("KEYHOLE_STC_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let gram = dir.path().join("gram.json");
    write_matrix(&gram, &reference::example_gram()).unwrap();
    (dir, gram)
}

const SMALL_CONFIG: &str = r#"{
  "dims": {"m": 3, "n": 1},
  "gram": {"file": "gram.json"},
  "correlations": [
    {"label": "I", "source": "identity"},
    {"label": "P1", "source": {"constructed": {"l": 1}}}
  ],
  "snr_grid": {"start_db": 0, "stop_db": 20, "step_db": 10},
  "samples": 4000
}"#;

#[test]
fn check_criterion_exit_codes() {
    let (dir, gram) = workspace();
    let g = gram.to_str().unwrap();
    let ok = run(&["check-criterion", "--gram", g, "-N", "1"], dir.path());
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("SATISFIED (L=1)"));
    assert!(stdout(&ok).contains("0.452"));

    let eq = dir.path().join("eye.json");
    write_matrix(&eq, &ComplexMatrix::identity(3)).unwrap();
    let not = run(&["check-criterion", "--gram", eq.to_str().unwrap(), "-N", "1"], dir.path());
    assert_eq!(not.status.code(), Some(3));
    assert!(stdout(&not).contains("NOT SATISFIED"));

    let na = run(&["check-criterion", "--gram", g, "-N", "2"], dir.path());
    assert_eq!(na.status.code(), Some(3));
    assert!(stdout(&na).contains("NOT APPLICABLE"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"rows\":3").unwrap();
    let parse = run(&["check-criterion", "--gram", bad.to_str().unwrap(), "-N", "1"], dir.path());
    assert_eq!(parse.status.code(), Some(1));
    assert!(stderr(&parse).contains("bad.json"));

    let singular = dir.path().join("singular.json");
    write_matrix(&singular, &ComplexMatrix::diagonal(&[1.0, 0.0, 2.0])).unwrap();
    let rank = run(&["check-criterion", "--gram", singular.to_str().unwrap(), "-N", "1"], dir.path());
    assert_eq!(rank.status.code(), Some(2));

    let indefinite = dir.path().join("indefinite.json");
    write_matrix(&indefinite, &ComplexMatrix::diagonal(&[1.0, -0.5, 2.0])).unwrap();
    let npsd = run(&["check-criterion", "--gram", indefinite.to_str().unwrap(), "-N", "1"], dir.path());
    assert_eq!(npsd.status.code(), Some(2));
}

#[test]
fn construct_reproduces_the_example_correlation() {
    let (dir, gram) = workspace();
    let out = dir.path().join("p1.json");
    let o = run(&["construct", "--gram", gram.to_str().unwrap(), "-L", "1", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p1 = read_matrix(&out).unwrap();
    assert!(p1.max_abs_diff(&reference::printed_p1()) <= 2e-3);
    assert!((p1.trace().re - 3.0).abs() < 1e-9);
    assert!(stdout(&o).starts_with("nus: 0.000000 1.52"));
}

#[test]
fn construct_on_identity_gram_and_invalid_l() {
    let (dir, _) = workspace();
    let eye = dir.path().join("eye.json");
    write_matrix(&eye, &ComplexMatrix::identity(3)).unwrap();
    let out = dir.path().join("p.json");
    let o = run(&["construct", "--gram", eye.to_str().unwrap(), "-L", "1", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("nus: 0.000000 1.500000 1.500000"));

    let bad = run(&["construct", "--gram", eye.to_str().unwrap(), "-L", "3", "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    assert!(!stderr(&bad).is_empty());
}

#[test]
fn simulate_writes_csv_and_provenance_deterministically() {
    let (dir, _) = workspace();
    std::fs::write(dir.path().join("config.json"), SMALL_CONFIG).unwrap();
    let mut csvs = Vec::new();
    for (name, workers) in [("a.csv", "1"), ("b.csv", "3")] {
        let o = run(&["simulate", "--config", "config.json", "--out", name, "--workers", workers, "--seed", "9"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        csvs.push(std::fs::read_to_string(dir.path().join(name)).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let lines: Vec<&str> = csvs[0].lines().collect();
    assert_eq!(lines[0], "snr_db,pep_mc,stderr,pep_asymptotic,samples,label");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].ends_with(",4000,I"));
    assert!(lines[6].ends_with(",4000,P1"));

    let prov: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["seed"], 9);
    assert_eq!(prov["samples"], 4000);
    assert_eq!(prov["estimator"], "semi-analytic");
    let digest = prov["config_sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn seed_comes_from_the_environment_when_no_flag_is_given() {
    let (dir, _) = workspace();
    std::fs::write(dir.path().join("config.json"), SMALL_CONFIG).unwrap();
    let via_env = Command::new(BIN)
        .args(["simulate", "--config", "config.json", "--out", "env.csv"])
        .current_dir(dir.path())
        .env("KEYHOLE_STC_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(via_env.status.code(), Some(0), "{}", stderr(&via_env));
    let via_flag = run(&["simulate", "--config", "config.json", "--out", "flag.csv", "--seed", "5"], dir.path());
    assert_eq!(via_flag.status.code(), Some(0));
    let other = run(&["simulate", "--config", "config.json", "--out", "other.csv", "--seed", "6"], dir.path());
    assert_eq!(other.status.code(), Some(0));
    let read = |n: &str| std::fs::read_to_string(dir.path().join(n)).unwrap();
    assert_eq!(read("env.csv"), read("flag.csv"));
    assert_ne!(read("env.csv"), read("other.csv"));
}

#[test]
fn simulate_rejects_bad_configs() {
    let (dir, _) = workspace();
    let bad = SMALL_CONFIG.replace("\"samples\": 4000", "\"samples\": 10").replace("\"step_db\": 10", "\"step_db\": -1");
    std::fs::write(dir.path().join("bad.json"), bad).unwrap();
    let o = run(&["simulate", "--config", "bad.json", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("samples") && msg.contains("step"), "{msg}");
    assert!(!dir.path().join("x.csv").exists());

    let unknown = SMALL_CONFIG.replace("\"samples\": 4000", "\"samples\": 4000, \"colour\": 1");
    std::fs::write(dir.path().join("unknown.json"), unknown).unwrap();
    let o = run(&["simulate", "--config", "unknown.json", "--out", "y.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("colour"));
}

#[test]
fn verify_cheap_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "ostbc", "--max-m", "6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 satisfied"));
    let o = run(&["verify", "theorem2", "--trials", "200", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("200/200"));
}

#[test]
fn reproduce_example_prints_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce", "example"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("lhs = 0.452"));
    assert!(text.contains("P1 ="));
    assert!(text.contains("P2 ="));
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["check-criterion"], dir.path()).status.code(), Some(1));
    let help = run(&["--help"], dir.path());
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("check-criterion"));
}
