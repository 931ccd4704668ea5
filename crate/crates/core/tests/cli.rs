use std::fs;
use std::path::Path;
use std::process::Command;

use jobmarket::cli::{run, EXIT_INPUT, EXIT_STABLE, EXIT_UNSTABLE};
use jobmarket::format::{InstanceFile, OutcomeFile};

const ONE_BY_ONE: &str = r#"{
  "workers": ["i"],
  "firms": [{"id": "A", "quota": 1}],
  "pairs": [{"worker": "i", "firm": "A", "min_salary": 0, "max_salary": 5,
             "worker_valuation": "z - 2", "firm_valuation": "4 - z"}]
}"#;

fn jm(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("jobmarket").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn solve_one_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "one.json", ONE_BY_ONE);
    let (code, out, err) = jm(&["solve", &inst]);
    assert_eq!(code, EXIT_STABLE, "{err}");
    let file = OutcomeFile::from_json(&out).unwrap();
    assert_eq!(file.matches[0].firm, "A");
    assert_eq!(file.matches[0].workers[0].worker, "i");
    assert_eq!(file.matches[0].workers[0].salary, 4);
    assert_eq!(file.worker_payoffs["i"], 2.0);
    assert_eq!(file.firm_payoffs["A"], 0.0);
    assert_eq!(file.iterations, 1);
    assert!(file.stable);
}

#[test]
fn solve_invalid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        &ONE_BY_ONE.replace(r#""quota": 1"#, r#""quota": 0"#),
    );
    let (code, out, err) = jm(&["solve", &bad]);
    assert_eq!(code, EXIT_INPUT);
    assert!(out.is_empty());
    assert!(err.contains("error[invalid-instance]"), "{err}");
    assert!(err.contains("quota 0"), "{err}");

    let (code, _, err) = jm(&["solve", &dir.path().join("missing.json").to_string_lossy()]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("error[io]"));

    let garbled = write(dir.path(), "garbled.json", "{ not json");
    assert_eq!(jm(&["solve", &garbled]).0, EXIT_INPUT);
}

#[test]
fn trace_lines_match_events() {
    let dir = tempfile::tempdir().unwrap();
    let inst_text =
        fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/competition.json")).unwrap();
    let inst = write(dir.path(), "c.json", &inst_text);
    let trace = dir.path().join("t.jsonl");
    let out = dir.path().join("o.json");
    let (code, stdout, _) = jm(&[
        "solve",
        &inst,
        "--trace",
        &trace.to_string_lossy(),
        "--out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(code, EXIT_STABLE);
    assert!(stdout.is_empty());
    let text = fs::read_to_string(&trace).unwrap();
    let instance = InstanceFile::from_json(&inst_text).unwrap().validate().unwrap();
    let sol = jobmarket::solver::run(&instance, Default::default()).unwrap();
    assert_eq!(text.lines().count(), sol.trace.len());
}

#[test]
fn solver_flags() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "one.json", ONE_BY_ONE);
    for extra in [
        ["--assert-invariants", "off"],
        ["--x1", "nonempty"],
        ["--ps2-domain", "all"],
    ] {
        let mut args = vec!["solve", inst.as_str()];
        args.extend(extra);
        assert_eq!(jm(&args).0, EXIT_STABLE, "{extra:?}");
    }
    assert_eq!(jm(&["solve", &inst, "--x1", "sometimes"]).0, EXIT_INPUT);
}

#[test]
fn check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "one.json", ONE_BY_ONE);
    let (_, golden, _) = jm(&["solve", &inst]);
    let good = write(dir.path(), "good.json", &golden);
    let (code, out, _) = jm(&["check", &inst, &good]);
    assert_eq!(code, EXIT_STABLE);
    assert!(out.ends_with("pass\n"));

    let mut tampered = OutcomeFile::from_json(&golden).unwrap();
    tampered.matches[0].workers[0].salary = 5;
    tampered.salaries.clear();
    let bad = write(dir.path(), "bad.json", &tampered.to_json());
    let (code, out, err) = jm(&["check", &inst, &bad]);
    assert_eq!(code, EXIT_UNSTABLE);
    assert!(out.contains("ps1"), "{out}");
    assert!(out.contains("\"firm_value\":-1.0"), "{out}");
    assert!(err.contains("warning[stable-flag]"));

    let mut renamed = OutcomeFile::from_json(&golden).unwrap();
    renamed.matches[0].workers[0].worker = "nobody".into();
    let mismatched = write(dir.path(), "mismatched.json", &renamed.to_json());
    let (code, _, err) = jm(&["check", &inst, &mismatched]);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("error[mismatch]"));
}

#[test]
fn check_reports_blocking_pair() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "pair.json",
        r#"{"workers": ["i"], "firms": [{"id": "A", "quota": 1}],
            "pairs": [{"worker": "i", "firm": "A", "min_salary": 0, "max_salary": 3,
                       "worker_valuation": "1 + z", "firm_valuation": "1 - z/4"}]}"#,
    );
    let empty = write(
        dir.path(),
        "empty.json",
        r#"{"matches": [], "worker_payoffs": {}, "firm_payoffs": {}, "unmatched_workers": ["i"],
            "iterations": 0, "stable": false}"#,
    );
    let (code, out, err) = jm(&["check", &inst, &empty]);
    assert_eq!(code, EXIT_UNSTABLE);
    assert!(out.contains("ps2") && out.contains("\"salary\":0"), "{out}");
    assert!(err.is_empty());
}

#[test]
fn gen_is_deterministic_and_valid() {
    let (c1, a, _) = jm(&["gen", "--seed", "1", "--workers", "4", "--firms", "2"]);
    let (c2, b, _) = jm(&["gen", "--seed", "1", "--workers", "4", "--firms", "2"]);
    let (_, c, _) = jm(&["gen", "--seed", "2", "--workers", "4", "--firms", "2"]);
    assert_eq!((c1, c2), (EXIT_STABLE, EXIT_STABLE));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let inst = InstanceFile::from_json(&a).unwrap().validate().unwrap();
    assert_eq!((inst.num_workers(), inst.num_firms()), (4, 2));

    let (_, fixed, _) = jm(&["gen", "--seed", "3", "--fixed-salary"]);
    let inst = InstanceFile::from_json(&fixed).unwrap().validate().unwrap();
    assert!(inst.pairs().iter().all(|p| p.min_salary == p.max_salary));

    assert_eq!(jm(&["gen", "--seed", "1", "--workers", "0"]).0, EXIT_INPUT);
    assert_eq!(jm(&["gen", "--seed", "1", "--max-quota", "1000"]).0, EXIT_INPUT);
    assert_eq!(jm(&["gen"]).0, EXIT_INPUT);
}

#[test]
fn batch_solve_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in");
    let outputs = dir.path().join("out");
    let traces = dir.path().join("traces");
    fs::create_dir(&inputs).unwrap();
    for seed in 0..12 {
        let (_, text, _) = jm(&["gen", "--seed", &seed.to_string()]);
        write(&inputs, &format!("g{seed:02}.json"), &text);
    }
    let (code, _, err) = jm(&[
        "solve",
        &inputs.to_string_lossy(),
        "--out-dir",
        &outputs.to_string_lossy(),
        "--trace",
        &traces.to_string_lossy(),
        "--jobs",
        "4",
    ]);
    assert_eq!(code, EXIT_STABLE, "{err}");
    assert_eq!(fs::read_dir(&outputs).unwrap().count(), 12);
    assert_eq!(fs::read_dir(&traces).unwrap().count(), 12);

    let (code, out, _) = jm(&[
        "check",
        &inputs.to_string_lossy(),
        &outputs.to_string_lossy(),
        "--jobs",
        "3",
    ]);
    assert_eq!(code, EXIT_STABLE);
    assert_eq!(out.lines().count(), 12);
    assert!(out.lines().all(|l| l.ends_with("pass")));
    // results print in file order regardless of scheduling
    let names: Vec<&str> = out.lines().collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);

    assert_eq!(jm(&["solve", &inputs.to_string_lossy()]).0, EXIT_INPUT);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "one.json", ONE_BY_ONE);
    let bin = env!("CARGO_BIN_EXE_jobmarket");
    let ok = Command::new(bin).args(["solve", &inst]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = write(dir.path(), "bad.json", "[]");
    let failed = Command::new(bin).args(["solve", &bad]).output().unwrap();
    assert_eq!(failed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("error[parse]"));
}
