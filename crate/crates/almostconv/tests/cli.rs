use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use almostconv::io::{read_curve, write_curve, write_sequence};
use almostconv_core::corpus::{generate_sequence, reference_corpus};
use almostconv_core::{constant_sequence, GeneratorSpec, Norm, SequenceSample, Vector};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn almostconv(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_almostconv"));
    cmd.args(args).env_remove("ALMOSTCONV_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    almostconv(args, &[])
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_seq(dir: &TempDir, name: &str, x: &SequenceSample) -> PathBuf {
    let path = dir.path().join(name);
    let mut buf = Vec::new();
    write_sequence(&mut buf, x).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn write_spec(dir: &TempDir, name: &str, spec: &GeneratorSpec) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string(spec).unwrap()).unwrap();
    path
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn alternating(dir: &TempDir, length: usize) -> PathBuf {
    let (x, _) = generate_sequence(&GeneratorSpec::Alternating { length }).unwrap();
    write_seq(dir, "alternating.jsonl", &x)
}

#[test]
fn analyze_alternating_finds_one_half() {
    let dir = TempDir::new().unwrap();
    let input = alternating(&dir, 10_000);
    let out = dir.path().join("report.json");
    let r = run(&["analyze", "--input", p(&input), "--out-report", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let rep = report(&out);
    assert_eq!(rep["status"], "converges");
    assert_eq!(rep["mode"], "strong");
    assert_eq!(rep["candidate"][0].as_f64().unwrap(), 0.5);
    assert_eq!(rep["quasi"]["status"], "converges");
    assert_eq!(rep["weak"]["status"], "converges");
    // Every effective parameter is echoed, defaults included.
    assert_eq!(rep["window"], 4096);
    assert_eq!(rep["horizon"], 10_000);
    assert_eq!(rep["tolerance"].as_f64().unwrap(), 1e-3);
    assert_eq!(rep["divergence_floor"].as_f64().unwrap(), 1e-2);
    assert_eq!(rep["norm"], "l2");
    assert_eq!(rep["seed"], 0);
    let defaulted: Vec<&str> = rep["defaulted"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    for name in ["tol", "floor", "window", "seed"] {
        assert!(defaulted.contains(&name), "{defaulted:?}");
    }
    assert_eq!(rep["hull_distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn analyze_doubling_blocks_diverges() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "blocks.json",
        &GeneratorSpec::DoublingBlocks { length: 1 << 14 },
    );
    let r = run(&["analyze", "--spec", p(&spec)]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["status"], "diverges");
    assert!(rep["residual"].as_f64().unwrap() >= 0.3);
    assert_eq!(rep["source"]["spec"]["spec"]["kind"], "doubling_blocks");
}

#[test]
fn analyze_constant_has_zero_residual() {
    let dir = TempDir::new().unwrap();
    let v = Vector::new(vec![0.25, -0.75]).unwrap();
    let x = constant_sequence(&v, 3000, Norm::L1).unwrap();
    let input = write_seq(&dir, "constant.jsonl", &x);
    let r = run(&["analyze", "--input", p(&input)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["residual"].as_f64().unwrap(), 0.0);
    assert_eq!(rep["quasi"]["residual"].as_f64().unwrap(), 0.0);
    assert_eq!(rep["candidate"], serde_json::json!([0.25, -0.75]));
    assert_eq!(rep["norm"], "l1");

    // Non-dyadic values round in the window means, far below the tolerance floor.
    let w = Vector::new(vec![0.3, 0.1]).unwrap();
    let input = write_seq(
        &dir,
        "constant3.jsonl",
        &constant_sequence(&w, 3000, Norm::L2).unwrap(),
    );
    let r = run(&["analyze", "--input", p(&input)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(rep["residual"].as_f64().unwrap() <= 1e-9 * w.norm(Norm::L2));
}

#[test]
fn check_against_given_limits() {
    let dir = TempDir::new().unwrap();
    let input = alternating(&dir, 4000);
    let half = run(&["check", "--input", p(&input), "--check-limit", "0.5"]);
    assert_eq!(half.code, 0, "{}", half.stderr);
    let zero = run(&["check", "--input", p(&input), "--check-limit", "0"]);
    assert_eq!(zero.code, 1, "{}", zero.stderr);
    let rep: Value = serde_json::from_str(&zero.stdout).unwrap();
    assert_eq!(rep["residual"].as_f64().unwrap(), 0.5);
    assert_eq!(rep["command"], "check");

    // Residual 5e-3 sits between ε = 1e-3 and the floor 1e-2.
    let near = run(&["check", "--input", p(&input), "--check-limit", "0.505"]);
    assert_eq!(near.code, 2, "{}", near.stderr);
    let rep: Value = serde_json::from_str(&near.stdout).unwrap();
    assert_eq!(rep["status"], "inconclusive");

    let negative = run(&[
        "check",
        "--input",
        p(&input),
        "--check-limit",
        "-0.5",
        "--floor",
        "0.5",
    ]);
    assert_eq!(negative.code, 1, "{}", negative.stderr);
}

#[test]
fn input_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let r = run(&["analyze", "--input", p(&empty)]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("empty input"), "{}", r.stderr);

    let input = alternating(&dir, 100);
    let r = run(&["check", "--input", p(&input), "--check-limit", "1,2"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("dimension"), "{}", r.stderr);

    let r = run(&["check", "--input", p(&input)]);
    assert_eq!(r.code, 3);
    let r = run(&["analyze", "--input", p(&input), "--window", "51"]);
    assert_eq!(r.code, 3);
    let r = run(&["analyze", "--input", p(&dir.path().join("missing.jsonl"))]);
    assert_eq!(r.code, 3);
    let r = run(&["analyze"]);
    assert_eq!(r.code, 3);
    let r = run(&["analyze", "--input", p(&input), "--bogus"]);
    assert_eq!(r.code, 3);
    let r = run(&["analyze", "--input", p(&input), "--tol", "0"]);
    assert_eq!(r.code, 3);
    let bad_bound = dir.path().join("bound.jsonl");
    fs::write(
        &bad_bound,
        "{\"dim\":1,\"bound\":0.5}\n[1]\n[0]\n[1]\n[0]\n",
    )
    .unwrap();
    let r = run(&["analyze", "--input", p(&bad_bound)]);
    assert_eq!(r.code, 3);

    let help = run(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("analyze"));
}

#[test]
fn fekete_holds_on_corpus_and_constants() {
    let dir = TempDir::new().unwrap();
    for (i, spec) in reference_corpus(2000).iter().enumerate() {
        let (x, _) = generate_sequence(spec).unwrap();
        let input = write_seq(&dir, &format!("c{i}.jsonl"), &x);
        let r = run(&["fekete", "--input", p(&input), "--window", "256"]);
        assert_eq!(r.code, 0, "{}: {}", spec.kind_name(), r.stderr);
    }
    let x = constant_sequence(&Vector::scalar(0.5).unwrap(), 500, Norm::L2).unwrap();
    let input = write_seq(&dir, "constant.jsonl", &x);
    let r = run(&["fekete", "--input", p(&input)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["status"], "holds");
    assert_eq!(rep["worst_pair"]["slack"].as_f64().unwrap(), 0.0);
    assert_eq!(rep["window"], 250);
}

#[test]
fn fekete_flags_a_corrupted_curve() {
    let dir = TempDir::new().unwrap();
    let input = alternating(&dir, 1000);
    let curve = dir.path().join("curve.csv");
    let r = run(&["analyze", "--input", p(&input), "--out-curve", p(&curve)]);
    assert_eq!(r.code, 0, "{}", r.stderr);

    let clean = run(&["fekete", "--curve", p(&curve)]);
    assert_eq!(clean.code, 0, "{}", clean.stderr);

    let mut rows = read_curve(fs::File::open(&curve).unwrap()).unwrap();
    assert_eq!(rows.len(), 500);
    // Alternating: ĉ_n is 1 for odd n and 1/2 for even n, except the corrupted entry.
    rows[9].c_sliding = 0.9;
    let mut buf = Vec::new();
    write_curve(&mut buf, &rows).unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, buf).unwrap();

    let r = run(&["fekete", "--curve", p(&bad)]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("m = "), "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["status"], "violated");
    let violations = rep["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    assert!(violations
        .iter()
        .all(|v| v["m"].as_u64().unwrap() + v["n"].as_u64().unwrap() == 10));
    assert_eq!(rep["horizon"], Value::Null);

    let garbage = dir.path().join("garbage.csv");
    fs::write(&garbage, "n,c\n1,2\n").unwrap();
    assert_eq!(run(&["fekete", "--curve", p(&garbage)]).code, 3);
}

#[test]
fn generate_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "random.json",
        &GeneratorSpec::RandomBounded {
            dim: 3,
            bound: 2.0,
            seed: 5,
            length: 500,
            norm: Norm::L1,
        },
    );
    let out = |name: &str, seed: Option<&str>| {
        let path = dir.path().join(name);
        let mut args = vec!["generate", "--spec", p(&spec), "--output", p(&path)];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let r = run(&args);
        assert_eq!(r.code, 0, "{}", r.stderr);
        fs::read(&path).unwrap()
    };
    let a = out("a.jsonl", None);
    assert_eq!(a, out("b.jsonl", None));
    assert_eq!(a, out("c.jsonl", Some("5")));
    assert_ne!(a, out("d.jsonl", Some("6")));

    // Without --output the samples go to stdout and the report stays off it.
    let r = run(&["generate", "--spec", p(&spec)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.as_bytes(), &a[..]);
    let first = r.stdout.lines().next().unwrap();
    assert_eq!(first, "{\"dim\":3,\"bound\":2.0,\"norm\":\"l1\"}");
}

#[test]
fn parallel_curves_match_single_thread() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "rotation.json",
        &GeneratorSpec::Rotation {
            angle: 1.0,
            length: 6000,
            norm: Norm::L2,
        },
    );
    let go = |threads: &str| {
        let curve = dir.path().join(format!("curve{threads}.csv"));
        let rep = dir.path().join(format!("report{threads}.json"));
        let r = almostconv(
            &[
                "analyze",
                "--spec",
                p(&spec),
                "--out-curve",
                p(&curve),
                "--out-report",
                p(&rep),
            ],
            &[("ALMOSTCONV_THREADS", threads)],
        );
        assert_eq!(r.code, 0, "{}", r.stderr);
        let mut report = report(&rep);
        assert_eq!(report["threads"], threads.parse::<u64>().unwrap());
        report["threads"] = Value::Null;
        report["curve_file"] = Value::Null;
        (fs::read(curve).unwrap(), report)
    };
    let (c1, r1) = go("1");
    let (c4, r4) = go("4");
    assert_eq!(c1, c4);
    assert_eq!(r1, r4);

    let r = almostconv(
        &["analyze", "--spec", p(&spec)],
        &[("ALMOSTCONV_THREADS", "zero")],
    );
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("ALMOSTCONV_THREADS"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let input = alternating(&dir, 2000);
    let config = dir.path().join("config.json");
    let cfg = serde_json::json!({
        "input": p(&input),
        "window": 100,
        "tol": 0.02,
        "check_limit": [0.5],
    });
    fs::write(&config, cfg.to_string()).unwrap();
    let r = run(&["check", "--config", p(&config), "--window", "200"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["window"], 200);
    assert_eq!(rep["tolerance"].as_f64().unwrap(), 0.02);
    assert_eq!(rep["divergence_floor"].as_f64().unwrap(), 0.2);
    let defaulted = rep["defaulted"].as_array().unwrap();
    assert!(!defaulted.contains(&Value::from("window")));
    assert!(!defaulted.contains(&Value::from("tol")));

    fs::write(&config, "{\"windw\": 3}").unwrap();
    assert_eq!(run(&["analyze", "--config", p(&config)]).code, 3);
}

#[test]
fn norm_override_revalidates_the_bound() {
    let dir = TempDir::new().unwrap();
    let (x, _) = generate_sequence(&GeneratorSpec::Rotation {
        angle: 2.0,
        length: 1000,
        norm: Norm::L2,
    })
    .unwrap();
    let input = write_seq(&dir, "rotation.jsonl", &x);
    let linf = run(&[
        "analyze",
        "--input",
        p(&input),
        "--norm",
        "linf",
        "--tol",
        "0.01",
    ]);
    assert_eq!(linf.code, 0, "{}", linf.stderr);
    let rep: Value = serde_json::from_str(&linf.stdout).unwrap();
    assert_eq!(rep["norm"], "linf");
    // Unit vectors can have l1 norm up to √2 > 1 = the declared bound.
    let l1 = run(&["analyze", "--input", p(&input), "--norm", "l1"]);
    assert_eq!(l1.code, 3, "{}", l1.stdout);
}

#[test]
fn continuous_from_spec_and_file() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "sine.json",
        &GeneratorSpec::Sine {
            step: 1e-2,
            duration: 200.0,
            frequency: 1.0,
        },
    );
    let r = run(&[
        "continuous",
        "--spec",
        p(&spec),
        "--check-limit",
        "0",
        "--tol",
        "0.01",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(rep["window"], 10_000);
    assert_eq!(rep["time_window"].as_f64().unwrap(), 100.0);
    assert!(rep["residual"].as_f64().unwrap() <= 2.0 / 100.0);

    let file = dir.path().join("sine.jsonl");
    let g = run(&["generate", "--spec", p(&spec), "--output", p(&file)]);
    assert_eq!(g.code, 0, "{}", g.stderr);
    assert!(fs::read_to_string(&file)
        .unwrap()
        .starts_with("{\"dim\":1,\"bound\":1.0,\"norm\":\"l2\",\"step\":0.01}"));
    let from_file = run(&[
        "continuous",
        "--input",
        p(&file),
        "--check-limit",
        "0",
        "--tol",
        "0.01",
    ]);
    assert_eq!(from_file.code, 0, "{}", from_file.stderr);
    let rep_file: Value = serde_json::from_str(&from_file.stdout).unwrap();
    assert_eq!(rep_file["residual"], rep["residual"]);

    // A coarser declared step stretches time: same samples, t doubles.
    let stretched = run(&[
        "continuous",
        "--input",
        p(&file),
        "--continuous-step",
        "0.02",
        "--check-limit",
        "0",
        "--tol",
        "0.01",
    ]);
    assert_eq!(stretched.code, 0, "{}", stretched.stderr);
    let rep_s: Value = serde_json::from_str(&stretched.stdout).unwrap();
    assert_eq!(rep_s["time_window"].as_f64().unwrap(), 200.0);

    // The alternating sequence is not a function input.
    let seq = alternating(&dir, 100);
    assert_eq!(run(&["continuous", "--input", p(&seq)]).code, 3);
    let blocks = write_spec(
        &dir,
        "b.json",
        &GeneratorSpec::DoublingBlocks { length: 64 },
    );
    assert_eq!(run(&["continuous", "--spec", p(&blocks)]).code, 3);
}

#[test]
fn square_wave_converges_to_one_half() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "square.json",
        &GeneratorSpec::SquareWave {
            period: 2.0,
            step: 0.01,
            duration: 400.0,
        },
    );
    let r = run(&["continuous", "--spec", p(&spec), "--tol", "0.01"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((rep["candidate"][0].as_f64().unwrap() - 0.5).abs() < 1e-2);
}

#[test]
fn candidate_window_selects_the_averaged_samples() {
    let dir = TempDir::new().unwrap();
    // A leading quarter of ones, then zeros: the suffix mean is 0, the full mean 1/4.
    let samples: Vec<Vector> = (0..4000)
        .map(|k| Vector::new(vec![if k < 1000 { 1.0 } else { 0.0 }]).unwrap())
        .collect();
    let x = SequenceSample::new(&samples, 1.0, Norm::L2).unwrap();
    let input = write_seq(&dir, "step.jsonl", &x);
    let candidate = |which: Option<&str>| {
        let out = dir.path().join("report.json");
        let mut args = vec!["analyze", "--input", p(&input), "--out-report", p(&out)];
        if let Some(w) = which {
            args.extend(["--candidate-window", w]);
        }
        let r = run(&args);
        assert!(r.code <= 2, "{}", r.stderr);
        let rep = report(&out);
        let defaulted = rep["defaulted"].as_array().unwrap().clone();
        (
            rep["candidate"][0].as_f64().unwrap(),
            rep["candidate_window"].clone(),
            defaulted.iter().any(|d| d == "candidate_window"),
        )
    };
    assert_eq!(candidate(None), (0.0, Value::from("suffix"), true));
    assert_eq!(
        candidate(Some("suffix")),
        (0.0, Value::from("suffix"), false)
    );
    assert_eq!(candidate(Some("full")), (0.25, Value::from("full"), false));
    assert_eq!(
        run(&[
            "analyze",
            "--input",
            p(&input),
            "--candidate-window",
            "half"
        ])
        .code,
        3
    );
}
