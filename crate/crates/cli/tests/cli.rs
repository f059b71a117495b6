use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;
use subflow_cli::format::{config_hash, ResultFile};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("subflow").chain(args.iter().copied());
    let code = subflow_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn result(args: &[&str]) -> ResultFile {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    let parsed: ResultFile = serde_json::from_str(&out).unwrap();
    parsed.validate().unwrap();
    parsed
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn chain2_base_vector() {
    let r = result(&["solve", "--input", &data("chain2.json")]);
    assert_eq!(r.kind, "solve");
    assert_eq!(floats(&r.outputs["x"]), vec![1.0, 2.0]);
    assert_eq!(r.outputs["chain"], serde_json::json!([[1], [1, 2]]));
    assert!(r.outputs["minimization_count"].as_u64().unwrap() <= 3);
}

#[test]
fn diamond_dimacs_maximal_cut() {
    let r = result(&["maxflow", "--input", &data("diamond.dimacs"), "--cut", "maximal"]);
    assert_eq!(r.outputs["value"].as_f64(), Some(4.0));
    assert_eq!(r.outputs["side"], serde_json::json!([1]));
    let text = std::fs::read_to_string(data("diamond.dimacs")).unwrap();
    assert_eq!(r.config_hash, subflow_cli::format::text_hash(&text));
}

#[test]
fn diamond_json_minimal_cut() {
    let r = result(&["maxflow", "--input", &data("diamond.json")]);
    assert_eq!(r.outputs["value"].as_f64(), Some(4.0));
    assert_eq!(r.outputs["cut"], "minimal");
    assert_eq!(r.outputs["side"], serde_json::json!([]));
    // the flag overrides the file
    let r = result(&["maxflow", "--input", &data("diamond.json"), "--cut", "maximal"]);
    assert_eq!(r.outputs["side"], serde_json::json!([1]));
}

#[test]
fn every_sample_validates_and_hashes() {
    for (cmd, file) in [
        ("solve", "chain2.json"),
        ("maxflow", "diamond.json"),
        ("prox", "fused_prox.json"),
        ("prox", "group_prox.json"),
        ("densest", "densest.json"),
        ("minratio", "minratio.json"),
        ("regress", "regress_fused.json"),
    ] {
        let r = result(&[cmd, "--input", &data(file)]);
        assert_eq!(r.kind, cmd);
        let text = std::fs::read_to_string(data(file)).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(r.config_hash, config_hash(&value), "{file}");
        // re-serializing the result gives a result that still validates
        let again: ResultFile = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        again.validate().unwrap();
    }
}

#[test]
fn outputs_are_deterministic() {
    for (cmd, file) in [("regress", "regress_fused.json"), ("prox", "group_prox.json")] {
        let a = result(&[cmd, "--input", &data(file)]);
        let b = result(&[cmd, "--input", &data(file)]);
        assert_eq!(serde_json::to_string(&a.outputs).unwrap(), serde_json::to_string(&b.outputs).unwrap());
        assert_eq!(a.config_hash, b.config_hash);
    }
}

#[test]
fn sample_values() {
    let r = result(&["prox", "--input", &data("fused_prox.json")]);
    assert_eq!(floats(&r.outputs["beta"]), vec![1.5, 1.5, 2.25, 2.25, 0.0]);
    let r = result(&["prox", "--input", &data("group_prox.json")]);
    assert_eq!(floats(&r.outputs["beta"]), vec![1.5, -1.0, 0.5, 2.0]);
    let r = result(&["densest", "--input", &data("densest.json")]);
    assert_eq!(r.outputs["levels"][0]["set"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(r.outputs["levels"][0]["weight"].as_f64(), Some(6.0));
    let r = result(&["minratio", "--input", &data("minratio.json")]);
    assert_eq!(r.outputs["ratio"].as_f64(), Some(1.0));
    let r = result(&["regress", "--input", &data("regress_fused.json")]);
    assert_eq!(r.outputs["converged"], true);
    let history = floats(&r.outputs["history"]);
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    assert!(err.contains("frobnicate"));
    let (code, _, err) = run(&["solve"]);
    assert_eq!(code, 2);
    assert!(err.contains("--input"));
    let (code, _, err) = run(&["solve", "--input", &data("densest.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("densest"));
    let (code, _, _) = run(&["solve", "--input", "/nonexistent/problem.json"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["bench", "--profile", "nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("--profile"));
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("selftest"));
}

#[test]
fn input_and_solver_errors() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let bad_version = write("v.json", r#"{"version":2,"kind":"densest","payload":{"n":1,"edges":[]}}"#);
    assert_eq!(run(&["densest", "--input", &bad_version]).0, 2);
    let bad_lambda = write(
        "l.json",
        r#"{"version":1,"kind":"prox","payload":{"s":[1,2],"lambda":-1,"regularizer":{"type":"fused"}}}"#,
    );
    assert_eq!(run(&["prox", "--input", &bad_lambda]).0, 2);
    let no_cut = write(
        "inf.json",
        r#"{"version":1,"kind":"maxflow","payload":{"network":{"type":"inline","n_ground":1,"edges":[["s","g1","inf"],["g1","t","inf"]]}}}"#,
    );
    let (code, _, err) = run(&["maxflow", "--input", &no_cut]);
    assert_eq!(code, 3, "{err}");
    // log needs positive components; this chain has a zero ratio
    let log_zero = write(
        "log.json",
        r#"{"version":1,"kind":"solve","payload":{"function":{"type":"table","n":2,"values":[0,0,3,3]},"variant":"log"}}"#,
    );
    assert_eq!(run(&["solve", "--input", &log_zero]).0, 3);
}

#[test]
fn gen_then_regress() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let (code, _, err) = run(&[
        "gen", "group", "--n", "60", "--rows", "50", "--n-groups", "6", "--group-size", "10", "--seed", "3",
        "--lambda", "0.5", "--out-dir", &out,
    ]);
    assert_eq!(code, 0, "{err}");
    for f in ["design.csv", "targets.csv", "meta.json", "problem.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["groups"].as_array().unwrap().len(), 6);
    assert_eq!(meta["causal_groups"].as_array().unwrap().len(), 2);
    let problem = dir.path().join("problem.json").to_string_lossy().into_owned();
    let r = result(&["regress", "--input", &problem]);
    assert_eq!(floats(&r.outputs["beta"]).len(), 60);

    // the same seed writes the same files
    let dir2 = tempfile::tempdir().unwrap();
    let out2 = dir2.path().to_string_lossy().into_owned();
    run(&[
        "gen", "group", "--n", "60", "--rows", "50", "--n-groups", "6", "--group-size", "10", "--seed", "3",
        "--lambda", "0.5", "--out-dir", &out2,
    ]);
    for f in ["design.csv", "targets.csv", "meta.json"] {
        assert_eq!(
            std::fs::read(dir.path().join(f)).unwrap(),
            std::fs::read(dir2.path().join(f)).unwrap()
        );
    }
}

#[test]
fn gen_fused_rejects_bad_dims() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let (code, _, _) = run(&["gen", "fused", "--n", "5", "--rows", "10", "--k", "9", "--out-dir", &out]);
    assert_eq!(code, 2);
}

fn non_timing(csv_text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let drop = headers.iter().position(|h| h == "wall_seconds").unwrap();
    reader
        .records()
        .map(|r| {
            r.unwrap()
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, v)| v.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn bench_fused_scaling() {
    let (code, out, err) = run(&["bench", "--profile", "fused-scaling", "--jobs", "2", "--seed", "5"]);
    assert_eq!(code, 0, "{err}");
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "profile,instance,n,rows,edges,seed,iterations,converged,minimization_count,flow_solves,wall_seconds"
    );
    let rows = non_timing(&out);
    assert_eq!(rows.len(), 3);
    let ns: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(ns, vec![1_000, 10_000, 100_000]);
    let counts: Vec<usize> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] < w[1]));
    for (n, c) in ns.iter().zip(&counts) {
        assert!(*c <= 2 * n - 1);
    }
    // serial run gives the same non-timing columns
    let (_, serial, _) = run(&["bench", "--profile", "fused-scaling", "--jobs", "1", "--seed", "5"]);
    assert_eq!(non_timing(&serial), rows);
}

#[test]
fn bench_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("densest.csv");
    let (code, out, _) = run(&["bench", "--profile", "densest", "--out", &path.to_string_lossy()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(non_timing(&text).len(), 5);
}

#[test]
fn selftest_passes_and_detects_fault() {
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0, "{out}");
    let suites = out.lines().filter(|l| l.starts_with("PASS ")).count();
    assert!(suites >= 6, "{out}");
    let (code, out, _) = run(&["selftest", "--inject-fault"]);
    assert_ne!(code, 0);
    assert!(out.lines().any(|l| l.starts_with("FAIL ")));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_subflow");
    let status = Command::new(bin).arg("nope").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let ok = Command::new(bin)
        .args(["solve", "--input", &data("chain2.json")])
        .env("SUBFLOW_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let parsed: ResultFile = serde_json::from_slice(&ok.stdout).unwrap();
    parsed.validate().unwrap();
    let fault = Command::new(bin).args(["selftest", "--inject-fault"]).output().unwrap();
    assert_eq!(fault.status.code(), Some(1));
}
