use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use bqsm::cli::run;
use bqsm::mbp_file;
use serde_json::Value;

fn bqsm(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("bqsm").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    let s: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, path: &str) {
    let doc: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{path}: {errors:?}");
}

#[test]
fn compile_writes_a_decodable_program() {
    let dir = tempfile::tempdir().unwrap();
    let json = p(dir.path(), "out.json");
    let (code, out, _) = bqsm(&["compile", "x0 & (x1 | !x2)", "--json", &json]);
    assert_eq!(code, 0);
    assert!(out.contains("truth table ok"));
    let report: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["outputs"][0]["truth_table_ok"], true);
    let prog = mbp_file::decode(&fs::read(dir.path().join("out.mbp")).unwrap()).unwrap();
    assert_eq!(prog.len() as u64, report["outputs"][0]["length"].as_u64().unwrap());
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(bqsm(&["no-such-command"]).0, 64);
    assert_eq!(bqsm(&["ot", "--m", "many"]).0, 64);
    let (code, out, err) = bqsm(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage") && err.is_empty());
    let (code, out, err) = bqsm(&[]);
    assert_eq!(code, 64);
    assert!(out.is_empty() && err.contains("Usage"));
    assert_eq!(bqsm(&["compile", "x0 &"]).0, 64);
}

#[test]
fn one_time_program_file_is_single_use() {
    let dir = tempfile::tempdir().unwrap();
    let prog = p(dir.path(), "p.json");
    assert_eq!(bqsm(&["compile", "x0 & x1", "x0 | x1", "--otp", &prog, "--s", "4"]).0, 0);
    let (code, out, _) = bqsm(&["otp-eval", &prog, "--input", "10"]);
    assert_eq!((code, out.trim()), (0, "01"));
    let (code, _, err) = bqsm(&["otp-eval", &prog, "--input", "11"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn transcripts_and_reports_match_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let tr = schema("transcript.schema.json");
    let rep = schema("report.schema.json");
    for (i, extra) in [&[][..], &["--full"][..]].iter().enumerate() {
        let ot = p(dir.path(), &format!("ot{i}.json"));
        let mut args = vec!["ot", "--m", "64", "--l", "4", "--c", "1", "--json", &ot];
        args.extend_from_slice(extra);
        assert_eq!(bqsm(&args).0, 0);
        assert_valid(&tr, &ot);
        let br = p(dir.path(), &format!("br{i}.json"));
        let mut args = vec!["broadcast", "x0 & x1", "!x1", "--copies", "3", "--json", &br];
        args.extend_from_slice(extra);
        assert_eq!(bqsm(&args).0, 0);
        assert_valid(&tr, &br);
    }
    let r = p(dir.path(), "r.json");
    assert_eq!(bqsm(&["experiment", "ot-dis", "--m", "64", "--l", "4", "--trials", "20", "--json", &r]).0, 0);
    assert_valid(&rep, &r);
    let r = p(dir.path(), "t.json");
    assert_eq!(bqsm(&["experiment", "token", "--family", "sig", "--trials", "5", "--json", &r]).0, 0);
    assert_valid(&rep, &r);
}

#[test]
fn replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run_twice = |args: &[&str], name: &str| {
        let a = p(dir.path(), &format!("{name}.a.json"));
        let b = p(dir.path(), &format!("{name}.b.json"));
        for path in [&a, &b] {
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--json", path.as_str()]);
            assert_eq!(bqsm(&full).0, 0);
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{name}");
    };
    run_twice(&["ot", "--m", "128", "--l", "8", "--seed", "9", "--full"], "ot");
    run_twice(&["broadcast", "x0 | x1", "--copies", "2", "--seed", "9", "--full"], "br");
    run_twice(&["experiment", "ot-dis", "--m", "64", "--l", "4", "--trials", "50", "--seed", "9"], "exp");
}

#[test]
fn symmetric_round_trip_and_mac() {
    let dir = tempfile::tempdir().unwrap();
    let (key, ct, tag) = (p(dir.path(), "k.json"), p(dir.path(), "ct.json"), p(dir.path(), "tag.json"));
    assert_eq!(bqsm(&["enc", "--msg", "1a2b", "--key-out", &key, "--out", &ct, "--seed", "5"]).0, 0);
    let (code, out, _) = bqsm(&["dec", "--key", &key, "--ct", &ct]);
    assert_eq!((code, out.trim()), (0, "1a2b"));
    // the ciphertext's qubits were measured by the first decryption
    assert_eq!(bqsm(&["dec", "--key", &key, "--ct", &ct]).0, 1);
    assert_eq!(bqsm(&["mac", "--msg", "0f", "--key", &key, "--out", &tag]).0, 0);
    assert_eq!(bqsm(&["verify", "--key", &key, "--msg", "0e", "--tag", &tag]).0, 2);
}

#[test]
fn asymmetric_round_trip_at_toy_size() {
    let dir = tempfile::tempdir().unwrap();
    let (key, ct) = (p(dir.path(), "k.json"), p(dir.path(), "ct.json"));
    let args = ["enc", "--scheme", "asy", "--toy", "--lambda", "4", "--msg", "c", "--key-out", &key, "--out", &ct];
    assert_eq!(bqsm(&args).0, 0);
    let (code, out, _) = bqsm(&["dec", "--key", &key, "--ct", &ct]);
    assert_eq!((code, out.trim()), (0, "0c"));
}

#[test]
fn encryption_at_lambda_16_refuses_with_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (key, ct) = (p(dir.path(), "k.json"), p(dir.path(), "ct.json"));
    let (code, _, err) = bqsm(&["enc", "--lambda", "16", "--msg", "1a2b", "--key-out", &key, "--out", &ct]);
    assert_eq!(code, 1);
    assert!(err.contains("cap exceeded"), "{err}");
}

#[test]
fn signature_tokens_and_quota() {
    let dir = tempfile::tempdir().unwrap();
    let key = p(dir.path(), "k.json");
    let (sign, ver) = (p(dir.path(), "s.json"), p(dir.path(), "v.json"));
    assert_eq!(bqsm(&["token", "gen", "--family", "sig", "--lambda", "1", "--q", "1", "--key-out", &key]).0, 0);
    assert_eq!(bqsm(&["token", "issue", "--key", &key, "--kind", "sign", "--out", &sign]).0, 0);
    let (code, _, err) = bqsm(&["token", "issue", "--key", &key, "--kind", "sign", "--out", &sign]);
    assert_eq!(code, 1);
    assert!(err.contains("quota"), "{err}");
    let (code, out, _) = bqsm(&["token", "use", "--token", &sign, "--msg", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    let sigma = v["signature"].as_str().unwrap().to_string();
    assert_eq!(bqsm(&["token", "issue", "--key", &key, "--kind", "verify", "--out", &ver]).0, 0);
    let (code, _, _) = bqsm(&["token", "use", "--token", &ver, "--msg", "1", "--sig", &sigma]);
    assert_eq!(code, 0);
}

#[test]
fn decryption_tokens_refuse() {
    let dir = tempfile::tempdir().unwrap();
    let key = p(dir.path(), "k.json");
    assert_eq!(bqsm(&["token", "gen", "--family", "enc", "--lambda", "1", "--q", "2", "--key-out", &key]).0, 0);
    let (code, _, err) = bqsm(&["token", "issue", "--key", &key, "--kind", "dec", "--out", &p(dir.path(), "d.json")]);
    assert_eq!(code, 1);
    assert!(err.contains("too large") || err.contains("exceeds"), "{err}");
}

#[test]
fn entropy_from_a_distribution_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path(), "d.json");
    fs::write(&d, r#"{"width": 4, "support": [{"value_hex": "01", "prob": 0.5}, {"value_hex": "02", "prob": 0.5}]}"#).unwrap();
    let (code, out, _) = bqsm(&["entropy", "--dist", &d, "--l", "1"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["min_entropy"], 1.0);
    assert!(v["privacy_amplification"]["distance"].as_f64().unwrap() <= v["privacy_amplification"]["bound"].as_f64().unwrap());
}

#[test]
fn binary_exit_codes_and_seed_fallback() {
    let exe = env!("CARGO_BIN_EXE_bqsm");
    let status = Command::new(exe).arg("frobnicate").output().unwrap().status;
    assert_eq!(status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.json");
    let b = p(dir.path(), "b.json");
    let out = Command::new(exe).args(["ot", "--m", "64", "--l", "4", "--json", &a]).env("BQSM_SEED", "41").output().unwrap();
    assert!(out.status.success());
    let out = Command::new(exe).args(["ot", "--m", "64", "--l", "4", "--seed", "41", "--json", &b]).env_remove("BQSM_SEED").output().unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let doc: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(doc["header"]["seed"], 41);
}
