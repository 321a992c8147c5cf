use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const GHZ9: &str = "d = 9\nparty a = 0\nparty b = 1\nparty c = 2\ngen = X0 X1 X2\ngen = Z0 Z1^8\ngen = Z0 Z2^8\n";
const GHZ3: &str = "d = 3\nparty a = 0\nparty b = 1\nparty c = 2\ngen = X0 X1 X2\ngen = Z0 Z1^2\ngen = Z1 Z2^2\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qudit-extract"))
}

/// Per-test scratch directory under the target dir.
fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p
}

fn exec(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

/// Validates `v` against the named definition of the shipped schema.
fn assert_schema(def: &str, v: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let mut schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    schema["$ref"] = Value::String(format!("#/$defs/{def}"));
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{def}: {errors:?}");
}

#[test]
fn decompose_ghz9() {
    let dir = scratch("decompose_ghz9");
    let g = write(&dir, "g.txt", GHZ9);
    let (code, out, err) = exec(bin().arg("decompose").arg(&g).arg("--verify").arg("--trace").args(["--seed", "17"]));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_schema("report", &v);
    assert_eq!(v["n_ghz"], 2);
    assert_eq!(v["seed"], 17);
    assert_eq!(v["verification"]["passed"], true);
    assert!(v["trace"][0]["spm"].is_object());
}

#[test]
fn decompose_product_state_and_out_file() {
    let dir = scratch("decompose_product");
    let g = write(
        &dir,
        "g.txt",
        "d = 4\nparty a = 0\nparty b = 1,2\nparty c =\ngen = Z0\ngen = X1^2\ngen = Z1^2\ngen = X2\n",
    );
    let out = dir.join("r.json");
    let (code, stdout, err) = exec(bin().arg("decompose").arg(&g).arg("--verify").arg("--out").arg(&out));
    assert_eq!(code, 0, "{err}");
    assert!(stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_schema("report", &v);
    for k in ["n_ghz", "n_ab", "n_ac", "n_bc"] {
        assert_eq!(v[k], 0, "{k}");
    }
    assert_eq!((v["n_a"].as_u64(), v["n_b"].as_u64(), v["n_c"].as_u64()), (Some(2), Some(4), Some(0)));
}

#[test]
fn decompose_composite() {
    let dir = scratch("decompose_composite");
    let g = write(&dir, "g.txt", "d = 6\nparty a = 0\nparty b = 1\ngen = X0 X1\ngen = Z0 Z1^5\n");
    let (code, out, err) = exec(bin().arg("decompose").arg(&g).arg("--verify"));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_schema("report", &v);
    assert_eq!(v["p"], Value::Null);
    assert_eq!(v["n_ab"], 2);
    assert_eq!(v["factors"].as_array().unwrap().len(), 2);

    // The composite report verifies factor by factor.
    let r = write(&dir, "r.json", &out);
    let (code, out, err) = exec(bin().arg("verify").arg(&g).arg(&r));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_schema("verification_output", &v);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn decompose_exit_codes() {
    let dir = scratch("decompose_exit_codes");
    let bad = write(&dir, "bad.txt", "d = 3\nparty a = 0\ngen = Y0\n");
    let (code, _, err) = exec(bin().arg("decompose").arg(&bad));
    assert_eq!(code, 2);
    assert!(err.contains("line 3, column 7"), "{err}");

    // Validation failures are printed as reported.
    let noncommuting = write(&dir, "nc.txt", "d = 3\nparty a = 0\ngen = X0\ngen = Z0\n");
    let (code, _, err) = exec(bin().arg("decompose").arg(&noncommuting));
    assert_eq!(code, 2);
    assert!(err.contains("generators 0 and 1 do not commute (phase 2)"), "{err}");

    let mixed = write(&dir, "mixed.txt", "d = 3\nparty a = 0,1\ngen = Z0\n");
    assert_eq!(exec(bin().arg("decompose").arg(&mixed)).0, 2);
    assert_eq!(exec(bin().arg("decompose").arg(dir.join("missing.txt"))).0, 2);

    let ghz = write(&dir, "g.txt", GHZ9);
    let (code, _, err) = exec(bin().arg("decompose").arg(&ghz).args(["--max-iter", "1"]));
    assert_eq!(code, 3);
    assert!(err.contains("iteration bound 1"), "{err}");
    let (code, _, err) = exec(bin().arg("decompose").arg(&ghz).arg("--verify").args(["--cap", "100"]));
    assert_eq!(code, 4);
    assert!(err.contains("exceeds cap 100"), "{err}");
}

#[test]
fn spm_text_and_json() {
    let dir = scratch("spm");
    let g = write(&dir, "g.txt", GHZ3);
    let (code, out, _) = exec(bin().arg("spm").arg(&g));
    assert_eq!(code, 0);
    assert!(out.contains("M_a =\n  0 1 0\n  2 0 0\n  0 0 0\n"), "{out}");
    assert!(out.contains("M_b =\n  0 2 1\n  1 0 0\n  2 0 0\n"), "{out}");
    assert!(out.contains("M_c =\n  0 0 2\n  0 0 0\n  1 0 0\n"), "{out}");
    assert!(out.contains("M'_a (mod 3) =\n"), "{out}");

    let (code, out, _) = exec(bin().arg("spm").arg(&g).arg("--json"));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_schema("spm_output", &v);
    assert_eq!(v["parties"][1]["m"], serde_json::json!([[0, 2, 1], [1, 0, 0], [2, 0, 0]]));

    let single = write(&dir, "single.txt", "d = 9\nparty a = 0,1,2\ngen = X0 X1 X2\ngen = Z0 Z1^8\ngen = Z0 Z2^8\n");
    let (_, out, _) = exec(bin().arg("spm").arg(&single).arg("--json"));
    assert_eq!(
        serde_json::from_str::<Value>(&out).unwrap()["parties"][0]["m"],
        serde_json::json!([[0, 0, 0], [0, 0, 0], [0, 0, 0]])
    );

    let empty = write(&dir, "empty.txt", "d = 4\nparty a = 0\nparty b = 1\n");
    let (code, out, _) = exec(bin().arg("spm").arg(&empty));
    assert_eq!(code, 0);
    assert!(out.contains("M_a = []\n") && out.contains("M_b = []\n"), "{out}");
}

#[test]
fn verify_log_files() {
    let dir = scratch("verify");
    let g = write(
        &dir,
        "g.txt",
        "d = 8\nparty a = 0\nparty b = 1\nparty c = 2\ngen = X0 X1 X2\ngen = Z0 Z1^7\ngen = Z1 Z2^7\n",
    );
    let (code, report, err) = exec(bin().arg("decompose").arg(&g));
    assert_eq!(code, 0, "{err}");
    let report: Value = serde_json::from_str(&report).unwrap();
    assert_schema("log", &report["log"]);

    let log = write(&dir, "log.json", &report["log"].to_string());
    let (code, out, err) = exec(bin().arg("verify").arg(&g).arg(&log));
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_schema("verification_output", &v);
    assert_eq!(v["passed"], true);

    // Dropping the final operation leaves the state short of the canonical form.
    let mut entries = report["log"]["entries"].as_array().unwrap().clone();
    assert!(!entries.is_empty());
    entries.pop();
    let truncated = write(&dir, "short.json", &serde_json::json!({ "entries": entries }).to_string());
    let (code, out, _) = exec(bin().arg("verify").arg(&g).arg(&truncated));
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["fidelity"].as_f64().unwrap() < 1.0 - 1e-8);

    let (code, _, err) = exec(bin().arg("verify").arg(&g).arg(&log).args(["--cap", "64"]));
    assert_eq!(code, 4);
    assert!(err.contains("cap 64"), "{err}");

    let junk = write(&dir, "junk.json", "{ not json");
    assert_eq!(exec(bin().arg("verify").arg(&g).arg(&junk)).0, 2);
}

#[test]
fn random_is_reproducible() {
    let run = |args: &[&str]| exec(bin().arg("random").args(args));
    let (code, a, _) = run(&["--d", "9", "--n", "3", "--seed", "5"]);
    assert_eq!(code, 0);
    assert_eq!(a, run(&["--d", "9", "--n", "3", "--seed", "5"]).1);
    assert_ne!(a, run(&["--d", "9", "--n", "3", "--seed", "6"]).1);
    assert!(a.starts_with("# random group: d = 9, n = 3, parties = 3, seed = 5"));

    let (code, c, _) = run(&["--d", "6", "--n", "2", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(c.lines().any(|l| l == "d = 6"), "{c}");

    for seed in 0..20 {
        let s = seed.to_string();
        let (code, g, _) = run(&["--d", "8", "--n", "3", "--gens-max", "4", "--seed", &s]);
        assert_eq!(code, 0);
        assert!(g.lines().filter(|l| l.starts_with("gen =")).count() <= 4, "{g}");
    }
    assert_eq!(run(&["--d", "8", "--n", "3", "--gens-max", "2"]).0, 2);
    assert_eq!(run(&["--d", "1", "--n", "3"]).0, 2);
}

#[test]
fn random_groups_decompose_and_verify() {
    let dir = scratch("random_pipeline");
    for (d, seed) in [(4u64, 7u64), (8, 1), (9, 12), (5, 3), (12, 2)] {
        let (_, text, _) =
            exec(bin().arg("random").args(["--d", &d.to_string(), "--n", "3", "--seed", &seed.to_string()]));
        let g = write(&dir, &format!("g{d}_{seed}.txt"), &text);
        let (code, out, err) = exec(bin().arg("decompose").arg(&g).arg("--verify"));
        assert_eq!(code, 0, "d={d} seed={seed}: {err}");
        assert_schema("report", &serde_json::from_str(&out).unwrap());
        let r = write(&dir, &format!("r{d}_{seed}.json"), &out);
        assert_eq!(exec(bin().arg("verify").arg(&g).arg(&r)).0, 0, "d={d} seed={seed}");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let dir = scratch("schema_negative");
    let g = write(&dir, "g.txt", GHZ9);
    let (_, out, _) = exec(bin().arg("decompose").arg(&g));
    let good: Value = serde_json::from_str(&out).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    assert!(validator.is_valid(&good));
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("n_ghz");
    assert!(!validator.is_valid(&missing));
    let mut bad_op = good.clone();
    bad_op["log"]["entries"][0]["op"]["op"] = Value::String("teleport".into());
    assert!(!validator.is_valid(&bad_op));
    let mut bad_gate = good;
    bad_gate["log"]["entries"][0]["op"] = serde_json::json!({ "op": "gate", "gate": "cz", "a": 0 });
    assert!(!validator.is_valid(&bad_gate));
}
