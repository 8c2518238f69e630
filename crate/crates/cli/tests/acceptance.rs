//! Runs `anomalykit verify` twice on the shipped configuration and prints a
//! pass/fail line for every criterion, including rerun determinism.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Stdio};

use serde_json::Value;

/// Wall-clock limits in seconds, by criterion id.
const LIMITS: [(usize, f64); 10] = [
    (1, 10.0),
    (2, 10.0),
    (3, 1.0),
    (4, 5.0),
    (5, 120.0),
    (6, 60.0),
    (7, 60.0),
    (8, 600.0),
    (9, 600.0),
    (10, 30.0),
];

fn verify_into(out: &Path) -> (Option<i32>, Value) {
    let _ = fs::remove_dir_all(out);
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let status = Command::new(env!("CARGO_BIN_EXE_anomalykit"))
        .arg("--config")
        .arg(&config)
        .arg("verify")
        .env("ANOMALYKIT_OUT", out)
        .stdout(Stdio::null())
        .status()
        .expect("spawn anomalykit");
    let manifest = fs::read_to_string(out.join("verify/manifest.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null);
    (status.code(), manifest)
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "manifest.json") {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn main() -> ExitCode {
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let (a, b) = (root.join("first"), root.join("second"));
    let (code, manifest) = verify_into(&a);
    let results: BTreeMap<String, Value> = fs::read_to_string(a.join("verify/verify.json"))
        .ok()
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .and_then(|v| v["data"].as_array().cloned())
        .unwrap_or_default()
        .into_iter()
        .map(|o| (o["id"].to_string(), o))
        .collect();

    let mut failures = 0;
    for (id, limit) in LIMITS {
        let outcome = results.get(&id.to_string());
        let pass = outcome.is_some_and(|o| o["pass"] == true);
        let seconds = manifest["timings"][format!("criterion_{id:02}")].as_f64();
        let in_time = seconds.is_some_and(|s| s <= limit);
        let ok = pass && in_time;
        failures += usize::from(!ok);
        let metrics = outcome.map(|o| o["metrics"].to_string()).unwrap_or_else(|| "missing".into());
        println!(
            "criterion {id:>2}: {} ({:.2} s of {limit} s) {metrics}",
            if ok { "PASS" } else { "FAIL" },
            seconds.unwrap_or(f64::NAN),
        );
    }

    let (code2, _) = verify_into(&b);
    let (fa, fb) = (artifacts(&a), artifacts(&b));
    let identical = !fa.is_empty() && fa == fb;
    failures += usize::from(!identical);
    println!(
        "criterion 11: {} ({} artifacts compared byte for byte)",
        if identical { "PASS" } else { "FAIL" },
        fa.len()
    );

    let expected = if failures == 0 { Some(0) } else { Some(3) };
    if code != code2 || (failures == 0 && code != expected) {
        println!("verify exit codes {code:?} and {code2:?}");
        failures += 1;
    }
    println!("acceptance: {} of 11 criteria failed", failures.min(11));
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
