use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn phaseless(args: &[&str]) -> Output {
    phaseless_env(args, &[])
}

fn phaseless_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_phaseless"));
    cmd.args(args).env_remove("PHASELESS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every regular file below `dir`, relative, with `/` separators.
fn files_under(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap();
                out.insert(rel.components().map(|c| c.as_os_str().to_str().unwrap()).collect::<Vec<_>>().join("/"));
            }
        }
    }
    out
}

fn assert_manifest_complete(dir: &Path) {
    let listed: BTreeSet<String> =
        manifest(dir)["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
    assert_eq!(listed, files_under(dir));
}

#[test]
fn synthesize_writes_grid_sized_tables_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = phaseless(&["synthesize", "--seed", "7", "--noise", "0.02", "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["farfield.csv", "data.csv", "exact_curve.csv", "config.toml"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let farfield = fs::read_to_string(a.join("farfield.csv")).unwrap();
    let lines: Vec<&str> = farfield.lines().collect();
    assert_eq!(lines[0], "t,re,im,abs2");
    assert_eq!(lines.len(), 1 + 64);
    // 17 significant digits, parse back exactly
    let field = lines[5].split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17);
    let v: f64 = field.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), field);

    let m = manifest(&a);
    assert_eq!(m["seed"], 7);
    assert_eq!(m["command"], "synthesize");
    assert_manifest_complete(&a);

    // the recorded config reproduces the data
    let c = tmp.path().join("c");
    let o = phaseless(&["synthesize", "--config", s(&a.join("config.toml")), "--out", s(&c)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(a.join("data.csv")).unwrap(), fs::read(c.join("data.csv")).unwrap());
}

#[test]
fn preset_then_reconstruct_from_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let o = phaseless(&["run-preset", "rectangle", "--out", s(&run), "--dump-matrix"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("converged"));
    assert_manifest_complete(&run);
    let m = manifest(&run);
    assert_eq!(m["termination"], "converged");
    let k = m["iterations"].as_u64().unwrap() as usize;

    let errors = fs::read_to_string(run.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 1 + k + 1);
    let updates = fs::read_to_string(run.join("updates.csv")).unwrap();
    assert_eq!(updates.lines().count(), 1 + k);
    // 2M + 3 = 13 step components after k, lambda, condition
    assert_eq!(updates.lines().next().unwrap().split(',').count(), 3 + 13);
    assert!(run.join(format!("curves/curve_{k:04}.csv")).exists());
    let curve: Value = serde_json::from_str(&fs::read_to_string(run.join("final_curve.json")).unwrap()).unwrap();
    assert_eq!(curve["M"], 5);
    assert_eq!(curve["coeffs"].as_array().unwrap().len(), 11);

    // 2 components x 64 knots, complex f64 entries
    let dump = fs::read(run.join("field_matrix.bin")).unwrap();
    assert_eq!(&dump[..8], b"PLMXC64\0");
    assert_eq!(dump.len(), 8 + 16 + 128 * 128 * 16);

    let again = tmp.path().join("again");
    let o = phaseless(&[
        "reconstruct",
        "--config",
        s(&run.join("config.toml")),
        "--data",
        s(&run.join("data.csv")),
        "--out",
        s(&again),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(run.join("errors.csv")).unwrap(), fs::read(again.join("errors.csv")).unwrap());
    assert_manifest_complete(&again);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let syn = tmp.path().join("syn");
    assert_eq!(code(&phaseless(&["synthesize", "--out", s(&syn)])), 0);
    let data = syn.join("farfield.csv");

    // budget exhausted
    let o = phaseless(&["reconstruct", "--data", s(&data), "--max-iter", "2", "--out", s(&tmp.path().join("b"))]);
    assert_eq!(code(&o), 4);
    assert_eq!(manifest(&tmp.path().join("b"))["termination"], "budget");

    // grid mismatch
    let cfg = tmp.path().join("n16.toml");
    fs::write(&cfg, "[solver]\nn = 16\n").unwrap();
    let o = phaseless(&["reconstruct", "--config", s(&cfg), "--data", s(&data), "--out", s(&tmp.path().join("g"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid"));

    // unknown key, overlapping ball, bad noise level, missing data file
    let bogus = tmp.path().join("bogus.toml");
    fs::write(&bogus, "[solver]\nbogus = 1\n").unwrap();
    assert_eq!(code(&phaseless(&["synthesize", "--config", s(&bogus), "--out", s(&tmp.path().join("x"))])), 2);
    assert_eq!(code(&phaseless(&["synthesize", "--ball-center", "0,0", "--out", s(&tmp.path().join("x"))])), 2);
    assert_eq!(code(&phaseless(&["synthesize", "--noise", "1.5", "--out", s(&tmp.path().join("x"))])), 2);
    let missing = tmp.path().join("missing.csv");
    assert_eq!(code(&phaseless(&["reconstruct", "--data", s(&missing), "--out", s(&tmp.path().join("x"))])), 2);

    // unknown preset and suite
    assert_eq!(code(&phaseless(&["run-preset", "banana"])), 2);
    assert_eq!(code(&phaseless(&["oracle", "banana"])), 2);
}

#[test]
fn freeze_flag_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("off");
    let o = phaseless(&["run-preset", "apple", "--freeze-modes", "off", "--max-iter", "1", "--out", s(&out)]);
    assert!([0, 4].contains(&code(&o)));
    let m = manifest(&out);
    assert_eq!(m["config"]["solver"]["freeze_modes"], false);
    assert_eq!(m["config"]["solver"]["max_iterations"], 1);
}

#[test]
fn oracle_suites_pass() {
    let o = phaseless(&["oracle", "all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    for suite in ["mie", "weights", "gradient", "translation"] {
        assert!(out.contains(&format!("PASS [{suite}]")), "{out}");
    }
    assert!(!out.contains("FAIL"));
}

#[test]
fn sweep_respects_thread_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let o = phaseless_env(&["sweep", "--max-iter", "2", "--out", s(&out)], &[("PHASELESS_THREADS", "2")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 8);
    let m = manifest(&out);
    assert_eq!(m["threads"], 2);
    assert_eq!(m["cells"].as_array().unwrap().len(), 8);
    // per-cell seeds are base + index
    let seeds: Vec<u64> = m["cells"].as_array().unwrap().iter().map(|c| c["noise"]["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, (1..=8).collect::<Vec<_>>());
    assert_manifest_complete(&out);

    for bad in ["0", "zero", "-3"] {
        let o = phaseless_env(&["sweep", "--max-iter", "1", "--out", s(&tmp.path().join("bad"))], &[("PHASELESS_THREADS", bad)]);
        assert_eq!(code(&o), 2, "PHASELESS_THREADS={bad}");
    }
}
