//! End-to-end runs of the `kfuse` binary: generate -> fuse -> evaluate ->
//! analyze through real files, plus exit-code and format checks.

use std::process::Command;

fn kfuse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kfuse"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().expect("spawn kfuse");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn full_pipeline_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let synth = dir.path().join("synth");
    let stdout = run_ok(kfuse().args([
        "generate",
        "--out-dir",
        synth.to_str().unwrap(),
        "--items",
        "400",
        "--sources",
        "200",
        "--seed",
        "11",
    ]));
    assert!(stdout.contains("generated"));
    for f in ["records.tsv", "kb.tsv", "truth.tsv", "summary.json"] {
        assert!(synth.join(f).exists(), "missing {f}");
    }
    let gen_summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(synth.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(gen_summary["config"]["seed"], 11);

    // vote fuse
    let probs = dir.path().join("probs.tsv");
    let diag = dir.path().join("diag.json");
    run_ok(kfuse().args([
        "fuse",
        "--records",
        synth.join("records.tsv").to_str().unwrap(),
        "--method",
        "vote",
        "--granularity",
        "extractor-url",
        "--out",
        probs.to_str().unwrap(),
        "--diagnostics",
        diag.to_str().unwrap(),
    ]));
    let diag_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&diag).unwrap()).unwrap();
    assert_eq!(diag_json["config"]["method"], "vote");
    assert!(diag_json["config"]["seed"].is_u64());
    assert_eq!(diag_json["coverage"], 1.0);

    // every line of the probabilities TSV has 4 columns, prob with 9 decimals
    let body = std::fs::read_to_string(&probs).unwrap();
    let mut lines = 0;
    for line in body.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 4, "bad line: {line}");
        if !fields[3].is_empty() {
            let decimals = fields[3].split('.').nth(1).unwrap_or("");
            assert_eq!(decimals.len(), 9, "bad precision: {line}");
            let p: f64 = fields[3].parse().unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
        lines += 1;
    }
    assert_eq!(
        lines,
        gen_summary["unique_triples"].as_u64().unwrap() as usize
    );

    // preset fuse with gold
    let probs2 = dir.path().join("probs_plus.tsv");
    let diag2 = dir.path().join("diag_plus.json");
    run_ok(kfuse().args([
        "fuse",
        "--records",
        synth.join("records.tsv").to_str().unwrap(),
        "--preset",
        "popaccu-plus",
        "--gold",
        synth.join("kb.tsv").to_str().unwrap(),
        "--threads",
        "2",
        "--out",
        probs2.to_str().unwrap(),
        "--diagnostics",
        diag2.to_str().unwrap(),
    ]));
    let diag2_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&diag2).unwrap()).unwrap();
    assert_eq!(diag2_json["config"]["method"], "popaccu");
    assert_eq!(
        diag2_json["config"]["granularity"],
        "extractor-site-pred-pattern"
    );
    assert_eq!(diag2_json["config"]["filter_coverage"], true);
    assert_eq!(diag2_json["config"]["min_prov_accuracy"], 0.5);
    assert_eq!(diag2_json["config"]["gold_init_sample_rate"], 1.0);

    // evaluate
    let eval_dir = dir.path().join("eval");
    let stdout = run_ok(kfuse().args([
        "evaluate",
        "--preds",
        probs2.to_str().unwrap(),
        "--kb",
        synth.join("kb.tsv").to_str().unwrap(),
        "--buckets",
        "20",
        "--out-dir",
        eval_dir.to_str().unwrap(),
    ]));
    assert!(stdout.contains("wdev"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(eval_dir.join("summary.json")).unwrap())
            .unwrap();
    for key in ["deviation", "weighted_deviation", "auc_pr", "coverage"] {
        assert!(summary[key].is_f64() || summary[key].is_u64(), "missing {key}");
    }
    let calib = std::fs::read_to_string(eval_dir.join("calibration.csv")).unwrap();
    assert!(calib.starts_with("bucket_low,bucket_high,count,mean_predicted,real_probability"));
    assert_eq!(calib.lines().count(), 22); // header + 21 buckets
    let pr = std::fs::read_to_string(eval_dir.join("pr.csv")).unwrap();
    assert!(pr.starts_with("recall,precision"));

    // analyze
    let analyze_dir = dir.path().join("analysis");
    run_ok(kfuse().args([
        "analyze",
        "--records",
        synth.join("records.tsv").to_str().unwrap(),
        "--kb",
        synth.join("kb.tsv").to_str().unwrap(),
        "--out-dir",
        analyze_dir.to_str().unwrap(),
    ]));
    for f in [
        "kappa.csv",
        "strata_provenances.csv",
        "strata_extractors.csv",
        "strata_sources.csv",
        "strata_confidence.csv",
        "strata_predicate.csv",
        "strata_provenances_extractors.csv",
        "confidence_coverage.csv",
        "summary.json",
    ] {
        assert!(analyze_dir.join(f).exists(), "missing {f}");
    }
    let kappa = std::fs::read_to_string(analyze_dir.join("kappa.csv")).unwrap();
    assert!(kappa.starts_with("extractor_a,extractor_b,kappa"));
    // 3 extractors -> 3 unordered pairs
    assert_eq!(kappa.lines().count(), 4);
}

#[test]
fn gzip_records_are_accepted() {
    use std::io::Write;
    let dir = tempfile::tempdir().unwrap();
    let gz_path = dir.path().join("records.tsv.gz");
    let mut enc = flate2::write::GzEncoder::new(
        std::fs::File::create(&gz_path).unwrap(),
        flate2::Compression::default(),
    );
    enc.write_all(b"s\tp\ta\tE1\tx.org/1\t\t\ns\tp\ta\tE2\tx.org/2\t\t\ns\tp\tb\tE3\tx.org/3\t\t\n")
        .unwrap();
    enc.finish().unwrap();
    let probs = dir.path().join("p.tsv");
    run_ok(kfuse().args([
        "fuse",
        "--records",
        gz_path.to_str().unwrap(),
        "--method",
        "vote",
        "--out",
        probs.to_str().unwrap(),
        "--diagnostics",
        dir.path().join("d.json").to_str().unwrap(),
    ]));
    let body = std::fs::read_to_string(&probs).unwrap();
    assert!(body.contains("0.666666667"));
    assert!(body.contains("0.333333333"));
}

#[test]
fn usage_errors_exit_one() {
    let out = kfuse().arg("fuse").arg("--no-such-flag").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = kfuse().arg("bogus-command").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = kfuse()
        .args(["fuse", "--records", "x.tsv", "--method", "bayes"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "bad enum value is a usage error");
    let out = kfuse().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.tsv");
    let out = kfuse()
        .args([
            "fuse",
            "--records",
            missing.to_str().unwrap(),
            "--method",
            "vote",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // vote with accuracy refinements is a data-level config error
    let records = dir.path().join("r.tsv");
    std::fs::write(&records, "s\tp\to\tE\tu.org/1\t\t\n").unwrap();
    let out = kfuse()
        .args([
            "fuse",
            "--records",
            records.to_str().unwrap(),
            "--method",
            "vote",
            "--filter-coverage",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuse_without_method_or_preset_fails() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("r.tsv");
    std::fs::write(&records, "s\tp\to\tE\tu.org/1\t\t\n").unwrap();
    let out = kfuse()
        .args(["fuse", "--records", records.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--method"), "stderr: {err}");
}

#[test]
fn min_confidence_filters_records() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("r.tsv");
    // two values: "a" with low confidence, "b" with high, "c" without
    std::fs::write(
        &records,
        "s\tp\ta\tE1\tu.org/1\t\t0.05\ns\tp\tb\tE2\tu.org/2\t\t0.9\ns\tp\tc\tE3\tu.org/3\t\t\n",
    )
    .unwrap();
    let probs = dir.path().join("p.tsv");
    run_ok(kfuse().args([
        "fuse",
        "--records",
        records.to_str().unwrap(),
        "--method",
        "vote",
        "--min-confidence",
        "0.1",
        "--out",
        probs.to_str().unwrap(),
        "--diagnostics",
        dir.path().join("d.json").to_str().unwrap(),
    ]));
    let body = std::fs::read_to_string(&probs).unwrap();
    // "a" dropped; "b" and "c" split the item's mass
    assert_eq!(body.lines().count(), 2);
    assert!(body.contains("0.500000000"));
}
