//! End-to-end tests through the compiled binary: exit codes, frozen CSV
//! bytes, JSON round-trips, shard determinism, and file output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn balanced(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balanced"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn balanced_subgroup_all_methods_agree() {
    let out = balanced(&["balanced", "--d", "24", "--h", "17", "--method", "all"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.matches(": balanced").count(), 3);
    assert!(!text.contains("DISAGREEMENT"));
}

#[test]
fn balanced_subgroup_prints_witness_when_unbalanced() {
    let out = balanced(&["balanced", "--d", "8", "--p", "3", "--method", "all"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.matches("not balanced").count(), 3);
    assert!(text.contains("coset") || text.contains("character"));
}

#[test]
fn balanced_subgroup_json_reports_each_method() {
    let out = balanced(&[
        "balanced", "--d", "60", "--h", "41,49", "--method", "all", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["d"], 60);
    assert_eq!(doc["order"], 4);
    assert_eq!(doc["agree"], true);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    assert!(results.iter().all(|r| r["balanced"] == true));
    // round-trip: parse -> re-emit -> parse gives the same document
    let again: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn too_small_modulus_is_a_usage_error() {
    let out = balanced(&["balanced", "--d", "2", "--h", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_generators_is_a_usage_error() {
    let out = balanced(&["balanced", "--d", "24"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn order2_scan_csv_is_frozen() {
    let out = balanced(&["order2-scan", "--d-max", "200", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "d,h\n24,17\n24,19\n60,41\n60,49\n");
}

#[test]
fn order2_scan_json_lists_pairs() {
    let out = balanced(&["order2-scan", "--d-max", "100", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let pairs = doc.as_array().unwrap();
    assert_eq!(pairs.len(), 4);
    assert_eq!(pairs[0], serde_json::json!({"d": 24, "h": 17}));
}

#[test]
fn census_record_csv_is_frozen_for_tiny_scan() {
    let out = balanced(&[
        "census", "--p", "3", "--x-max", "10", "--records", "--format", "csv",
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout_of(&out),
        "d,j,m,l_p_m,f_p_m,in_Bp,in_Bp0,in_Bp1,in_Bpstar\n\
         4,2,1,1,1,1,1,1,0\n\
         5,0,5,4,4,1,0,1,1\n\
         7,0,7,6,3,1,0,1,1\n\
         8,3,1,1,1,0,0,0,0\n\
         10,1,5,4,4,1,0,1,1\n"
    );
}

#[test]
fn census_output_is_identical_across_shard_counts() {
    let run = |shards: &str| {
        let out = balanced(&[
            "census", "--p", "-3", "--x-max", "2000", "--checkpoints", "500,2000",
            "--members-only", "--shards", shards, "--format", "json",
        ]);
        assert!(out.status.success());
        stdout_of(&out)
    };
    let one = run("1");
    assert_eq!(one, run("3"));

    // the env var supplies the default shard count without changing output
    let out = Command::new(env!("CARGO_BIN_EXE_balanced"))
        .args([
            "census", "--p", "-3", "--x-max", "2000", "--checkpoints", "500,2000",
            "--members-only", "--format", "json",
        ])
        .env("BALANCED_SHARDS", "2")
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert_eq!(one, stdout_of(&out));
}

#[test]
fn census_json_round_trips() {
    let out = balanced(&[
        "census", "--p", "5", "--x-max", "300", "--records", "--format", "json",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["p"], 5);
    assert_eq!(doc["x_max"], 300);
    assert!(doc["checkpoints"][0]["Bp"].is_u64());
    let again: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn census_without_records_emits_checkpoint_csv() {
    let out = balanced(&["census", "--p", "3", "--x-max", "100", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("x,Bp,Bp0,Bp1,Bpstar,Bp0_norm,ratio_star_over_B1\n"));
    assert_eq!(text.lines().count(), 2); // header plus the default checkpoint
}

#[test]
fn rank_report_json_has_fixed_key_order() {
    let out = balanced(&["rank", "--q", "81", "--d", "10", "--format", "json"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("{\"q\":81,\"p\":3,\"f\":4,\"d\":10,\"rows\":["));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["rank"], 8);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn rank_spot_value_in_text_mode() {
    let out = balanced(&["rank", "--q", "3", "--d", "4"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("rank = 1"));
}

#[test]
fn rank_rejects_non_prime_power_field_size() {
    let out = balanced(&["rank", "--q", "12", "--d", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_csv_rows_and_trailer() {
    let out = balanced(&["stats", "--q", "3", "--x-max", "10", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("d,rank\n1,0\n2,0\n4,1\n5,1\n7,1\n8,1\n10,2\n"));
    assert!(text.contains("# average,0.6\n"));
    assert!(text.contains("# max_rank,2\n"));
    assert!(text.contains("# argmax_d,10\n"));
}

#[test]
fn stats_json_round_trips() {
    let out = balanced(&["stats", "--q", "9", "--x-max", "20", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["q"], 9);
    assert_eq!(doc["p"], 3);
    let again: serde_json::Value =
        serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn output_flag_writes_the_file_instead_of_stdout() {
    let path: PathBuf = std::env::temp_dir().join(format!(
        "balanced-cli-test-{}.csv",
        std::process::id()
    ));
    let out = balanced(&[
        "order2-scan", "--d-max", "100", "--format", "csv",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, "d,h\n24,17\n24,19\n60,41\n60,49\n");
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_subcommand_advertises_tiers() {
    let out = balanced(&["verify", "--help"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("quick"));
    assert!(text.contains("full"));
}
