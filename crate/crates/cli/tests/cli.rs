use std::io::Write;
use std::process::{Command, Output, Stdio};

fn pgfree(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pgfree"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn k5_pipes_into_analyze() {
    let set = pgfree(&["construct", "--kind", "k5"], "");
    let rep = json(&pgfree(&["analyze", "--levels", "3"], &stdout(&set)));
    assert_eq!(rep["size"], 10);
    assert_eq!(rep["matroid_rank"], 4);
    assert_eq!(rep["pg_freeness"]["3"]["found"], false);
    assert_eq!(rep["critical_number"], 3);
    assert_eq!(rep["triangle_count_ordered"], 60);
    assert_eq!(rep["density"], serde_json::json!({"num": 5, "den": 8}));
}

#[test]
fn compact_output_round_trips() {
    let compact = stdout(&pgfree(
        &[
            "construct",
            "--kind",
            "bose-burton",
            "--rank",
            "4",
            "--level",
            "2",
            "--format",
            "compact",
        ],
        "",
    ));
    assert_eq!(compact.trim(), "4:ff00");
    let rep = json(&pgfree(&["count-triangles"], &compact));
    assert_eq!(rep["ordered"], 0);
}

#[test]
fn zero_point_is_a_parse_error() {
    let out = pgfree(&["analyze"], r#"{"rank": 3, "points": [0, 1, 2]}"#);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");
}

#[test]
fn bad_flags_exit_one() {
    assert_eq!(pgfree(&["verify", "--rank"], "").status.code(), Some(1));
    assert_eq!(pgfree(&["frobnicate"], "").status.code(), Some(1));
    let out = pgfree(&["verify", "--rank", "5", "--level", "3", "--mode", "exhaustive"], "");
    assert_eq!(out.status.code(), Some(1));
    let out = pgfree(&["verify", "--rank", "4", "--level", "3", "--checks", "thm-9"], "");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exhaustive_verify_passes() {
    let out = pgfree(
        &[
            "verify",
            "--rank",
            "4",
            "--level",
            "3",
            "--mode",
            "exhaustive",
            "--checks",
            "thm-1.1,cor-1.3",
        ],
        "",
    );
    let v = json(&out);
    assert_eq!(v["checks"]["thm-1.1"]["violations"], 0);
    assert_eq!(v["checks"]["cor-1.3"]["violations"], 0);
    assert_eq!(v["universe"], 32768);
}

#[test]
fn verify_writes_artifacts() {
    let dir = std::env::temp_dir().join(format!("pgfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("outcome.json");
    let csv_path = dir.join("records.csv");
    let out = pgfree(
        &[
            "verify",
            "--rank",
            "5",
            "--level",
            "3",
            "--samples",
            "200",
            "--seed",
            "3",
            "--density-filter",
            "1/2",
            "--checks",
            "thm-3.1,bose-burton",
            "--out",
            out_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ],
        "",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(
        v["examined"].as_u64().unwrap() + v["filtered_out"].as_u64().unwrap(),
        200
    );
    assert_eq!(v["config"]["density_filter"], serde_json::json!({"num": 1, "den": 2}));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("check,record,set,size,rank,chi,T_E,epsilon_min,flat_found,flat_size\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn node_budget_maps_to_exit_three() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let points: Vec<u32> = (1..1u32 << 14).filter(|_| rng.gen_bool(0.5)).collect();
    let set = serde_json::json!({"rank": 14, "points": points}).to_string();
    let out = pgfree(&["analyze", "--levels", "2", "--max-nodes", "100"], &set);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn spectrum_lists_top_coefficients() {
    let set = stdout(&pgfree(
        &["construct", "--kind", "affine", "--rank", "4", "--gamma", "3"],
        "",
    ));
    let v = json(&pgfree(&["spectrum", "--top", "2"], &set));
    assert_eq!(v["epsilon_min"], serde_json::json!({"num": 1, "den": 2}));
    assert_eq!(v["top"][0], serde_json::json!({"gamma": 3, "coefficient": -8}));
    assert_eq!(v["top"].as_array().unwrap().len(), 2);
}

#[test]
fn cone_and_find_flat() {
    let set = stdout(&pgfree(
        &["construct", "--kind", "bose-burton", "--rank", "5", "--level", "3"],
        "",
    ));
    let v = json(&pgfree(&["cone", "--point", "8", "--level", "3"], &set));
    assert_eq!(v["report"]["cone_free"], true);
    assert_eq!(v["size"], v["report"]["cone_size"]);
    let missing = pgfree(&["cone", "--point", "1"], &set);
    assert_eq!(missing.status.code(), Some(1));
    let f = json(&pgfree(
        &["find-flat", "--level", "3", "--strategy", "exhaustive"],
        &set,
    ));
    assert_eq!(f["result"]["found"], true);
    assert_eq!(f["result"]["density_claim_holds"], true);
}

#[test]
fn graphic_from_edge_list() {
    let dir = std::env::temp_dir().join(format!("pgfree-graph-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k4.txt");
    std::fs::write(&path, "# K4\n0 1\n0 2\n0 3\n1,2\n1 3\n2 3\n").unwrap();
    let v = json(&pgfree(
        &["construct", "--kind", "graphic", "--edges", path.to_str().unwrap()],
        "",
    ));
    assert_eq!(v["rank"], 3);
    assert_eq!(v["points"].as_array().unwrap().len(), 6);
    std::fs::write(&path, "0 1\n0 x\n").unwrap();
    let bad = pgfree(
        &["construct", "--kind", "graphic", "--edges", path.to_str().unwrap()],
        "",
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).unwrap();
}
