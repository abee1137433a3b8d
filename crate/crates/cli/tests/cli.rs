use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn holegrasp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holegrasp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn files_in(dir: &Path) -> Vec<String> {
    match fs::read_dir(dir) {
        Err(_) => Vec::new(),
        Ok(rd) => {
            let mut v: Vec<String> = rd
                .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
                .collect();
            v.sort();
            v
        }
    }
}

#[test]
fn missing_object_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = holegrasp(&["region", "--mu", "0,0,0", "--la", "0.7", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(files_in(&out).is_empty());

    let o = holegrasp(&["region", "--object", "teapot", "--la", "0.7", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--object"));
    assert!(files_in(&out).is_empty());
}

#[test]
fn invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (args, field) in [
        (vec!["region", "--object", "bushing", "--mu", "0,0"], "--mu"),
        (vec!["region", "--object", "bushing", "--mu", "0,-1,0"], "--mu"),
        (vec!["region", "--object", "bushing", "--la", "0.5,1.2"], "--la"),
        (vec!["region", "--object", "bushing", "--mode", "closure"], "--mode"),
        (vec!["region", "--object", "bushing", "--parallel", "0"], "--parallel"),
        (vec!["traj", "--object", "bushing", "--la", "0.9", "--alpha", "90deg"], "--alpha"),
        (vec!["traj", "--object", "bushing", "--la", "0.9", "--alpha", "18deg", "--theta", "100deg"], "--theta"),
        (vec!["simulate", "--object", "bushing", "--alpha", "18deg", "--la-schedule", "0.6:0.9"], "--la-schedule"),
        (vec!["ci", "3/2"], "--records"),
    ] {
        let mut full = args.clone();
        full.extend(["--out-dir", out]);
        let o = holegrasp(&full);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains(field), "{args:?}");
    }
    assert!(files_in(dir.path()).is_empty());
}

#[test]
fn config_violations_are_listed() {
    let o = holegrasp(&["wrench", "--object", "bushing", "--la", "1.5", "--alpha", "18deg", "--beta", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("l_a_out_of_range") && err.contains("beta_out_of_range"), "{err}");
}

#[test]
fn unreadable_catalog_is_an_io_error() {
    let o = holegrasp(&["region", "--object", "bushing", "--catalog", "/nonexistent/objects.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn custom_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("objects.json");
    fs::write(
        &cat,
        r#"[{"name":"tube","a_mm":50,"D_mm":40,"d_mm":30,"cylinder":true,"gripper":{"w_mm":10,"stroke_mm":80}}]"#,
    )
    .unwrap();
    let o = holegrasp(&[
        "wrench", "--catalog", cat.to_str().unwrap(), "--object", "tube", "--la", "0.5", "--alpha", "30deg",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let out = out.to_str().unwrap();
        for args in [
            vec!["region", "--object", "bushing", "--mu", "0.2,0.4,0.4", "--la", "0.6,0.9", "--alpha-step", "3deg", "--beta-step", "3deg"],
            vec!["simulate", "--object", "bushing", "--alpha", "18deg", "--la-schedule", "0.9:0.65", "--mu", "0.2,0.4,0.4", "--la-step", "0.05"],
            vec!["traj", "--object", "bushing", "--alpha", "18deg", "--la", "0.9", "--waypoints", "16"],
        ] {
            let mut full = args;
            full.extend(["--out-dir", out]);
            assert!(holegrasp(&full).status.success());
        }
        out.to_string()
    };
    let (a, b) = (run("a"), run("b"));
    let names = files_in(Path::new(&a));
    assert_eq!(
        names,
        [
            "align.json", "pivot.json", "region_la0.600.csv", "region_la0.600.json",
            "region_la0.900.csv", "region_la0.900.json", "simulate_map.csv", "simulate_map.json",
            "trajectory.csv",
        ]
    );
    for name in names {
        let (x, y) = (fs::read(Path::new(&a).join(&name)).unwrap(), fs::read(Path::new(&b).join(&name)).unwrap());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn frictionless_region_has_empty_flat_column() {
    let dir = tempfile::tempdir().unwrap();
    let o = holegrasp(&["region", "--object", "bushing", "--mu", "0,0,0", "--la", "0.7", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("region_la0.700.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "alpha_deg\\beta_deg");
    assert_eq!(header[1], "0");
    assert_eq!(header.len(), 182);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 179);
    assert!(rows.iter().all(|r| r[1] == "0"));

    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("region_la0.700.json")).unwrap()).unwrap();
    assert_eq!(meta["mode"], "force_balance");
    assert_eq!(meta["l_a"], 0.7);
    assert_eq!(meta["alpha_deg"]["count"], 179);
}

#[test]
fn beta_ub_reports() {
    let o = holegrasp(&["beta-ub", "--object", "bushing", "--mu", "0,0,0.4", "--la", "0.9"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let bound = v["beta_ub_rad"].as_f64().unwrap();
    assert!(bound > 2f64.atan());

    let o = holegrasp(&["beta-ub", "--object", "bushing", "--mu", "0,0,0.4", "--la", "0.3"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["beta_ub_rad"], "none");

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ub.json");
    let o = holegrasp(&[
        "beta-ub", "--object", "bushing", "--mu", "0,0,0.4", "--la", "0.4", "--alpha", "45deg", "--out", file.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"], "infeasible_at_start");
    assert_eq!(fs::read_to_string(&file).unwrap(), stdout(&o));
}

#[test]
fn frictionless_wrench_pairs_coincide() {
    let o = holegrasp(&["wrench", "--object", "bushing", "--alpha", "18deg", "--beta", "0", "--la", "0.9", "--mu", "0,0,0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["label", "m", "fx", "fy"]);
    assert_eq!(rows.len(), 7);
    for pair in rows[1..].chunks(2) {
        assert_eq!(pair[0][1..], pair[1][1..]);
    }
}

#[test]
fn ci_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ci.csv");
    let o = holegrasp(&["ci", "10/10", "9/10", "8/10", "10/10", "10/10", "3/10", "water=0/10", "--out", file.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("object"));
    assert!(lines[1].contains("72.25%") && lines[1].contains("100.00%"));
    assert!(lines[2].contains("59.58%") && lines[2].contains("98.21%"));
    assert!(lines[3].contains("49.02%") && lines[3].contains("94.33%"));
    assert!(lines[7].starts_with("water") && lines[7].contains("27.75%"));
    let csv = fs::read_to_string(&file).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.ends_with("water,0,10,0,0,0.277540169\n"));

    let input = dir.path().join("trials.csv");
    fs::write(&input, "name,successes,trials\nbushing,10,10\nrail,3,10\n").unwrap();
    let o = holegrasp(&["ci", "--csv", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn pivot_json_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = holegrasp(&["traj", "--object", "bushing", "--alpha", "18deg", "--la", "0.9", "--waypoints", "5", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    for name in ["pivot.json", "align.json"] {
        let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(name)).unwrap()).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["p_c", "r", "theta_rad", "waypoints"]);
        assert_eq!(v["waypoints"].as_array().unwrap().len(), 5);
    }
    let pivot: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("pivot.json")).unwrap()).unwrap();
    assert_eq!(pivot["theta_rad"], 1.57079633);
    assert_eq!(pivot["p_c"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn clamped_pivot_stops_at_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = holegrasp(&[
        "traj", "--object", "bushing", "--mu", "0,0,0.4", "--alpha", "0.5deg", "--la", "0.9", "--clamp-beta-ub", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("pivot.json")).unwrap()).unwrap();
    let theta = v["theta_rad"].as_f64().unwrap();
    assert!(theta > 2f64.atan() && theta < 1.2, "{theta}");
}

#[test]
fn simulate_marks_follow_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let o = holegrasp(&[
        "simulate", "--object", "bushing", "--alpha", "18deg", "--la-schedule", "0.9:0.65", "--mu", "0.2,0.4,0.4", "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines[0], "beta_deg,l_a,stable");
    assert_eq!(lines[1], "0,0.9,1");
    assert_eq!(*lines.last().unwrap(), "90,0.65,0");
    assert_eq!(lines.len(), 182);

    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("simulate_map.json")).unwrap()).unwrap();
    assert_eq!(meta["initial_mark"]["l_a"], 0.9);
    assert_eq!(meta["final_mark"]["l_a"], 0.65);
    assert_eq!(meta["final_mark"]["beta_deg"], 90.0);
    let map = fs::read_to_string(dir.path().join("simulate_map.csv")).unwrap();
    assert_eq!(map.lines().count(), 101);
}
