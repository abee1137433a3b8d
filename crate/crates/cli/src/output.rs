//! Plot-ready CSV and JSON renderings. Every number goes through
//! [`num`] so reruns are byte-identical.

use holegrasp::maneuver::{AlignPlan, GraspTrajectory, PivotPlan};
use holegrasp::stability::{LaBetaMap, RegionMap};
use holegrasp::stats::ConfidenceInterval;
use holegrasp::{CatalogEntry, FrictionSet, WrenchBasis};
use serde_json::{json, Value};

/// Rounds to 9 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn num(x: f64) -> String {
    round_sig(x).to_string()
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn grid_table(corner: &str, rows: &[f64], cols_deg: &[f64], cell: impl Fn(usize, usize) -> bool) -> String {
    let mut out = Vec::with_capacity(rows.len() + 1);
    let mut header = vec![corner.to_string()];
    header.extend(cols_deg.iter().map(|b| num(*b)));
    out.push(header);
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![num(*r)];
        row.extend((0..cols_deg.len()).map(|j| flag(cell(i, j))));
        out.push(row);
    }
    csv_string(out)
}

fn degrees(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.to_degrees()).collect()
}

/// Rows are alpha (degrees), columns beta (degrees), cells 0/1.
pub fn region_csv(map: &RegionMap) -> String {
    grid_table(
        "alpha_deg\\beta_deg",
        &degrees(&map.alpha_axis),
        &degrees(&map.beta_axis),
        |i, j| map.get(i, j),
    )
}

/// Rows are l_a, columns beta (degrees).
pub fn la_beta_csv(map: &LaBetaMap) -> String {
    grid_table("l_a\\beta_deg", &map.la_axis, &degrees(&map.beta_axis), |i, j| {
        map.get(i, j)
    })
}

fn axis_meta(values_deg: &[f64]) -> Value {
    let step = if values_deg.len() > 1 {
        values_deg[1] - values_deg[0]
    } else {
        0.0
    };
    json!({
        "start": num_v(values_deg[0]),
        "stop": num_v(values_deg[values_deg.len() - 1]),
        "step": num_v(step),
        "count": values_deg.len(),
    })
}

pub fn num_v(x: f64) -> Value {
    json!(round_sig(x))
}

pub fn object_json(entry: &CatalogEntry) -> Value {
    let o = &entry.object;
    json!({
        "name": o.name,
        "a_mm": num_v(o.a),
        "b_mm": num_v(o.b),
        "D_mm": num_v(o.outer_diameter),
        "d_mm": num_v(o.inner_diameter),
        "mass": num_v(o.mass),
        "gripper": { "w_mm": num_v(entry.gripper.w), "stroke_mm": num_v(entry.gripper.stroke) },
        "x_mm": num_v(entry.geometry.x),
        "delta_mm": num_v(entry.geometry.delta),
    })
}

pub fn friction_json(fr: &FrictionSet) -> Value {
    json!({ "mu_S": num_v(fr.mu_s), "mu_H": num_v(fr.mu_h), "mu_G": num_v(fr.mu_g) })
}

pub fn region_json(map: &RegionMap, entry: &CatalogEntry, csv_name: &str) -> String {
    let v = json!({
        "object": object_json(entry),
        "friction": friction_json(&map.friction),
        "l_a": num_v(map.l_a),
        "mode": map.mode.as_str(),
        "alpha_deg": axis_meta(&degrees(&map.alpha_axis)),
        "beta_deg": axis_meta(&degrees(&map.beta_axis)),
        "feasible_cells": map.feasible_count(),
        "csv": csv_name,
    });
    pretty(&v)
}

pub fn la_beta_json(map: &LaBetaMap, entry: &CatalogEntry, csv_name: &str, traj: &GraspTrajectory) -> String {
    let mark = |m: Option<(f64, f64)>| match m {
        Some((b, l)) => json!({ "beta_deg": num_v(b.to_degrees()), "l_a": num_v(l) }),
        None => Value::Null,
    };
    let v = json!({
        "object": object_json(entry),
        "friction": friction_json(&map.friction),
        "alpha_rad": num_v(map.alpha),
        "mode": map.mode.as_str(),
        "l_a": axis_meta(&map.la_axis),
        "beta_deg": axis_meta(&degrees(&map.beta_axis)),
        "csv": csv_name,
        "initial_mark": mark(traj.initial_mark),
        "final_mark": mark(traj.final_mark),
        "first_exit_beta_deg": traj.first_exit().map(|b| num_v(b.to_degrees())).unwrap_or(Value::Null),
    });
    pretty(&v)
}

pub fn trajectory_csv(traj: &GraspTrajectory) -> String {
    let mut rows = vec![vec!["beta_deg".to_string(), "l_a".into(), "stable".into()]];
    rows.extend(
        traj.samples
            .iter()
            .map(|s| vec![num(s.beta.to_degrees()), num(s.l_a), flag(s.stable)]),
    );
    csv_string(rows)
}

fn waypoints_json(poses: &[holegrasp::GripperPose]) -> Value {
    Value::Array(
        poses
            .iter()
            .map(|p| json!({ "x": num_v(p.x), "y": num_v(p.y), "phi": num_v(p.phi) }))
            .collect(),
    )
}

pub fn pivot_json(plan: &PivotPlan) -> String {
    pretty(&json!({
        "p_c": [num_v(plan.p_c[0]), num_v(plan.p_c[1])],
        "r": num_v(plan.r),
        "theta_rad": num_v(plan.theta),
        "waypoints": waypoints_json(&plan.waypoints),
    }))
}

/// Same layout as the pivot plan: the rotation centre is the fingertip.
pub fn align_json(plan: &AlignPlan) -> String {
    pretty(&json!({
        "p_c": [num_v(plan.fingertip[0]), num_v(plan.fingertip[1])],
        "r": num_v(plan.r),
        "theta_rad": num_v(plan.rotation),
        "waypoints": waypoints_json(&plan.poses),
    }))
}

pub fn wrench_csv(basis: &WrenchBasis) -> String {
    let mut rows = vec![vec!["label".to_string(), "m".into(), "fx".into(), "fy".into()]];
    rows.extend(
        basis
            .labeled()
            .map(|(label, w)| vec![label.to_string(), num(w.m), num(w.fx), num(w.fy)]),
    );
    csv_string(rows)
}

pub struct CiRow {
    pub name: String,
    pub successes: u64,
    pub trials: u64,
    pub ci: ConfidenceInterval,
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

/// Aligned text table with percentages.
pub fn ci_table(rows: &[CiRow]) -> String {
    let header = ["object", "success", "rate", "95% CI (lower)", "95% CI (upper)"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                format!("{}/{}", r.successes, r.trials),
                pct(r.successes as f64 / r.trials as f64),
                pct(r.ci.lower),
                pct(r.ci.upper),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for row in &body {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Proportions, not percentages.
pub fn ci_csv(rows: &[CiRow]) -> String {
    let mut out = vec![vec![
        "name".to_string(),
        "successes".into(),
        "trials".into(),
        "rate".into(),
        "lower".into(),
        "upper".into(),
    ]];
    out.extend(rows.iter().map(|r| {
        vec![
            r.name.clone(),
            r.successes.to_string(),
            r.trials.to_string(),
            num(r.successes as f64 / r.trials as f64),
            num(r.ci.lower),
            num(r.ci.upper),
        ]
    }));
    csv_string(out)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}
