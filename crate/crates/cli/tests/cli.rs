use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tropdesc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropdesc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn svg_elements(path: &Path, tag: &str) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("valid XML");
    doc.descendants().filter(|n| n.has_tag_name(tag)).count()
}

#[test]
fn scatter_writes_diagram_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let run = tropdesc(&["--k", "2", "--seed", "1", "scatter", "--check", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let v = json_file(&out);
    assert_eq!(v["meta"]["k"], 2);
    assert_eq!(v["meta"]["seed"], 1);
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
    assert_eq!(v["consistency"]["passed"], true);
    let rays = v["rays"].as_array().unwrap();
    assert!(rays.len() >= 6);
    for r in rays {
        assert_eq!(r["base"].as_array().unwrap().len(), 2);
        assert_eq!(r["degree"].as_array().unwrap().len(), 3);
        assert!(r["mult"].as_str().unwrap().contains('/'));
        let total: u64 = r["degree"].as_array().unwrap().iter().map(|n| n.as_u64().unwrap()).sum();
        assert_eq!(total as usize, r["uset"].as_array().unwrap().len());
    }
    assert!(v["singular"].is_array());
}

#[test]
fn pinned_potentials() {
    let run = tropdesc(&["--points", "0,0", "--q", "-1,-2", "potential"]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["potential"], "y0 + x0 + x1 + x2 + u1*x1*x2");
    assert_eq!(v["y0"], "1/1");
    assert_eq!(v["terms"].as_array().unwrap().len(), 4);
    let run = tropdesc(&["--points", "0,0;1,2", "--q", "-3,4", "--format", "text", "potential"]);
    assert_eq!(
        String::from_utf8(run.stdout).unwrap(),
        "W = y0 + x0 + x1 + x2 + u1*x0*x1 + u2*x0*x1 + u1*u2*x0*x1^2\n"
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let args = ["--k", "3", "--seed", "7", "--dmax", "1", "invariants"];
    let a = tropdesc(&args);
    let b = tropdesc(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let s = ["--k", "3", "--seed", "7", "scatter"];
    assert_eq!(tropdesc(&s).stdout, tropdesc(&s).stdout);
}

#[test]
fn invariants_csv_and_jfun() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    let csv = dir.path().join("t.csv");
    let run = tropdesc(&[
        "--k", "2", "--seed", "3", "--dmax", "1", "invariants",
        "--csv", csv.to_str().unwrap(), "--out", table.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("family,d,nu,points,value\n"));
    assert!(text.contains("T2,1,0,1,1/1\n"));
    assert_eq!(json_file(&table)["meta"]["k"], 2);
    let j = tropdesc(&["jfun", "--in", table.to_str().unwrap()]);
    assert_eq!(code(&j), 0);
    let v: Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["columns"].as_array().unwrap().len(), 3);
    assert_eq!(v["d_max"], 1);
}

#[test]
fn svg_draws_each_ray_and_line_once() {
    let dir = tempfile::tempdir().unwrap();
    let diagram = dir.path().join("d.json");
    let svg = dir.path().join("d.svg");
    let run = tropdesc(&[
        "--k", "3", "--seed", "2", "scatter",
        "--svg", svg.to_str().unwrap(), "--out", diagram.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let rays = json_file(&diagram)["rays"].as_array().unwrap().len();
    assert_eq!(svg_elements(&svg, "line"), rays);
    assert_eq!(svg_elements(&svg, "circle"), 3);

    let again = dir.path().join("again.svg");
    let run = tropdesc(&["render", "--in", diagram.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(&again).unwrap());

    let lines = dir.path().join("lines.svg");
    let run = tropdesc(&["--points", "0,0", "--q", "-1,-2", "potential", "--svg", lines.to_str().unwrap()]);
    assert_eq!(code(&run), 0);
    assert_eq!(svg_elements(&lines, "polyline"), 4);
    assert_eq!(svg_elements(&lines, "line"), 3);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"k": 1, "seed": 5, "d_max": 1}"#).unwrap();
    let run = tropdesc(&["--config", cfg.to_str().unwrap(), "--seed", "6", "scatter"]);
    assert_eq!(code(&run), 0);
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["meta"]["seed"], 6);
    assert_eq!(v["meta"]["k"], 1);
    std::fs::write(&cfg, r#"{"kk": 1}"#).unwrap();
    assert_eq!(code(&tropdesc(&["--config", cfg.to_str().unwrap(), "scatter"])), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&tropdesc(&["--help"])), 0);
    assert_eq!(code(&tropdesc(&["--bogus"])), 4);
    assert_eq!(code(&tropdesc(&["--points", "0,0;0,0", "scatter"])), 4);
    assert_eq!(code(&tropdesc(&["--points", "0,x", "scatter"])), 4);
    assert_eq!(code(&tropdesc(&["--points", "0,0", "--k", "2", "scatter"])), 4);
    assert_eq!(code(&tropdesc(&["--dmax", "0", "invariants"])), 4);
    let collision = tropdesc(&["--points", "-1,-1;1,0;0,1", "scatter"]);
    assert_eq!(code(&collision), 2);
    assert!(String::from_utf8_lossy(&collision.stderr).contains("(0/1, 0/1)"));
    let on_ray = tropdesc(&["--points", "0,0", "--q", "0,1", "--retries", "3", "potential"]);
    assert_eq!(code(&on_ray), 2);
}

#[test]
fn verify_fast_path() {
    let run = tropdesc(&["--k", "0", "verify"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let v: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 9);
    let ran: Vec<u64> = checks
        .iter()
        .filter(|c| c["status"] == "pass")
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ran, [2, 8]);
    assert_eq!(tropdesc(&["--k", "0", "verify"]).stdout, run.stdout);
}

#[test]
fn verify_reports_perturbed_identity() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let run = tropdesc(&["--k", "0", "verify", "--perturb", "d-coeff", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&run), 3);
    let v = json_file(&report);
    assert_eq!(v["passed"], false);
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["id"], 8);
    assert!(failed[0]["detail"].as_str().unwrap().contains("D = B*C convolution"));
}
