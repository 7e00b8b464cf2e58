//! End-to-end tests of the `glider` binary: artifact schemas, determinism
//! across worker counts, manifest reruns, and machine-readable errors.

use std::path::Path;
use std::process::{Command, Output};

fn glider(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glider"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("summary.json"))).expect("valid summary JSON")
}

#[test]
fn tvm_outputs_and_worker_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("w1");
    let out4 = tmp.path().join("w4");
    for (out, workers) in [(&out1, "1"), (&out4, "4")] {
        let run = glider(&[
            "tvm",
            "--profile",
            "flat-plate",
            "--theta",
            "-5",
            "--domain",
            "-1.5",
            "1.5",
            "-2",
            "0.5",
            "--strategy",
            "slices",
            "--slices",
            "41",
            "--points",
            "120",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let csv1 = read(&out1.join("tvm.csv"));
    let csv4 = read(&out4.join("tvm.csv"));
    assert_eq!(csv1, csv4, "worker count changed the output bytes");
    assert_eq!(csv1.lines().next().unwrap(), "theta_deg,vx,vz,accel_tangential");
    assert!(csv1.lines().count() >= 121);
    assert!(out1.join("manifest.json").exists());
    assert!(out1.join("summary.json").exists());
}

#[test]
fn default_tvm_run_has_at_least_400_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("tvm");
    // The domain flag takes just the vx range here.
    let run = glider(&[
        "tvm",
        "--profile",
        "flat-plate",
        "--theta",
        "-5",
        "--domain",
        "-1.5",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&out.join("tvm.csv"));
    assert!(csv.lines().count() >= 401, "expected >= 400 data rows");
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["subcommand"], "tvm");
    assert_eq!(manifest["profile_name"], "flat-plate");
    assert!(manifest["profile_fingerprint"].as_str().unwrap().len() == 16);
}

#[test]
fn rerun_from_manifest_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let run = glider(&[
        "equilibria",
        "--profile",
        "high-lift",
        "--theta",
        "2.5",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let rerun = glider(&[
        "rerun",
        first.join("manifest.json").to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(rerun.status.success(), "{}", String::from_utf8_lossy(&rerun.stderr));
    assert_eq!(
        read(&first.join("equilibria.csv")),
        read(&second.join("equilibria.csv")),
        "rerun must reproduce the CSV byte for byte"
    );
}

#[test]
fn unknown_profile_reports_field_in_error_json() {
    let tmp = tempfile::tempdir().unwrap();
    let run = glider(&[
        "equilibria",
        "--profile",
        "no-such-shape",
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert!(!run.status.success());
    let value: serde_json::Value =
        serde_json::from_slice(&run.stdout).expect("error output must be JSON");
    assert_eq!(value["error"]["field"], "profile");
    assert!(value["error"]["message"]
        .as_str()
        .unwrap()
        .contains("no-such-shape"));
}

#[test]
fn equilibria_at_zero_pitch_is_degenerate_center() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("eq");
    let run = glider(&[
        "equilibria",
        "--profile",
        "flat-plate",
        "--theta",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let json = summary(&out);
    assert_eq!(json["count"], 1);
    let kind = json["equilibria"][0]["kind"].as_str().unwrap();
    assert!(kind == "center" || kind == "degenerate", "kind = {kind}");
    let csv = read(&out.join("equilibria.csv"));
    assert_eq!(
        csv.lines().next().unwrap(),
        "theta_deg,gamma_star_deg,v_star,vx_star,vz_star,delta,tau,kind"
    );
}

#[test]
fn coefficient_table_roundtrip_through_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let table = tmp.path().join("plate.csv");
    let mut text = String::from(
        "# sym_rot180: true\n# sym_topbottom: true\n# sym_leftright: true\n# measured_range_deg: 0 180\nalpha_deg,cl,cd\n",
    );
    let mut alpha = 0.0f64;
    while alpha <= 180.0 {
        let a = alpha.to_radians();
        text.push_str(&format!(
            "{},{},{}\n",
            alpha,
            1.2 * (2.0 * a).sin(),
            1.4 - (2.0 * a).cos()
        ));
        alpha += 5.0;
    }
    std::fs::write(&table, text).unwrap();

    let out = tmp.path().join("eq");
    let run = glider(&[
        "equilibria",
        "--table",
        table.to_str().unwrap(),
        "--theta",
        "-5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let json = summary(&out);
    assert_eq!(json["count"], 1);
    // Tabulated plate lands within a whisker of the analytic equilibrium.
    let gamma = json["equilibria"][0]["gamma_star_deg"].as_f64().unwrap();
    assert!((gamma - 48.26).abs() < 0.5, "gamma* = {gamma}");

    // A table with nonpositive drag is rejected with the right error kind.
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "alpha_deg,cl,cd\n0,0,0.4\n5,0.2,-0.1\n10,0.4,0.5\n15,0.5,0.6\n").unwrap();
    let run = glider(&[
        "equilibria",
        "--table",
        bad.to_str().unwrap(),
        "--out",
        tmp.path().join("bad-out").to_str().unwrap(),
    ]);
    assert!(!run.status.success());
    let value: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(value["error"]["kind"], "non-positive-drag");
}

#[test]
fn phase_portrait_bifurcation_nullcline_repulsion_artifacts() {
    let tmp = tempfile::tempdir().unwrap();

    let pp = tmp.path().join("pp");
    let run = glider(&[
        "phase-portrait",
        "--profile",
        "flat-plate",
        "--theta",
        "-5",
        "--grid",
        "11",
        "11",
        "--seed",
        "7",
        "--out",
        pp.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let field = read(&pp.join("vector_field.csv"));
    assert_eq!(field.lines().next().unwrap(), "vx,vz,ax,az");
    assert_eq!(field.lines().count(), 1 + 121);
    assert!(pp.join("trajectory_000.csv").exists());
    let traj = read(&pp.join("trajectory_000.csv"));
    assert!(traj.contains("t,vx,vz,x,z,theta"));
    assert!(traj.contains("# termination:"));

    let bif = tmp.path().join("bif");
    let run = glider(&[
        "bifurcation",
        "--profile",
        "flat-plate",
        "--theta-range",
        "-10",
        "10",
        "21",
        "--out",
        bif.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&bif.join("bifurcation.csv"));
    assert_eq!(
        csv.lines().next().unwrap(),
        "theta_deg,gamma_star_deg,v_star,vx_star,vz_star,delta,tau,kind,branch_id"
    );
    assert!(csv.lines().any(|l| l.ends_with(",-1")), "scan rows present");
    assert!(csv.lines().any(|l| l.ends_with(",0")), "branch rows present");

    let nc = tmp.path().join("nc");
    let run = glider(&[
        "nullcline",
        "--profile",
        "flat-plate",
        "--theta",
        "-5",
        "--out",
        nc.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&nc.join("nullcline.csv"));
    assert!(csv.starts_with("# singular_gamma_deg:"));
    assert!(csv.contains("theta_deg,gamma_deg,vx,vz"));

    let rep = tmp.path().join("rep");
    let run = glider(&[
        "repulsion",
        "--profile",
        "flat-plate",
        "--theta",
        "-5",
        "--grid",
        "21",
        "21",
        "--T",
        "-0.2",
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&rep.join("repulsion.csv"));
    assert!(csv.contains("vx,vz,rho,masked"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 441);
    assert!(rep.join("ridge.csv").exists());

    let surf = tmp.path().join("surf");
    let run = glider(&[
        "tvm-surface",
        "--profile",
        "flat-plate",
        "--theta-range",
        "-10",
        "10",
        "5",
        "--points",
        "80",
        "--out",
        surf.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let csv = read(&surf.join("tvm_surface.csv"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5 * 80);
}

#[test]
fn simulate_writes_distance_column() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let run = glider(&[
        "simulate",
        "--profile",
        "flat-plate",
        "--schedule",
        "constant",
        "--theta",
        "-5",
        "--t-end",
        "6",
        "--points",
        "120",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let csv = read(&out.join("simulation.csv"));
    assert!(csv.contains("t,x,z,vx,vz,theta_deg,dist_tvm"));
    let json = summary(&out);
    assert!(json["adherence"]["post_transient_max"].as_f64().unwrap() < 0.1);
    assert_eq!(json["termination"], "completed");

    // Config-file route for the schedule parameters.
    let config = tmp.path().join("flutter.json");
    std::fs::write(
        &config,
        r#"{"schedule": {"kind": "sinusoid", "theta_mean_deg": 0.0, "amplitude_deg": 8.0, "omega": 0.6, "phase": 0.0}, "initial": [0.2, 0.0], "t_end": 42.0}"#,
    )
    .unwrap();
    let out2 = tmp.path().join("sim2");
    let run = glider(&[
        "simulate",
        "--profile",
        "flat-plate",
        "--schedule",
        "sinusoid",
        "--config",
        config.to_str().unwrap(),
        "--points",
        "120",
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stdout));
    let json = summary(&out2);
    assert_eq!(json["schedule"]["amplitude_deg"], 8.0);
    assert_eq!(json["t_end"], 42.0);
}
