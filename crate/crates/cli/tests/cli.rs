use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geoswarm::attitude::control_known_ff;
use geoswarm::so3::adjoint_rotate;
use geoswarm::{DesiredAttitudeRate, Rotation, SkewMatrix};
use geoswarm_cli::commands::{cmd_gains, STEP_TABLE, SUMMARY};
use geoswarm_cli::scenario::ScenarioFile;
use geoswarm_cli::table::StepTable;
use geoswarm_cli::validate::{decay_slope_property, shipped_law};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn geoswarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoswarm"))
        .args(args)
        .output()
        .unwrap()
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn prop1_text() -> String {
    std::fs::read_to_string(scenarios().join("prop1_smoke.scenario")).unwrap()
}

#[test]
fn shipped_scenarios_round_trip() {
    for name in ["fig2.scenario", "fig3.scenario", "prop1_smoke.scenario"] {
        let s = ScenarioFile::load(&scenarios().join(name)).unwrap();
        let once = s.to_toml().unwrap();
        let back = ScenarioFile::parse(&once).unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(back.to_toml().unwrap(), once, "{name}");
    }
}

#[test]
fn zero_unknown_rate_gives_zero_k1() {
    let mut s = ScenarioFile::load(&scenarios().join("fig2.scenario")).unwrap();
    s.desired.omega_max = 0.0;
    let g = cmd_gains(&s).unwrap();
    assert_eq!(g.k1, 0.0);
    assert!(g.k2 > 400.0);
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let fig2 = scenarios().join("fig2.scenario");
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = geoswarm(&[
            "simulate",
            fig2.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--t-end",
            "5",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(dir.path().join("a").join(STEP_TABLE)).unwrap();
    let b = std::fs::read(dir.path().join("b").join(STEP_TABLE)).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        std::fs::read(dir.path().join("a").join(SUMMARY)).unwrap(),
        std::fs::read(dir.path().join("b").join(SUMMARY)).unwrap()
    );
}

#[test]
fn summary_is_recomputable_from_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let fig2 = scenarios().join("fig2.scenario");
    let o = geoswarm(&[
        "simulate",
        fig2.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--t-end",
        "10",
    ]);
    assert!(o.status.success());

    let table = StepTable::read(&out.join(STEP_TABLE)).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join(SUMMARY)).unwrap()).unwrap();
    assert_eq!(
        table.rows.len(),
        summary["records"].as_u64().unwrap() as usize
    );
    assert_eq!(table.header.len(), 2 + 9 + 3 + 11 + 4 * 14);

    let lambda = table.column("lambda_min").unwrap();
    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(min, summary["lambda_min_min"].as_f64().unwrap());
    let pair = table.column("max_pair_displacement").unwrap();
    let max = pair.iter().cloned().fold(0.0, f64::max);
    assert_eq!(max, summary["max_pair_displacement"].as_f64().unwrap());
    for i in 0..4 {
        let mu = table.column(&format!("mu{i}")).unwrap();
        assert_eq!(
            *mu.last().unwrap(),
            summary["agents"][i]["final_mu"].as_f64().unwrap()
        );
    }
    // rotations are row-major: row 0 of R_d is its first row
    let rd01 = table.column("rd_01").unwrap();
    assert!(rd01.iter().all(|v| v.is_finite()));
}

#[test]
fn prop1_smoke_run_meets_the_decay_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p1");
    let p = scenarios().join("prop1_smoke.scenario");
    let o = geoswarm(&[
        "simulate",
        p.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join(SUMMARY)).unwrap()).unwrap();
    assert!(
        summary["agents"][0]["decay_slope_rel_error"]
            .as_f64()
            .unwrap()
            <= 0.02
    );
    assert_eq!(summary["flags"]["decay_slope_within_tolerance"], true);
}

#[test]
fn degenerate_placement_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenarios().join("fig2.scenario"))
        .unwrap()
        .replace("0.2645751311064591", "0.0");
    let p = write_scenario(dir.path(), "flat.scenario", &text);
    let o = geoswarm(&["gains", &p]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("degenerate") && err.contains("lambda_min(P(0)) > 0"),
        "{err}"
    );
}

#[test]
fn unknown_key_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "bad.scenario",
        &prop1_text().replace("[swarm]", "[swarm]\nmass = 2.0"),
    );
    let o = geoswarm(&["gains", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mass"));
}

#[test]
fn singular_start_exits_with_3_and_keeps_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let text = prop1_text().replace("[[0.5, -2.0, 1.0]]", "[[3.1415926, 0.0, 0.0]]");
    let p = write_scenario(dir.path(), "flip.scenario", &text);
    let out = dir.path().join("flip");
    let o = geoswarm(&["simulate", &p, "--out", out.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = std::fs::read_to_string(out.join(STEP_TABLE)).unwrap();
    assert!(table.contains("# ABORTED at step 0"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join(SUMMARY)).unwrap()).unwrap();
    assert_eq!(summary["completed"], false);
    assert!(summary["abort_reason"].as_str().unwrap().contains("pi"));
}

#[test]
fn thinned_table_keeps_the_last_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("thin");
    let p = scenarios().join("prop1_smoke.scenario");
    let o = geoswarm(&[
        "simulate",
        p.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--every",
        "300",
    ]);
    assert!(o.status.success());
    let steps = StepTable::read(&out.join(STEP_TABLE))
        .unwrap()
        .column("step")
        .unwrap();
    assert_eq!(
        steps,
        vec![0.0, 300.0, 600.0, 900.0, 1200.0, 1500.0, 1800.0, 2000.0]
    );
}

#[test]
fn quick_validation_passes() {
    let o = geoswarm(&["validate", "--quick"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    for name in [
        "metric ordering",
        "exp/log roundtrip",
        "Ad-invariance",
        "field gradient",
        "Weyl chain",
        "pairwise displacement",
    ] {
        assert!(stdout.contains(name), "{name} missing:\n{stdout}");
    }
}

#[test]
fn flipped_feed_forward_sign_fails_the_decay_check() {
    // Injected fault: the feed-forward term enters with the wrong sign.
    let flipped = |r_e: &Rotation, known: &SkewMatrix, k_w: f64| -> geoswarm::Result<SkewMatrix> {
        let good = control_known_ff(r_e, &DesiredAttitudeRate::new(*known, 0.0)?, k_w)?;
        Ok(good - adjoint_rotate(&r_e.transpose(), known) * 2.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(decay_slope_property(&shipped_law, &mut rng, 12).passed());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(!decay_slope_property(&flipped, &mut rng, 12).passed());
}
