//! End-to-end tests of the `sgnlab` binary: command output, artifact
//! files, diagnostics and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn sgnlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgnlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn sgnlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn predict_writes_json_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgnlab(
        &[
            "predict",
            "--h-minus", "1",
            "--h-plus", "1.5",
            "--mu", "1",
            "--sigma", "1",
            "--z-minus", "1.0954451150103324", // z^2 = 1.2
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("transmitted"), "{}", stdout(&o));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/predict.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["outcome"], "Transmitted");
    let a_plus = report["a_plus"].as_f64().unwrap();
    assert!((a_plus - 0.10335).abs() < 5e-4, "a_plus = {a_plus}");

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "predict");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    let outputs: Vec<String> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert!(outputs.iter().any(|p| p.ends_with("predict.json")));
    assert!(outputs.iter().any(|p| p.ends_with("manifest.json")));
}

#[test]
fn predict_trapped_below_z_min() {
    let dir = tempfile::tempdir().unwrap();
    // z^2 = 0.4 is below z_min^2 ~ 1.078 for the (1, 1.5) fast RW
    let o = sgnlab(
        &[
            "predict",
            "--h-minus", "1",
            "--h-plus", "1.5",
            "--mu", "1",
            "--sigma", "1",
            "--z-minus", "0.6324555320336759",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("trapped"), "{}", stdout(&o));
}

#[test]
fn predict_fitting_matches_exact_at_small_amplitude() {
    // the two invariants differ at O(z^6); across a weak step the
    // transmitted z stays ~0.44 and the predictions agree to ~0.3%
    let dir = tempfile::tempdir().unwrap();
    let mut z = [0.0; 2];
    for (i, method) in ["exact", "fitting"].iter().enumerate() {
        let out = format!("out_{method}");
        let o = sgnlab(
            &[
                "predict",
                "--h-minus", "1.05",
                "--h-plus", "1",
                "--mu", "1",
                "--sigma", "1",
                "--z-minus", "0.3",
                "--method", method,
                "--out", &out,
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(out).join("predict.json")).unwrap(),
        )
        .unwrap();
        z[i] = report["z_plus"].as_f64().unwrap();
    }
    let rel = (z[0] - z[1]).abs() / z[0];
    assert!(rel < 1e-2, "exact {} vs fitting {}", z[0], z[1]);
    assert!(rel > 1e-6, "fitting should not be bit-identical to exact");
}

#[test]
fn predict_fitting_rejects_head_on() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgnlab(
        &[
            "predict",
            "--h-minus", "1.5",
            "--h-plus", "1",
            "--mu", "-1",
            "--sigma", "1",
            "--z-minus", "0.3",
            "--method", "fitting",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("overtaking"), "{}", stderr(&o));
}

const SIM_CONFIG: &str = "\
# small hydrostatic-free run used by the CLI tests
[riemann]
h_minus = 1.0
h_plus = 1.5
mu = 1

[solver]
dx = 0.05
x_left = -10.0
x_right = 10.0
t_end = 1.0
step_width = 2.0

[output]
dir = run_out
probe_every = 0.25
";

#[test]
fn simulate_writes_probes_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), SIM_CONFIG).unwrap();
    let o = sgnlab(&["simulate", "--config", "run.cfg"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));

    let probes = std::fs::read_to_string(dir.path().join("run_out/probes.csv")).unwrap();
    let mut lines = probes.lines();
    assert_eq!(lines.next().unwrap(), "t,mass,momentum,energy,crest_x,crest_h");
    // t = 0 plus probes every 0.25 up to t_end = 1
    assert!(probes.lines().count() >= 5, "{probes}");

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run_out/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "simulate");
    // no soliton configured, so no measurement report
    assert!(!dir.path().join("run_out/measure.json").exists());
}

#[test]
fn simulate_config_hash_is_key_order_independent() {
    let dir = tempfile::tempdir().unwrap();
    let reordered = "\
[solver]
step_width = 2.0
t_end = 1.0
x_right = 10.0
x_left = -10.0
dx = 0.05

[output]
probe_every = 0.25
dir = run_out2

[riemann]
mu = 1
h_plus = 1.5
h_minus = 1.0
";
    let hash = |out: &str| -> String {
        let m: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(out).join("manifest.json")).unwrap(),
        )
        .unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };

    std::fs::write(dir.path().join("a.cfg"), SIM_CONFIG).unwrap();
    let oa = sgnlab(&["simulate", "--config", "a.cfg"], dir.path());
    assert!(oa.status.success(), "{}", stderr(&oa));
    let hash_a = hash("run_out");

    // same settings, keys shuffled, except for the output dir
    std::fs::write(dir.path().join("b.cfg"), reordered).unwrap();
    let ob = sgnlab(&["simulate", "--config", "b.cfg"], dir.path());
    assert!(ob.status.success(), "{}", stderr(&ob));
    assert_ne!(hash_a, hash("run_out2"), "changed value must change the hash");

    // identical settings, keys shuffled
    let same = reordered.replace("run_out2", "run_out");
    std::fs::write(dir.path().join("c.cfg"), same).unwrap();
    let oc = sgnlab(&["simulate", "--config", "c.cfg"], dir.path());
    assert!(oc.status.success(), "{}", stderr(&oc));
    assert_eq!(hash_a, hash("run_out"), "key order must not change the hash");
}

#[test]
fn simulate_reports_config_error_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = SIM_CONFIG.replace("mu = 1", "mu = 1\nnu = 2");
    std::fs::write(dir.path().join("bad.cfg"), bad).unwrap();
    let o = sgnlab(&["simulate", "--config", "bad.cfg"], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("bad.cfg:6"), "{err}");
    assert!(err.contains("nu"), "{err}");
}

#[test]
fn sweep_preset_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["first", "second"] {
        let o = sgnlab(&["sweep", "--fig", "4c", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("first/fig4c.csv")).unwrap();
    let b = std::fs::read(dir.path().join("second/fig4c.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "sweep reruns must be byte-identical");
    // 81 z values on each of the two (h-, h+) branches, plus the header
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 163);
}

#[test]
fn sweep_custom_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgnlab(
        &[
            "sweep",
            "--h-minus", "1.5",
            "--h-plus", "1",
            "--mu", "1",
            "--sigma", "1",
            "--z-minus", "0.1:0.5:5",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().skip(1).all(|l| l.contains("transmitted")), "{csv}");
}

#[test]
fn sweep_rejects_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgnlab(
        &[
            "sweep",
            "--h-minus", "1.5",
            "--h-plus", "1",
            "--mu", "1",
            "--sigma", "1",
            "--z-minus", "0.1:0.5:0",
        ],
        dir.path(),
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty grid"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists(), "no artifacts on failure");
}

#[test]
fn compare_prediction_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = sgnlab(
        &["compare", "--fig", "5", "--ratios", "1.1:1.4:4"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/dsw_edge.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "ratio,a_exact,a_fitting,a_simulated,undeveloped");
    assert_eq!(csv.lines().count(), 5);
    // weak jumps: fitting column populated, simulated column empty
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(!fields[2].is_empty(), "{line}");
        assert!(fields[3].is_empty(), "{line}");
    }
    let out = stdout(&o);
    assert!(out.contains("max |a_fitting - a_exact|"), "{out}");
}
