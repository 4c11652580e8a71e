//! End-to-end tests of the `gnnflow` binary: exit codes, file outputs and
//! the determinism acceptance criterion.

use std::path::Path;
use std::process::{Command, Output};

fn gnnflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gnnflow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const SWEEP_CONFIG: &str = r#"
g = 8
baseline = "Seq-Nt"
seed = 11

[hw]
pe_count = 128

[[dataset]]
synthetic = "uniform-random"
v = 200
d = 6.0
features = 32
label = "synth"

[[dataflow]]
name = "Seq-Nt"

[[dataflow]]
name = "Seq-Ns"

[[dataflow]]
name = "PP-Nt-Vsh"

[[dataflow]]
name = "SP-VsNt-Vs"
"#;

/// Criterion 10: two runs of the same sweep config produce byte-identical
/// CSV and SVG.
#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, SWEEP_CONFIG).unwrap();

    for (run, csv) in [("a", "rows_a.csv"), ("b", "rows_b.csv")] {
        let out = gnnflow(
            &["sweep", "--config", "sweep.toml", "--out", csv],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "run {run}: {out:?}");
    }
    let a = std::fs::read(dir.path().join("rows_a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("rows_b.csv")).unwrap();
    assert_eq!(a, b, "CSV outputs differ between runs");

    for (kind, out_a, out_b) in [
        ("runtime-bars", "r_a.svg", "r_b.svg"),
        ("energy-stacked", "e_a.svg", "e_b.svg"),
        ("gb-breakdown", "g_a.svg", "g_b.svg"),
    ] {
        for svg in [out_a, out_b] {
            let out = gnnflow(
                &["report", "--input", "rows_a.csv", "--kind", kind, "--out", svg],
                dir.path(),
            );
            assert_eq!(code(&out), 0, "report {kind}: {out:?}");
        }
        let a = std::fs::read(dir.path().join(out_a)).unwrap();
        let b = std::fs::read(dir.path().join(out_b)).unwrap();
        assert_eq!(a, b, "SVG outputs differ for {kind}");
    }
    println!("ACCEPTANCE 10 PASS: sweep + report byte-identical across runs");
}

#[test]
fn simulate_prints_rows_with_normalized_baseline() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sweep.toml"), SWEEP_CONFIG).unwrap();
    let out = gnnflow(&["simulate", "--config", "sweep.toml"], dir.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[0].starts_with("dataset,dataflow,"));
    // Baseline row normalizes to exactly 1.0.
    let baseline = lines.iter().find(|l| l.contains(",Seq-Nt,")).unwrap();
    let norm = baseline.split(',').nth(15).unwrap();
    assert_eq!(norm, "1.000000");
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Legal EnGN-like config with temporal reduction.
    let out = gnnflow(
        &[
            "validate",
            "SP_AC(V_s F_x N_t, V_s F_x G_x)",
            "--tiles",
            "4,1,8,4,1,8",
            "--pes",
            "512",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("legal"));

    // Spatial reduction breaks rule (c).
    let out = gnnflow(
        &[
            "validate",
            "SP_AC(V_s F_x N_s, V_s F_x G_x)",
            "--tiles",
            "4,4,8,4,1,8",
            "--pes",
            "512",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("violation"));

    // Garbage is a syntax error.
    let out = gnnflow(&["validate", "Seq_AC(V_q F_x N_t, V_x G_x F_x)"], dir.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn missing_dataset_file_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
[[dataset]]
path = "does_not_exist.el"
features = 8

[[dataflow]]
name = "Seq-Nt"
"#;
    std::fs::write(dir.path().join("bad.toml"), cfg).unwrap();
    let out = gnnflow(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn malformed_config_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "not really toml [[[").unwrap();
    let out = gnnflow(&["simulate", "--config", "bad.toml"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn report_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = gnnflow(
        &[
            "report",
            "--input",
            "empty.csv",
            "--kind",
            "runtime-bars",
            "--out",
            "x.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);

    std::fs::write(dir.path().join("schema.csv"), "a,b,c\n1,2,3\n").unwrap();
    let out = gnnflow(
        &[
            "report",
            "--input",
            "schema.csv",
            "--kind",
            "runtime-bars",
            "--out",
            "x.svg",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn gen_graph_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["g1.el", "g2.el"] {
        let out = gnnflow(
            &[
                "gen-graph",
                "--vertices",
                "100",
                "--features",
                "16",
                "--degree",
                "5",
                "--model",
                "fixed-degree",
                "--seed",
                "3",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "{out:?}");
    }
    let a = std::fs::read(dir.path().join("g1.el")).unwrap();
    let b = std::fs::read(dir.path().join("g2.el")).unwrap();
    assert_eq!(a, b);
    // Generated graphs round-trip through the sweep as path datasets.
    let cfg = r#"
g = 4
[[dataset]]
path = "g1.el"
features = 16

[[dataflow]]
name = "Seq-Nt"

[hw]
pe_count = 64
"#;
    std::fs::write(dir.path().join("roundtrip.toml"), cfg).unwrap();
    let out = gnnflow(&["simulate", "--config", "roundtrip.toml"], dir.path());
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn sim_threads_env_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sweep.toml"), SWEEP_CONFIG).unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_gnnflow"))
            .args(["simulate", "--config", "sweep.toml"])
            .env("SIM_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}
