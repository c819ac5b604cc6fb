//! End-to-end checks of the command-line surface: file formats, manifests,
//! exit-status discipline, and reproducibility of generated corpora.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qwa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwa"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| l.starts_with('{'))
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}

#[test]
fn gen_is_idempotent_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwa(
        &["gen", "ladder", "6", "2", "--seed", "7", "--count", "3", "--out-dir", "corpus"],
        dir.path(),
    );
    assert!(out.status.success());
    let first: Vec<Vec<u8>> = (7..10)
        .map(|s| fs::read(dir.path().join(format!("corpus/ladder-6x2-seed{s}.qwi"))).unwrap())
        .collect();
    // re-run writes identical bytes
    let out = qwa(
        &["gen", "ladder", "6", "2", "--seed", "7", "--count", "3", "--out-dir", "corpus"],
        dir.path(),
    );
    assert!(out.status.success());
    for (s, bytes) in (7..10).zip(&first) {
        let again = fs::read(dir.path().join(format!("corpus/ladder-6x2-seed{s}.qwi"))).unwrap();
        assert_eq!(&again, bytes, "seed {s}");
    }
}

#[test]
fn anneal_with_exact_oracle_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(&["gen", "chain", "20", "--seed", "3"], dir.path()).status.success());
    let out = qwa(
        &["anneal", "chain-20-seed3.qwi", "--oracle", "exact", "--trace-out", "trace.jsonl"],
        dir.path(),
    );
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines[0]["record"], "manifest");
    let result = &lines[1];
    assert_eq!(result["record"], "result");
    assert_eq!(result["success"], true);
    // trace file: manifest + strictly decreasing gamma steps ending at 0.01
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let steps: Vec<Value> = trace
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|v| v["record"] == "step")
        .collect();
    assert!(steps.len() >= 2);
    let gammas: Vec<f64> = steps.iter().map(|s| s["gamma"].as_f64().unwrap()).collect();
    assert!(gammas.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(*gammas.last().unwrap(), 0.01);
}

#[test]
fn exit_status_discipline() {
    let dir = tempfile::tempdir().unwrap();
    // usage error: 2
    let out = qwa(&["anneal"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = qwa(&["definitely-not-a-subcommand"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    // runtime failure: 1
    let out = qwa(&["anneal", "missing.qwi"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    // malformed instance file: 1, with a location in the message
    fs::write(dir.path().join("bad.qwi"), "qwa-instance v1\ngeometry chain 3\nseed 0\nedge 0 1 2.5\nedge 1 2 0.1\nend\n").unwrap();
    let out = qwa(&["anneal", "bad.qwi"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside [-1, 1]"));
}

#[test]
fn bench_emits_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(
        &["gen", "chain", "10", "--seed", "0", "--count", "3", "--out-dir", "c"],
        dir.path()
    )
    .status
    .success());
    let out = qwa(
        &["bench", "c", "--etas", "1e-8", "--oracle", "exact", "--out", "table.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(csv.starts_with("# manifest: "));
    let data_line = csv
        .lines()
        .find(|l| l.starts_with("chain-10"))
        .expect("aggregate row");
    let fields: Vec<&str> = data_line.split(',').collect();
    assert_eq!(fields[2], "3"); // n
    assert_eq!(fields[4], "100.0"); // success_pct
}

#[test]
fn sweep_reproduces_the_free_spin_susceptibility() {
    // single site: chi = 1/(gamma^2 + h^2)
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("one.qwi"),
        "qwa-instance v1\ngeometry chain 1\nseed 0\nend\n",
    )
    .unwrap();
    let out = qwa(
        &["sweep", "one.qwi", "--gammas", "2,1,0.5", "--chi"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = stdout_lines(&out);
    let points: Vec<&Value> = lines.iter().filter(|l| l["record"] == "sweep-point").collect();
    assert_eq!(points.len(), 3);
    for point in points {
        let gamma = point["gamma"].as_f64().unwrap();
        let chi = point["chi_sg"].as_f64().unwrap();
        assert!(
            (chi - 1.0 / (gamma * gamma)).abs() < 1e-3 / (gamma * gamma),
            "gamma {gamma}: chi {chi}"
        );
    }
}

#[test]
fn sweep_tracks_supplied_configurations() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(&["gen", "ladder", "4", "2", "--seed", "5"], dir.path()).status.success());
    fs::write(dir.path().join("track.txt"), "++++++++\n+-+-+-+-\n").unwrap();
    let out = qwa(
        &[
            "sweep",
            "ladder-4x2-seed5.qwi",
            "--gammas",
            "3,1",
            "--track-configs",
            "track.txt",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = stdout_lines(&out);
    let first = lines.iter().find(|l| l["record"] == "sweep-point").unwrap();
    let tracked = first["tracked"].as_array().unwrap();
    assert_eq!(tracked.len(), 2);
    // deep in the paramagnet every amplitude is close to 2^(-n/2)
    let expected = 0.0625; // 2^-4 for n = 8
    for t in tracked {
        let amp = t[1].as_f64().unwrap();
        assert!((amp.abs() - expected).abs() < 0.1 * expected, "{amp}");
    }
}

#[test]
fn oracle_methods_emit_comparable_records() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(&["gen", "ladder", "6", "2", "--seed", "11"], dir.path()).status.success());
    let exact = qwa(&["oracle", "ladder-6x2-seed11.qwi", "exact"], dir.path());
    assert!(exact.status.success());
    let exact_energy = stdout_lines(&exact)
        .iter()
        .find(|l| l["record"] == "oracle")
        .unwrap()["energy"]
        .as_f64()
        .unwrap();
    // a short but adequate schedule for 12 sites
    let sta = qwa(
        &[
            "oracle", "ladder-6x2-seed11.qwi", "sta",
            "--sta-beta-max", "1e4", "--sta-r", "1.002", "--sta-steps", "60", "--sta-runs", "3",
        ],
        dir.path(),
    );
    assert!(sta.status.success());
    let sta_energy = stdout_lines(&sta)
        .iter()
        .find(|l| l["record"] == "oracle")
        .unwrap()["energy"]
        .as_f64()
        .unwrap();
    assert!((exact_energy - sta_energy).abs() < 1e-9);

    let minima = qwa(
        &["oracle", "ladder-6x2-seed11.qwi", "minima", "--runs", "12"],
        dir.path(),
    );
    assert!(minima.status.success());
    let lines = stdout_lines(&minima);
    let energies: Vec<f64> = lines
        .iter()
        .filter(|l| l["record"] == "local-minimum")
        .map(|l| l["energy"].as_f64().unwrap())
        .collect();
    assert!(!energies.is_empty());
    assert!(energies.windows(2).all(|w| w[0] <= w[1]));
    assert!(energies[0] >= exact_energy - 1e-12);
}

#[test]
fn checkpoint_and_resume_agree_with_a_straight_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(&["gen", "chain", "12", "--seed", "9"], dir.path()).status.success());
    let straight = qwa(&["anneal", "chain-12-seed9.qwi"], dir.path());
    let straight_result = stdout_lines(&straight)
        .into_iter()
        .find(|l| l["record"] == "result")
        .unwrap();
    // run with checkpointing, then resume from the final checkpoint
    let out = qwa(
        &["anneal", "chain-12-seed9.qwi", "--checkpoint", "state.ckpt"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("state.ckpt").exists());
    let resumed = qwa(
        &["anneal", "chain-12-seed9.qwi", "--resume", "state.ckpt"],
        dir.path(),
    );
    assert!(resumed.status.success());
    let resumed_result = stdout_lines(&resumed)
        .into_iter()
        .find(|l| l["record"] == "result")
        .unwrap();
    assert_eq!(straight_result["config"], resumed_result["config"]);
    assert_eq!(
        straight_result["classical_energy"],
        resumed_result["classical_energy"]
    );
}

#[test]
fn manifest_reruns_reproduce_result_records() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qwa(&["gen", "ladder", "5", "2", "--seed", "2"], dir.path()).status.success());
    let args = ["anneal", "ladder-5x2-seed2.qwi", "--oracle", "exact"];
    let a = qwa(&args, dir.path());
    let b = qwa(&args, dir.path());
    let mut ra = stdout_lines(&a).into_iter().find(|l| l["record"] == "result").unwrap();
    let mut rb = stdout_lines(&b).into_iter().find(|l| l["record"] == "result").unwrap();
    // identical except the hardware-bound wall clock
    ra.as_object_mut().unwrap().remove("wall_s");
    rb.as_object_mut().unwrap().remove("wall_s");
    assert_eq!(ra, rb);
}
