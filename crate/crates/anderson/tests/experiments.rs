//! End-to-end runs of every experiment kind at toy scale: artifact files,
//! manifest contents, config validation, table hash verification, and the
//! worker-count determinism contract.

use std::path::{Path, PathBuf};

use anderson::centers::ProductBox;
use anderson::harness::{
    run_experiment, DosTableRef, ExperimentConfig, ExperimentKind, ModelConfig, RunConfig,
    StatConfig,
};
use anderson::model::{BoundaryCondition, DisorderSpec};
use anderson::Error;

fn model_1d(half_side: i64) -> ModelConfig {
    ModelConfig {
        dim: 1,
        half_side: Some(half_side),
        half_side_list: None,
        disorder: DisorderSpec::standard(5.0),
        boundary: BoundaryCondition::Periodic,
    }
}

fn run_block(dir: &Path, realizations: usize, seed: u64) -> RunConfig {
    RunConfig {
        realizations,
        master_seed: seed,
        workers: 0,
        out_dir: dir.to_path_buf(),
        gate: false,
    }
}

/// Build a small calibration table on disk and return its reference.
fn make_table(dir: &Path, half_side: i64) -> DosTableRef {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Dos,
        model: model_1d(half_side),
        stat: StatConfig {
            grid_points: Some(401),
            ..StatConfig::default()
        },
        run: run_block(&dir.join("dos"), 30, 7),
        dos_table: None,
    };
    run_experiment(&cfg).unwrap();
    let path = dir.join("dos").join("dos_table.dat");
    let table = anderson::dos::DosTable::load(&path).unwrap();
    DosTableRef {
        path,
        expected_hash: Some(table.content_hash()),
    }
}

fn manifest_value(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn dos_run_writes_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);
    assert!(table_ref.path.exists());
    let manifest = manifest_value(&tmp.path().join("dos"));
    assert_eq!(manifest["kind"], "dos");
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
    assert_eq!(
        manifest["per_realization_seeds"].as_array().unwrap().len(),
        30
    );
    // rerunning reproduces the artifact checksum
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Dos,
        model: model_1d(60),
        stat: StatConfig {
            grid_points: Some(401),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("dos2"), 30, 7),
        dos_table: None,
    };
    run_experiment(&cfg).unwrap();
    let manifest2 = manifest_value(&tmp.path().join("dos2"));
    assert_eq!(
        manifest["outputs"][0]["sha256"],
        manifest2["outputs"][0]["sha256"]
    );
}

#[test]
fn levelstats_run_emits_report_and_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);
    let out = tmp.path().join("ls");
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Levelstats,
        model: model_1d(60),
        stat: StatConfig {
            e0: Some(0.0),
            intervals: Some(vec![(-1.0, 1.0)]),
            ..StatConfig::default()
        },
        run: run_block(&out, 120, 3),
        dos_table: Some(table_ref),
    };
    let manifest = run_experiment(&cfg).unwrap();
    assert!(manifest.gate_pass.is_some());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("levelstats_report.json")).unwrap(),
    )
    .unwrap();
    assert!(report["test"]["tv_joint"].as_f64().unwrap() >= 0.0);
    let counts = std::fs::read_to_string(out.join("levelstats_counts.csv")).unwrap();
    assert!(counts.starts_with("realization,seed,count_0\n"));
    assert_eq!(counts.lines().count(), 121);
}

#[test]
fn two_energy_and_concentration_run() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);

    let cfg = ExperimentConfig {
        kind: ExperimentKind::TwoEnergy,
        model: model_1d(60),
        stat: StatConfig {
            e0: Some(0.0),
            e0_prime: Some(0.5),
            u_plus: Some((-0.5, 0.5)),
            u_minus: Some((-0.5, 0.5)),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("te"), 150, 5),
        dos_table: Some(table_ref.clone()),
    };
    run_experiment(&cfg).unwrap();
    assert!(tmp.path().join("te").join("two_energy_counts.csv").exists());

    let mut model = model_1d(60);
    model.half_side = None;
    model.half_side_list = Some(vec![20, 40]);
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Concentration,
        model,
        stat: StatConfig {
            interval: Some((-0.5, 0.5)),
            epsilon: Some(0.2),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("conc"), 60, 6),
        dos_table: Some(table_ref),
    };
    let manifest = run_experiment(&cfg).unwrap();
    let csv = std::fs::read_to_string(tmp.path().join("conc").join("concentration_tail.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "one row per box size plus header");
    assert_eq!(manifest.per_realization_seeds.len(), 120);
}

#[test]
fn spacings_centers_joint_dcs_run() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);

    let cfg = ExperimentConfig {
        kind: ExperimentKind::Spacings,
        model: model_1d(60),
        stat: StatConfig {
            mode: Some("local".into()),
            e0: Some(0.0),
            window_width: Some(0.3),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("sp"), 40, 8),
        dos_table: Some(table_ref.clone()),
    };
    run_experiment(&cfg).unwrap();
    let survival =
        std::fs::read_to_string(tmp.path().join("sp").join("spacings_survival.csv")).unwrap();
    assert!(survival.starts_with("x,survival_empirical,survival_reference\n"));

    let cfg = ExperimentConfig {
        kind: ExperimentKind::Centers,
        model: model_1d(60),
        stat: StatConfig {
            interval: Some((-0.3, 0.3)),
            tau: Some(0.5),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("ct"), 5, 9),
        dos_table: None,
    };
    run_experiment(&cfg).unwrap();
    let records =
        std::fs::read_to_string(tmp.path().join("ct").join("centers_records.csv")).unwrap();
    assert!(records.starts_with("realization,seed,eigen_index,energy,site_0,amplitude,cloud_diameter\n"));

    let cfg = ExperimentConfig {
        kind: ExperimentKind::Joint,
        model: model_1d(60),
        stat: StatConfig {
            e0: Some(0.0),
            boxes: Some(vec![ProductBox {
                interval: (-1.0, 1.0),
                cube: vec![(-0.5, 0.5)],
            }]),
            // non-covariant scales trigger the extra report
            ell_prime: Some(60.0),
            ell_tilde: Some(121.0),
            interval: Some((-1.0, 1.0)),
            cube: Some(vec![(0.0, 0.4)]),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("jt"), 120, 10),
        dos_table: Some(table_ref.clone()),
    };
    run_experiment(&cfg).unwrap();
    assert!(tmp.path().join("jt").join("joint_report.json").exists());
    assert!(tmp.path().join("jt").join("noncovariant_report.json").exists());

    let cfg = ExperimentConfig {
        kind: ExperimentKind::Dcs,
        model: model_1d(60),
        stat: StatConfig {
            e0: Some(0.0),
            window_width: Some(0.1),
            oracle_realizations: Some(500),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("dcs"), 60, 11),
        dos_table: Some(table_ref),
    };
    run_experiment(&cfg).unwrap();
    let curve = std::fs::read_to_string(tmp.path().join("dcs").join("dcs_curve.csv")).unwrap();
    assert!(curve.starts_with("s,survival_empirical,survival_oracle\n"));
}

#[test]
fn dos_table_hash_mismatch_is_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let mut table_ref = make_table(tmp.path(), 60);
    table_ref.expected_hash = Some("deadbeef".repeat(8));
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Spacings,
        model: model_1d(60),
        stat: StatConfig {
            e0: Some(0.0),
            window_width: Some(0.3),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("sp"), 10, 1),
        dos_table: Some(table_ref),
    };
    assert!(matches!(
        run_experiment(&cfg),
        Err(Error::DosTableHashMismatch { .. })
    ));
}

#[test]
fn mismatched_table_model_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);
    let mut model = model_1d(60);
    model.disorder = DisorderSpec::standard(7.0);
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Spacings,
        model,
        stat: StatConfig {
            e0: Some(0.0),
            window_width: Some(0.3),
            ..StatConfig::default()
        },
        run: run_block(&tmp.path().join("sp"), 10, 1),
        dos_table: Some(table_ref),
    };
    let err = run_experiment(&cfg).unwrap_err();
    assert!(err.to_string().contains("disorder"), "{err}");
}

#[test]
fn validation_errors_enumerate_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        kind: ExperimentKind::TwoEnergy,
        model: model_1d(60),
        stat: StatConfig::default(),
        run: run_block(tmp.path(), 10, 1),
        dos_table: None,
    };
    let err = run_experiment(&cfg).unwrap_err();
    let msg = err.to_string();
    for field in ["stat.e0", "stat.e0_prime", "stat.u_plus", "stat.u_minus", "dos_table"] {
        assert!(msg.contains(field), "missing {field} in: {msg}");
    }
}

#[test]
fn outputs_are_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let table_ref = make_table(tmp.path(), 60);
    let kinds: Vec<(ExperimentKind, StatConfig)> = vec![
        (
            ExperimentKind::Levelstats,
            StatConfig {
                e0: Some(0.0),
                intervals: Some(vec![(-1.0, 1.0)]),
                ..StatConfig::default()
            },
        ),
        (
            ExperimentKind::Dcs,
            StatConfig {
                e0: Some(0.0),
                window_width: Some(0.1),
                oracle_realizations: Some(300),
                ..StatConfig::default()
            },
        ),
    ];
    for (kind, stat) in kinds {
        let mut checksums: Vec<Vec<String>> = Vec::new();
        for workers in [1usize, 8] {
            let out: PathBuf = tmp.path().join(format!("{}_{workers}", kind.name()));
            let cfg = ExperimentConfig {
                kind,
                model: model_1d(60),
                stat: stat.clone(),
                run: RunConfig {
                    realizations: 120,
                    master_seed: 17,
                    workers,
                    out_dir: out,
                    gate: false,
                },
                dos_table: Some(table_ref.clone()),
            };
            let manifest = run_experiment(&cfg).unwrap();
            checksums.push(manifest.outputs.iter().map(|o| o.sha256.clone()).collect());
        }
        assert_eq!(checksums[0], checksums[1], "kind {}", kind.name());
    }
}

#[test]
fn cli_runs_dos_and_gates() {
    let tmp = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_anderson");
    let out = tmp.path().join("cli_dos");
    let status = std::process::Command::new(bin)
        .args([
            "dos",
            "--dim",
            "1",
            "--half-side",
            "40",
            "--grid-points",
            "201",
            "--realizations",
            "10",
            "--seed",
            "4",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("dos_table.dat").exists());
    assert!(out.join("manifest.json").exists());

    // config file for a levelstats run, overridden by a flag
    let table = anderson::dos::DosTable::load(&out.join("dos_table.dat")).unwrap();
    let cfg_path = tmp.path().join("ls.json");
    let cfg_json = serde_json::json!({
        "kind": "levelstats",
        "model": {"dim": 1, "half_side": 40, "disorder": {"kind":"uniform","a":-0.5,"b":0.5,"coupling":5.0}, "boundary": "periodic"},
        "stat": {"e0": 0.0, "intervals": [[-1.0, 1.0]]},
        "run": {"realizations": 120, "master_seed": 2, "out_dir": tmp.path().join("cli_ls")},
        "dos_table": {"path": out.join("dos_table.dat"), "expected_hash": table.content_hash()}
    });
    std::fs::write(&cfg_path, serde_json::to_string(&cfg_json).unwrap()).unwrap();
    let output = std::process::Command::new(bin)
        .args(["levelstats", "--config"])
        .arg(&cfg_path)
        .args(["--realizations", "150"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let manifest = std::fs::read_to_string(tmp.path().join("cli_ls").join("manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    // the flag beat the config file
    assert_eq!(manifest["config"]["run"]["realizations"], 150);
}
