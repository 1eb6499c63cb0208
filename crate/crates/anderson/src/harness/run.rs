//! Experiment dispatch and artifact output.
//!
//! Every experiment writes its artifacts atomically (temp file + rename)
//! and the manifest last. Parallelism is over disorder realizations with
//! order-preserving collection and commutative merges, so outputs are
//! bit-identical for any worker count; the manifest's wall-clock field is
//! the one nondeterministic value and the manifest is therefore not part
//! of its own output list.

use std::time::Instant;

use serde::Serialize;

use super::{derive_seed, sha256_hex, write_atomic, ExperimentConfig, ExperimentKind};
use crate::centers::{
    centers_experiment, dcs_experiment, joint_experiment, noncovariant_experiment, CentersParams,
    DcsParams, JointParams, NoncovariantParams, NoncovariantScales,
};
use crate::dos::{estimate_dos, DosTable, EnergyGrid};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::pointproc::{
    concentration_experiment, levelstats_experiment, two_energy_experiment, ConcentrationParams,
    CountSample, LevelStatsParams, ScaleSpec, TwoEnergyParams,
};
use crate::spacings::{dls_experiment, DlsMode, DlsParams, SpacingNormalization};

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub kind: String,
    pub config_hash: String,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub per_realization_seeds: Vec<u64>,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputFile>,
    /// Pass/fail of the kind's gate statistic, when the kind has one.
    pub gate_pass: Option<bool>,
    pub wall_clock_seconds: f64,
}

struct Outcome {
    files: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
    seeds: Vec<u64>,
    gate_pass: Option<bool>,
}

/// Validate, run, and persist one experiment; returns the manifest that
/// was written to `<out_dir>/manifest.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let start = Instant::now();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if config.run.workers > 0 {
        builder = builder.num_threads(config.run.workers);
    }
    let pool = builder.build().expect("worker pool");
    let outcome = pool.install(|| dispatch(config))?;

    let mut outputs = Vec::with_capacity(outcome.files.len());
    for (name, bytes) in &outcome.files {
        let path = config.run.out_dir.join(name);
        write_atomic(&path, bytes)?;
        outputs.push(OutputFile {
            path: name.clone(),
            sha256: sha256_hex(bytes),
        });
    }

    let manifest = RunManifest {
        kind: config.kind.name().to_string(),
        config_hash: config.config_hash(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        per_realization_seeds: outcome.seeds,
        warnings: outcome.warnings,
        outputs,
        gate_pass: outcome.gate_pass,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest_bytes = json_bytes(&manifest)?;
    write_atomic(&config.run.out_dir.join("manifest.json"), &manifest_bytes)?;
    Ok(manifest)
}

fn dispatch(config: &ExperimentConfig) -> Result<Outcome> {
    match config.kind {
        ExperimentKind::Dos => run_dos(config),
        ExperimentKind::Levelstats => run_levelstats(config),
        ExperimentKind::TwoEnergy => run_two_energy(config),
        ExperimentKind::Concentration => run_concentration(config),
        ExperimentKind::Spacings => run_spacings(config),
        ExperimentKind::Centers => run_centers(config),
        ExperimentKind::Joint => run_joint(config),
        ExperimentKind::Dcs => run_dcs(config),
    }
}

fn model_params(config: &ExperimentConfig) -> ModelParams {
    ModelParams {
        spec: config.model.disorder.clone(),
        dim: config.model.dim,
        half_side: config.model.half_side.unwrap_or(1),
        boundary: config.model.boundary,
    }
}

fn realization_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count).map(|r| derive_seed(master, r as u64)).collect()
}

/// Load the referenced calibration table, enforce the hash, and check it
/// matches the experiment's model.
fn load_table(config: &ExperimentConfig) -> Result<(DosTable, Vec<String>)> {
    let tref = config.dos_table.as_ref().expect("validated presence");
    let table = DosTable::load(&tref.path)?;
    if let Some(expected) = &tref.expected_hash {
        let actual = table.content_hash();
        if &actual != expected {
            return Err(Error::DosTableHashMismatch {
                expected: expected.clone(),
                actual,
            });
        }
    }
    let mut problems = Vec::new();
    let mut warnings = Vec::new();
    if table.meta.spec != config.model.disorder {
        problems.push("dos_table: calibrated disorder differs from model.disorder".to_string());
    }
    if table.meta.dim != config.model.dim {
        problems.push(format!(
            "dos_table: calibrated dim {} differs from model.dim {}",
            table.meta.dim, config.model.dim
        ));
    }
    if table.meta.boundary != config.model.boundary {
        problems.push("dos_table: calibrated boundary differs from model.boundary".to_string());
    }
    if let Some(half_side) = config.model.half_side {
        if table.meta.half_side != half_side {
            warnings.push(format!(
                "dos_table calibrated at half_side {} but the experiment runs at {half_side}; the integrated density of states is volume-stable, proceed with care",
                table.meta.half_side
            ));
        }
    }
    if problems.is_empty() {
        Ok((table, warnings))
    } else {
        Err(Error::ConfigValidation(problems))
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        s.push_str(&row);
        s.push('\n');
    }
    s.into_bytes()
}

fn counts_csv(samples: &[CountSample], labels: &[String]) -> Vec<u8> {
    let header = format!("realization,seed,{}", labels.join(","));
    csv_bytes(
        &header,
        samples.iter().enumerate().map(|(i, s)| {
            let counts: Vec<String> = s.counts.iter().map(|c| c.to_string()).collect();
            format!("{i},{},{}", s.seed, counts.join(","))
        }),
    )
}

fn run_dos(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let lat = model.lattice()?;
    let default_grid = EnergyGrid::default_for(&model.spec, lat.dim());
    let grid = EnergyGrid {
        min: config.stat.grid_min.unwrap_or(default_grid.min),
        max: config.stat.grid_max.unwrap_or(default_grid.max),
        points: config.stat.grid_points.unwrap_or(default_grid.points),
    };
    let table = estimate_dos(
        &model.spec,
        &lat,
        model.boundary,
        &grid,
        config.run.realizations,
        config.run.master_seed,
    )?;
    let mut warnings = Vec::new();
    if !model.spec.is_physical() {
        warnings.push("constant-potential test mode is non-physical".to_string());
    }
    if (table.meta.density_mass - 1.0).abs() > 0.02 {
        warnings.push(format!(
            "density mass {} outside 1 ± 0.02",
            table.meta.density_mass
        ));
    }
    Ok(Outcome {
        files: vec![(
            "dos_table.dat".to_string(),
            table.to_file_string().into_bytes(),
        )],
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: None,
    })
}

fn run_levelstats(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let params = LevelStatsParams {
        model: &model,
        table: &table,
        e0: config.stat.e0.unwrap(),
        intervals: config.stat.intervals.clone().unwrap(),
        scale: ScaleSpec {
            beta: config.stat.beta.unwrap_or(0.7),
            delta: config.stat.delta.unwrap_or(0.1),
        },
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
        stated_floor: config.stat.stated_floor.unwrap_or(0.05),
    };
    let mut samples = Vec::new();
    let report = levelstats_experiment(&params, Some(&mut samples))?;
    warnings.extend(report.warnings.clone());
    let labels: Vec<String> = (0..params.intervals.len())
        .map(|i| format!("count_{i}"))
        .collect();
    Ok(Outcome {
        files: vec![
            ("levelstats_report.json".to_string(), json_bytes(&report)?),
            ("levelstats_counts.csv".to_string(), counts_csv(&samples, &labels)),
        ],
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: Some(report.test.pass),
    })
}

fn run_two_energy(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let params = TwoEnergyParams {
        model: &model,
        table: &table,
        e0: config.stat.e0.unwrap(),
        e0_prime: config.stat.e0_prime.unwrap(),
        u_plus: config.stat.u_plus.unwrap(),
        u_minus: config.stat.u_minus.unwrap(),
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
        stated_floor: config.stat.stated_floor.unwrap_or(0.08),
    };
    let mut samples = Vec::new();
    let report = two_energy_experiment(&params, Some(&mut samples))?;
    warnings.extend(report.warnings.clone());
    Ok(Outcome {
        files: vec![
            ("two_energy_report.json".to_string(), json_bytes(&report)?),
            (
                "two_energy_counts.csv".to_string(),
                counts_csv(&samples, &["k_plus".to_string(), "k_minus".to_string()]),
            ),
        ],
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: Some(report.independence_pass),
    })
}

fn run_concentration(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let half_sides = config.model.half_side_list.clone().unwrap();
    let params = ConcentrationParams {
        model: &model,
        table: &table,
        half_sides: half_sides.clone(),
        interval: config.stat.interval.unwrap(),
        epsilon: config.stat.epsilon.unwrap(),
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
    };
    let report = concentration_experiment(&params)?;
    if !report.nonincreasing {
        warnings.push("tail probabilities are not monotone in the box size".to_string());
    }
    let csv = csv_bytes(
        "half_side,volume,epsilon,expected_count,mean_count,tail_probability,wilson_low,wilson_high,ldp_bound_half",
        report.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.half_side,
                r.volume,
                r.epsilon,
                r.expected_count,
                r.mean_count,
                r.tail_probability,
                r.wilson_low,
                r.wilson_high,
                r.ldp_bound_half
            )
        }),
    );
    let floor = config.stat.stated_floor.unwrap_or(0.05);
    let gate = report.nonincreasing
        && report
            .rows
            .last()
            .map(|r| r.tail_probability <= floor)
            .unwrap_or(false);
    let seeds = (0..half_sides.len() * config.run.realizations)
        .map(|i| derive_seed(config.run.master_seed, i as u64))
        .collect();
    Ok(Outcome {
        files: vec![
            ("concentration_report.json".to_string(), json_bytes(&report)?),
            ("concentration_tail.csv".to_string(), csv),
        ],
        warnings,
        seeds,
        gate_pass: Some(gate),
    })
}

fn run_spacings(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let mode = match config.stat.mode.as_deref() {
        Some("macro") => DlsMode::Macroscopic {
            interval: config.stat.interval.unwrap(),
        },
        _ => DlsMode::Local {
            e0: config.stat.e0.unwrap(),
            window_width: config.stat.window_width,
            width_exponent: config.stat.width_exponent.unwrap_or(0.3),
        },
    };
    let normalization = match config.stat.normalization.as_deref() {
        Some("interval-average") => SpacingNormalization::IntervalAverage,
        _ => SpacingNormalization::Standard,
    };
    let params = DlsParams {
        model: &model,
        table: &table,
        mode,
        normalization,
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
    };
    let outcome = dls_experiment(&params)?;
    warnings.extend(outcome.report.warnings.clone());
    let default_floor = match mode {
        DlsMode::Local { .. } => 0.05,
        DlsMode::Macroscopic { .. } => 0.08,
    };
    let floor = config.stat.stated_floor.unwrap_or(default_floor);
    let pooled_csv = csv_bytes(
        "spacing",
        outcome.spacings.values().iter().map(|v| v.to_string()),
    );
    let survival_csv = csv_bytes(
        "x,survival_empirical,survival_reference",
        outcome
            .curve
            .iter()
            .map(|(x, se, sr)| format!("{x},{se},{sr}")),
    );
    Ok(Outcome {
        files: vec![
            ("spacings_report.json".to_string(), json_bytes(&outcome.report)?),
            ("spacings_pooled.csv".to_string(), pooled_csv),
            ("spacings_survival.csv".to_string(), survival_csv),
        ],
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: Some(outcome.report.sup_distance <= floor),
    })
}

fn run_centers(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let params = CentersParams {
        model: &model,
        window: config.stat.interval.unwrap(),
        tau: config.stat.tau.unwrap_or(0.5),
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
    };
    let (report, rows) = centers_experiment(&params)?;
    let dim = config.model.dim as usize;
    let site_cols: Vec<String> = (0..dim).map(|k| format!("site_{k}")).collect();
    let header = format!(
        "realization,seed,eigen_index,energy,{},amplitude,cloud_diameter",
        site_cols.join(",")
    );
    let csv = csv_bytes(
        &header,
        rows.iter().map(|r| {
            let sites: Vec<String> = r.site.iter().map(|c| c.to_string()).collect();
            format!(
                "{},{},{},{},{},{},{}",
                r.realization,
                r.seed,
                r.eigen_index,
                r.energy,
                sites.join(","),
                r.amplitude,
                r.cloud_diameter
            )
        }),
    );
    Ok(Outcome {
        files: vec![
            ("centers_report.json".to_string(), json_bytes(&report)?),
            ("centers_records.csv".to_string(), csv),
        ],
        warnings: Vec::new(),
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: None,
    })
}

fn run_joint(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let lat = model.lattice()?;
    let params = JointParams {
        model: &model,
        table: &table,
        e0: config.stat.e0.unwrap(),
        ell: config.stat.ell.unwrap_or(lat.side() as f64),
        boxes: config.stat.boxes.clone().unwrap(),
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
        stated_floor: config.stat.stated_floor.unwrap_or(0.1),
    };
    let mut samples = Vec::new();
    let report = joint_experiment(&params, Some(&mut samples))?;
    warnings.extend(report.warnings.clone());
    let labels: Vec<String> = (0..params.boxes.len())
        .map(|i| format!("count_{i}"))
        .collect();
    let mut files = vec![
        ("joint_report.json".to_string(), json_bytes(&report)?),
        ("joint_counts.csv".to_string(), counts_csv(&samples, &labels)),
    ];

    // optional non-covariant regime check, when the extra scales are given
    if let (Some(ell_prime), Some(ell_tilde), Some(cube), Some(j)) = (
        config.stat.ell_prime,
        config.stat.ell_tilde,
        config.stat.cube.clone(),
        config.stat.interval,
    ) {
        let nc = NoncovariantParams {
            model: &model,
            table: &table,
            e0: config.stat.e0.unwrap(),
            scales: NoncovariantScales {
                ell: params.ell,
                ell_prime,
                ell_tilde,
            },
            j,
            cube,
            realizations: config.run.realizations,
            master_seed: derive_seed(config.run.master_seed, 0x7E9E),
        };
        let nc_report = noncovariant_experiment(&nc)?;
        files.push((
            "noncovariant_report.json".to_string(),
            json_bytes(&nc_report)?,
        ));
    }

    Ok(Outcome {
        files,
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: Some(report.test.pass),
    })
}

fn run_dcs(config: &ExperimentConfig) -> Result<Outcome> {
    let model = model_params(config);
    let (table, mut warnings) = load_table(config)?;
    let lat = model.lattice()?;
    let default_width = 0.9 / (lat.volume() as f64).ln().powi(lat.dim() as i32);
    let params = DcsParams {
        model: &model,
        table: &table,
        e0: config.stat.e0.unwrap(),
        window_width: config.stat.window_width.unwrap_or(default_width),
        realizations: config.run.realizations,
        master_seed: config.run.master_seed,
        oracle_realizations: config.stat.oracle_realizations.unwrap_or(4000),
    };
    let outcome = dcs_experiment(&params)?;
    warnings.extend(outcome.report.warnings.clone());
    let floor = config.stat.stated_floor.unwrap_or(0.08);
    let spacings_csv = csv_bytes(
        "spacing",
        outcome.empirical.values().iter().map(|v| v.to_string()),
    );
    let curve_csv = csv_bytes(
        "s,survival_empirical,survival_oracle",
        outcome
            .curve
            .iter()
            .map(|(s, se, so)| format!("{s},{se},{so}")),
    );
    Ok(Outcome {
        files: vec![
            ("dcs_report.json".to_string(), json_bytes(&outcome.report)?),
            ("dcs_spacings.csv".to_string(), spacings_csv),
            ("dcs_curve.csv".to_string(), curve_csv),
        ],
        warnings,
        seeds: realization_seeds(config.run.master_seed, config.run.realizations),
        gate_pass: Some(outcome.report.sup_distance_to_oracle <= floor),
    })
}
