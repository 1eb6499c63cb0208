//! Experiment configuration: JSON-serializable, fully deterministic.
//! A config plus the code version determines every output byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::centers::ProductBox;
use crate::error::{Error, Result};
use crate::model::{BoundaryCondition, DisorderSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dos,
    Levelstats,
    TwoEnergy,
    Concentration,
    Spacings,
    Centers,
    Joint,
    Dcs,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Dos => "dos",
            ExperimentKind::Levelstats => "levelstats",
            ExperimentKind::TwoEnergy => "two-energy",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Spacings => "spacings",
            ExperimentKind::Centers => "centers",
            ExperimentKind::Joint => "joint",
            ExperimentKind::Dcs => "dcs",
        }
    }
}

fn default_boundary() -> BoundaryCondition {
    BoundaryCondition::Periodic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dim: i64,
    #[serde(default)]
    pub half_side: Option<i64>,
    /// Box-size sweep for the concentration experiment.
    #[serde(default)]
    pub half_side_list: Option<Vec<i64>>,
    pub disorder: DisorderSpec,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryCondition,
}

/// Statistical block; which fields are required depends on the experiment
/// kind (see `ExperimentConfig::validate`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatConfig {
    #[serde(default)]
    pub e0: Option<f64>,
    #[serde(default)]
    pub e0_prime: Option<f64>,
    /// Energy interval: J for macroscopic spacings and concentration, the
    /// raw window for `centers`.
    #[serde(default)]
    pub interval: Option<(f64, f64)>,
    /// Rescaled intervals for levelstats.
    #[serde(default)]
    pub intervals: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub u_plus: Option<(f64, f64)>,
    #[serde(default)]
    pub u_minus: Option<(f64, f64)>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// "local" or "macro" for the spacings experiment.
    #[serde(default)]
    pub mode: Option<String>,
    /// "standard" or "interval-average".
    #[serde(default)]
    pub normalization: Option<String>,
    #[serde(default)]
    pub window_width: Option<f64>,
    #[serde(default)]
    pub width_exponent: Option<f64>,
    #[serde(default)]
    pub ell: Option<f64>,
    #[serde(default)]
    pub ell_prime: Option<f64>,
    #[serde(default)]
    pub ell_tilde: Option<f64>,
    #[serde(default)]
    pub boxes: Option<Vec<ProductBox>>,
    #[serde(default)]
    pub cube: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub tau: Option<f64>,
    /// Stated acceptance floor for the kind's pass statistic.
    #[serde(default)]
    pub stated_floor: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub grid_min: Option<f64>,
    #[serde(default)]
    pub grid_max: Option<f64>,
    #[serde(default)]
    pub oracle_realizations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub realizations: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses the default pool size. Results are
    /// bit-identical for any worker count.
    #[serde(default)]
    pub workers: usize,
    pub out_dir: PathBuf,
    /// When set, the process exit status reflects the kind's pass/fail.
    #[serde(default)]
    pub gate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosTableRef {
    pub path: PathBuf,
    /// Content hash the loaded table must carry.
    #[serde(default)]
    pub expected_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ModelConfig,
    #[serde(default)]
    pub stat: StatConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub dos_table: Option<DosTableRef>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    /// Canonical serialization used for the config hash (struct field
    /// order, compact separators).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn config_hash(&self) -> String {
        super::sha256_hex(self.canonical_json().as_bytes())
    }

    /// Validate required fields per experiment kind; failures enumerate
    /// the offending field paths.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.model.dim < 1 {
            problems.push(format!("model.dim: must be >= 1, got {}", self.model.dim));
        }
        if let Err(e) = self.model.disorder.validate() {
            problems.push(format!("model.disorder: {e}"));
        }
        if self.run.realizations == 0 {
            problems.push("run.realizations: must be >= 1".to_string());
        }

        let needs_single_box = !matches!(self.kind, ExperimentKind::Concentration);
        if needs_single_box {
            match self.model.half_side {
                Some(l) if l >= 1 => {}
                Some(l) => problems.push(format!("model.half_side: must be >= 1, got {l}")),
                None => problems.push("model.half_side: required".to_string()),
            }
        } else {
            match &self.model.half_side_list {
                Some(list) if !list.is_empty() => {
                    if list.iter().any(|l| *l < 1) {
                        problems.push("model.half_side_list: entries must be >= 1".to_string());
                    }
                    if list.windows(2).any(|w| w[1] <= w[0]) {
                        problems
                            .push("model.half_side_list: must be strictly increasing".to_string());
                    }
                }
                _ => problems
                    .push("model.half_side_list: required for concentration".to_string()),
            }
        }

        let needs_table = matches!(
            self.kind,
            ExperimentKind::Levelstats
                | ExperimentKind::TwoEnergy
                | ExperimentKind::Concentration
                | ExperimentKind::Spacings
                | ExperimentKind::Joint
                | ExperimentKind::Dcs
        );
        if needs_table && self.dos_table.is_none() {
            problems.push(format!(
                "dos_table: required for kind {}",
                self.kind.name()
            ));
        }

        match self.kind {
            ExperimentKind::Dos => {}
            ExperimentKind::Levelstats => {
                if self.stat.e0.is_none() {
                    problems.push("stat.e0: required for levelstats".to_string());
                }
                match &self.stat.intervals {
                    Some(v) if !v.is_empty() => {}
                    _ => problems.push("stat.intervals: required for levelstats".to_string()),
                }
                let beta = self.stat.beta.unwrap_or(0.7);
                let lower = self.model.dim as f64 / (self.model.dim as f64 + 2.0);
                if !(beta > lower && beta < 1.0) {
                    problems.push(format!(
                        "stat.beta: must satisfy {lower} < beta < 1 for dim {}, got {beta}",
                        self.model.dim
                    ));
                }
            }
            ExperimentKind::TwoEnergy => {
                for (name, field) in [
                    ("stat.e0", self.stat.e0),
                    ("stat.e0_prime", self.stat.e0_prime),
                ] {
                    if field.is_none() {
                        problems.push(format!("{name}: required for two-energy"));
                    }
                }
                for (name, field) in [("stat.u_plus", self.stat.u_plus), ("stat.u_minus", self.stat.u_minus)]
                {
                    if field.is_none() {
                        problems.push(format!("{name}: required for two-energy"));
                    }
                }
            }
            ExperimentKind::Concentration => {
                if self.stat.interval.is_none() {
                    problems.push("stat.interval: required for concentration".to_string());
                }
                match self.stat.epsilon {
                    Some(e) if e > 0.0 && e < 1.0 => {}
                    Some(e) => {
                        problems.push(format!("stat.epsilon: must be in (0,1), got {e}"))
                    }
                    None => problems.push("stat.epsilon: required for concentration".to_string()),
                }
            }
            ExperimentKind::Spacings => match self.stat.mode.as_deref() {
                Some("local") | None => {
                    if self.stat.e0.is_none() {
                        problems.push("stat.e0: required for local spacings".to_string());
                    }
                }
                Some("macro") => {
                    if self.stat.interval.is_none() {
                        problems.push(
                            "stat.interval: required for macroscopic spacings".to_string(),
                        );
                    }
                }
                Some(other) => problems.push(format!(
                    "stat.mode: expected \"local\" or \"macro\", got {other:?}"
                )),
            },
            ExperimentKind::Centers => {
                if self.stat.interval.is_none() {
                    problems.push("stat.interval: required for centers".to_string());
                }
                if let Some(tau) = self.stat.tau {
                    if !(0.0..1.0).contains(&tau) {
                        problems.push(format!("stat.tau: must be in [0,1), got {tau}"));
                    }
                }
            }
            ExperimentKind::Joint => {
                if self.stat.e0.is_none() {
                    problems.push("stat.e0: required for joint".to_string());
                }
                match &self.stat.boxes {
                    Some(b) if !b.is_empty() => {
                        let dim = self.model.dim as usize;
                        for (i, pb) in b.iter().enumerate() {
                            if pb.cube.len() != dim {
                                problems.push(format!(
                                    "stat.boxes[{i}].cube: expected {dim} axes, got {}",
                                    pb.cube.len()
                                ));
                            }
                        }
                    }
                    _ => problems.push("stat.boxes: required for joint".to_string()),
                }
            }
            ExperimentKind::Dcs => {
                if self.stat.e0.is_none() {
                    problems.push("stat.e0: required for dcs".to_string());
                }
            }
        }

        if let Some(norm) = self.stat.normalization.as_deref() {
            if !matches!(norm, "standard" | "interval-average") {
                problems.push(format!(
                    "stat.normalization: expected \"standard\" or \"interval-average\", got {norm:?}"
                ));
            }
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigValidation(problems))
        }
    }
}
