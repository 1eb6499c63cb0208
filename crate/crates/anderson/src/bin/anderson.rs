//! Command-line front end: each subcommand builds an `ExperimentConfig`
//! (flags override config-file fields, which override defaults) and hands
//! it to `harness::run_experiment`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anderson::centers::ProductBox;
use anderson::harness::{
    run_experiment, DosTableRef, ExperimentConfig, ExperimentKind, ModelConfig, RunConfig,
    StatConfig,
};
use anderson::model::{BoundaryCondition, DisorderSpec};

#[derive(Parser)]
#[command(
    name = "anderson",
    version,
    about = "Spectral statistics of the finite-volume Anderson model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<i64>,
    #[arg(long)]
    half_side: Option<i64>,
    /// Disorder spec as JSON, e.g. {"kind":"uniform","a":-0.5,"b":0.5,"coupling":5.0}
    #[arg(long)]
    disorder: Option<String>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<BoundaryCondition>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = default). Outputs are identical for any count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dos_table: Option<PathBuf>,
    /// Expected content hash of the referenced table.
    #[arg(long)]
    dos_table_hash: Option<String>,
    /// Exit nonzero when the experiment's gate statistic fails.
    #[arg(long)]
    gate: bool,
}

fn parse_boundary(s: &str) -> Result<BoundaryCondition, String> {
    match s {
        "periodic" => Ok(BoundaryCondition::Periodic),
        "simple" => Ok(BoundaryCondition::Simple),
        other => Err(format!("expected 'periodic' or 'simple', got '{other}'")),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected 'lo,hi', got '{s}'"));
    }
    let lo = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let hi = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

/// "ilo,ihi:clo,chi[:clo,chi...]" — energy interval, then one spatial
/// range per axis.
fn parse_box(s: &str) -> Result<ProductBox, String> {
    let mut parts = s.split(':');
    let interval = parse_pair(parts.next().ok_or("empty box spec")?)?;
    let cube: Vec<(f64, f64)> = parts.map(parse_pair).collect::<Result<_, _>>()?;
    if cube.is_empty() {
        return Err(format!("box '{s}' has no spatial ranges"));
    }
    Ok(ProductBox { interval, cube })
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Calibrate the integrated density of states by disorder averaging.
    Dos {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        grid_min: Option<f64>,
        #[arg(long)]
        grid_max: Option<f64>,
    },
    /// Rescaled eigenvalue counts near E0 against the Poisson law.
    Levelstats {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        e0: Option<f64>,
        /// Rescaled interval 'lo,hi'; repeat for several disjoint intervals.
        #[arg(long = "interval", value_parser = parse_pair)]
        intervals: Vec<(f64, f64)>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Joint counts at two reference energies: independence test.
    TwoEnergy {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        e0: Option<f64>,
        #[arg(long)]
        e0_prime: Option<f64>,
        #[arg(long, value_parser = parse_pair)]
        u_plus: Option<(f64, f64)>,
        #[arg(long, value_parser = parse_pair)]
        u_minus: Option<(f64, f64)>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Eigenvalue-count concentration over a sweep of box sizes.
    Concentration {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated half sides, e.g. 125,250,500.
        #[arg(long, value_delimiter = ',')]
        half_sides: Vec<i64>,
        #[arg(long, value_parser = parse_pair)]
        interval: Option<(f64, f64)>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Level-spacing statistics, local (e^-x) or macroscopic (g_{nu,J}).
    Spacings {
        #[command(flatten)]
        common: CommonArgs,
        /// 'local' or 'macro'.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        e0: Option<f64>,
        #[arg(long, value_parser = parse_pair)]
        interval: Option<(f64, f64)>,
        #[arg(long)]
        window_width: Option<f64>,
        #[arg(long)]
        width_exponent: Option<f64>,
        /// 'standard' or 'interval-average'.
        #[arg(long)]
        normalization: Option<String>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Per-center records and near-maximal cloud diameters in a window.
    Centers {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = parse_pair)]
        interval: Option<(f64, f64)>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Covariant joint (energy, center) counts over product boxes.
    Joint {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        e0: Option<f64>,
        #[arg(long)]
        ell: Option<f64>,
        /// Product box 'ilo,ihi:clo,chi[:...]'; repeat per box.
        #[arg(long = "box", value_parser = parse_box)]
        boxes: Vec<ProductBox>,
        #[arg(long)]
        ell_prime: Option<f64>,
        #[arg(long)]
        ell_tilde: Option<f64>,
        /// Spatial cube for the non-covariant check, 'lo,hi' per axis.
        #[arg(long = "cube", value_parser = parse_pair)]
        cube: Vec<(f64, f64)>,
        /// Energy set J for the non-covariant check.
        #[arg(long, value_parser = parse_pair)]
        interval: Option<(f64, f64)>,
        #[arg(long)]
        floor: Option<f64>,
    },
    /// Localization-center spacing statistics against the Poisson oracle.
    Dcs {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        e0: Option<f64>,
        #[arg(long)]
        window_width: Option<f64>,
        #[arg(long)]
        oracle_realizations: Option<usize>,
        #[arg(long)]
        floor: Option<f64>,
    },
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Dos { .. } => ExperimentKind::Dos,
            Command::Levelstats { .. } => ExperimentKind::Levelstats,
            Command::TwoEnergy { .. } => ExperimentKind::TwoEnergy,
            Command::Concentration { .. } => ExperimentKind::Concentration,
            Command::Spacings { .. } => ExperimentKind::Spacings,
            Command::Centers { .. } => ExperimentKind::Centers,
            Command::Joint { .. } => ExperimentKind::Joint,
            Command::Dcs { .. } => ExperimentKind::Dcs,
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Dos { common, .. }
            | Command::Levelstats { common, .. }
            | Command::TwoEnergy { common, .. }
            | Command::Concentration { common, .. }
            | Command::Spacings { common, .. }
            | Command::Centers { common, .. }
            | Command::Joint { common, .. }
            | Command::Dcs { common, .. } => common,
        }
    }
}

fn default_config(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        model: ModelConfig {
            dim: 1,
            half_side: None,
            half_side_list: None,
            disorder: DisorderSpec::standard(5.0),
            boundary: BoundaryCondition::Periodic,
        },
        stat: StatConfig::default(),
        run: RunConfig {
            realizations: 100,
            master_seed: 0,
            workers: 0,
            out_dir: PathBuf::from("out"),
            gate: false,
        },
        dos_table: None,
    }
}

fn build_config(cmd: &Command) -> Result<ExperimentConfig, String> {
    let kind = cmd.kind();
    let common = cmd.common();

    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).map_err(|e| e.to_string())?;
            if cfg.kind != kind {
                return Err(format!(
                    "config file is for kind '{}' but the subcommand is '{}'",
                    cfg.kind.name(),
                    kind.name()
                ));
            }
            cfg
        }
        None => default_config(kind),
    };

    // common overrides
    if let Some(dim) = common.dim {
        cfg.model.dim = dim;
    }
    if let Some(half) = common.half_side {
        cfg.model.half_side = Some(half);
    }
    if let Some(dis) = &common.disorder {
        cfg.model.disorder = serde_json::from_str::<DisorderSpec>(dis)
            .map_err(|e| format!("--disorder: {e}"))?;
    }
    if let Some(bc) = common.boundary {
        cfg.model.boundary = bc;
    }
    if let Some(r) = common.realizations {
        cfg.run.realizations = r;
    }
    if let Some(s) = common.seed {
        cfg.run.master_seed = s;
    }
    if let Some(w) = common.workers {
        cfg.run.workers = w;
    }
    if let Some(out) = &common.out {
        cfg.run.out_dir = out.clone();
    }
    if let Some(path) = &common.dos_table {
        cfg.dos_table = Some(DosTableRef {
            path: path.clone(),
            expected_hash: common.dos_table_hash.clone(),
        });
    }
    if common.gate {
        cfg.run.gate = true;
    }

    // subcommand overrides
    match cmd {
        Command::Dos {
            grid_points,
            grid_min,
            grid_max,
            ..
        } => {
            cfg.stat.grid_points = grid_points.or(cfg.stat.grid_points);
            cfg.stat.grid_min = grid_min.or(cfg.stat.grid_min);
            cfg.stat.grid_max = grid_max.or(cfg.stat.grid_max);
        }
        Command::Levelstats {
            e0,
            intervals,
            beta,
            delta,
            floor,
            ..
        } => {
            cfg.stat.e0 = e0.or(cfg.stat.e0);
            if !intervals.is_empty() {
                cfg.stat.intervals = Some(intervals.clone());
            }
            cfg.stat.beta = beta.or(cfg.stat.beta);
            cfg.stat.delta = delta.or(cfg.stat.delta);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
        Command::TwoEnergy {
            e0,
            e0_prime,
            u_plus,
            u_minus,
            floor,
            ..
        } => {
            cfg.stat.e0 = e0.or(cfg.stat.e0);
            cfg.stat.e0_prime = e0_prime.or(cfg.stat.e0_prime);
            cfg.stat.u_plus = u_plus.or(cfg.stat.u_plus);
            cfg.stat.u_minus = u_minus.or(cfg.stat.u_minus);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
        Command::Concentration {
            half_sides,
            interval,
            epsilon,
            floor,
            ..
        } => {
            if !half_sides.is_empty() {
                cfg.model.half_side_list = Some(half_sides.clone());
            }
            cfg.stat.interval = interval.or(cfg.stat.interval);
            cfg.stat.epsilon = epsilon.or(cfg.stat.epsilon);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
        Command::Spacings {
            mode,
            e0,
            interval,
            window_width,
            width_exponent,
            normalization,
            floor,
            ..
        } => {
            cfg.stat.mode = mode.clone().or(cfg.stat.mode);
            cfg.stat.e0 = e0.or(cfg.stat.e0);
            cfg.stat.interval = interval.or(cfg.stat.interval);
            cfg.stat.window_width = window_width.or(cfg.stat.window_width);
            cfg.stat.width_exponent = width_exponent.or(cfg.stat.width_exponent);
            cfg.stat.normalization = normalization.clone().or(cfg.stat.normalization);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
        Command::Centers { interval, tau, .. } => {
            cfg.stat.interval = interval.or(cfg.stat.interval);
            cfg.stat.tau = tau.or(cfg.stat.tau);
        }
        Command::Joint {
            e0,
            ell,
            boxes,
            ell_prime,
            ell_tilde,
            cube,
            interval,
            floor,
            ..
        } => {
            cfg.stat.e0 = e0.or(cfg.stat.e0);
            cfg.stat.ell = ell.or(cfg.stat.ell);
            if !boxes.is_empty() {
                cfg.stat.boxes = Some(boxes.clone());
            }
            cfg.stat.ell_prime = ell_prime.or(cfg.stat.ell_prime);
            cfg.stat.ell_tilde = ell_tilde.or(cfg.stat.ell_tilde);
            if !cube.is_empty() {
                cfg.stat.cube = Some(cube.clone());
            }
            cfg.stat.interval = interval.or(cfg.stat.interval);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
        Command::Dcs {
            e0,
            window_width,
            oracle_realizations,
            floor,
            ..
        } => {
            cfg.stat.e0 = e0.or(cfg.stat.e0);
            cfg.stat.window_width = window_width.or(cfg.stat.window_width);
            cfg.stat.oracle_realizations = oracle_realizations.or(cfg.stat.oracle_realizations);
            cfg.stat.stated_floor = floor.or(cfg.stat.stated_floor);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli.command) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&cfg) {
        Ok(manifest) => {
            println!(
                "{}: wrote {} artifact(s) to {}",
                manifest.kind,
                manifest.outputs.len(),
                cfg.run.out_dir.display()
            );
            for out in &manifest.outputs {
                println!("  {}  sha256:{}", out.path, out.sha256);
            }
            for w in &manifest.warnings {
                println!("warning: {w}");
            }
            match manifest.gate_pass {
                Some(pass) => {
                    println!("gate: {}", if pass { "PASS" } else { "FAIL" });
                    if cfg.run.gate && !pass {
                        return ExitCode::from(1);
                    }
                }
                None => {}
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
