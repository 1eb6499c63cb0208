//! Level-spacing statistics, both flavors: spacings in a shrinking window
//! around E0 against e^-x, and spacings over a macroscopic interval
//! against the density-of-states mixture g_{ν,J}.

use anderson::dos::{estimate_dos, EnergyGrid};
use anderson::model::{BoundaryCondition, DisorderSpec, LatticeBox, ModelParams};
use anderson::spacings::{dls_experiment, DlsMode, DlsParams, SpacingNormalization};

fn main() -> anderson::Result<()> {
    let spec = DisorderSpec::standard(5.0);
    let model = ModelParams {
        spec: spec.clone(),
        dim: 1,
        half_side: 400,
        boundary: BoundaryCondition::Simple,
    };
    let lat = LatticeBox::build(1, 400)?;
    let grid = EnergyGrid::default_for(&spec, 1);
    let table = estimate_dos(&spec, &lat, BoundaryCondition::Simple, &grid, 60, 7)?;

    let local = DlsParams {
        model: &model,
        table: &table,
        mode: DlsMode::Local {
            e0: 0.0,
            window_width: None,
            width_exponent: 0.3,
        },
        normalization: SpacingNormalization::Standard,
        realizations: 150,
        master_seed: 4,
    };
    let out = dls_experiment(&local)?;
    println!(
        "local:  window {:?}, {} pooled spacings, sup |S - e^-x| = {:.4}",
        out.report.window, out.report.pooled_spacings, out.report.sup_distance
    );

    let macroscopic = DlsParams {
        model: &model,
        table: &table,
        mode: DlsMode::Macroscopic {
            interval: (-1.0, 1.0),
        },
        normalization: SpacingNormalization::Standard,
        realizations: 60,
        master_seed: 5,
    };
    let out = dls_experiment(&macroscopic)?;
    println!(
        "macro:  J = {:?}, {} pooled spacings, sup |S - g| = {:.4}",
        out.report.window, out.report.pooled_spacings, out.report.sup_distance
    );
    Ok(())
}
