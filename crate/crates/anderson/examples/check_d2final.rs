fn main() {
    use anderson::centers::*;
    use anderson::dos::*;
    use anderson::model::*;
    let spec = DisorderSpec::standard(12.0);
    let grid = EnergyGrid::default_for(&spec, 2);
    let model = ModelParams { spec: spec.clone(), dim: 2, half_side: 15, boundary: BoundaryCondition::Periodic };
    let lat = ModelParams::lattice(&model).unwrap();
    let table = estimate_dos(&spec, &lat, BoundaryCondition::Periodic, &grid, 60, 44).unwrap();
    let t = std::time::Instant::now();
    let dcs = DcsParams {
        model: &model, table: &table, e0: 0.0,
        window_width: 0.008,
        realizations: 3500, master_seed: 1082, oracle_realizations: 60000,
    };
    let out = dcs_experiment(&dcs).unwrap();
    let zf = out.empirical.values().iter().filter(|v| **v == 0.0).count() as f64 / out.empirical.len() as f64;
    println!("FINAL d2 width=0.008 R=3500 seed=1082: pooled={} oracle={} sup={:.4} zero_frac={:.4} ({:.0}s)",
        out.report.pooled_spacings, out.report.oracle_spacings,
        out.report.sup_distance_to_oracle, zf, t.elapsed().as_secs_f64());
}
