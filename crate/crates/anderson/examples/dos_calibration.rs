//! Calibrate the integrated density of states for a 1d chain, persist the
//! table, reload it, and read off ν(0) and the mass of an interval.

use std::path::Path;

use anderson::dos::{estimate_dos, interval_mass, DosTable, EnergyGrid};
use anderson::model::{BoundaryCondition, DisorderSpec, LatticeBox};

fn main() -> anderson::Result<()> {
    let spec = DisorderSpec::standard(5.0);
    let lat = LatticeBox::build(1, 250)?;
    let grid = EnergyGrid::default_for(&spec, 1);
    let table = estimate_dos(&spec, &lat, BoundaryCondition::Periodic, &grid, 50, 7)?;

    println!("content hash: {}", table.content_hash());
    println!("ids(0) = {:.5}", table.ids_at(0.0)?);
    println!("nu(0)  = {:.5}", table.density_at_default(0.0)?);
    println!("N([-0.5, 0.5]) = {:.5}", interval_mass(&table, -0.5, 0.5)?);
    println!("density mass over the grid = {:.4}", table.meta.density_mass);

    let path = Path::new("dos_example_table.dat");
    table.save(path)?;
    let reloaded = DosTable::load(path)?;
    assert_eq!(reloaded.ids(), table.ids());
    println!("saved and reloaded bit-exactly: {}", path.display());
    std::fs::remove_file(path).ok();
    Ok(())
}
