//! Assemble a small Anderson Hamiltonian, diagonalize it, and verify the
//! spectrum sits inside the almost-sure envelope and the Gershgorin union.

use anderson::eig::eigen_full;
use anderson::model::{
    assemble_hamiltonian, sample_disorder, spectrum_bounds, BoundaryCondition, DisorderSpec,
    LatticeBox,
};

fn main() -> anderson::Result<()> {
    let spec = DisorderSpec::standard(5.0);
    let lat = LatticeBox::build(1, 50)?;
    let omega = sample_disorder(&spec, &lat, 42)?;
    let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic)?;

    let s = eigen_full(&h, true)?;
    let (lo, hi) = spectrum_bounds(&spec, lat.dim());
    println!(
        "N = {}, spectrum in [{:.4}, {:.4}], envelope [{lo}, {hi}]",
        s.len(),
        s.eigenvalues.first().unwrap(),
        s.eigenvalues.last().unwrap()
    );
    assert!(s.eigenvalues.iter().all(|e| (lo..=hi).contains(e)));

    let trace: f64 = omega.values.iter().sum();
    let eigensum: f64 = s.eigenvalues.iter().sum();
    println!("trace check: sum omega = {trace:.10}, sum eigenvalues = {eigensum:.10}");
    println!("max residual over sampled pairs: {:.2e}", s.residual_bound);
    Ok(())
}
