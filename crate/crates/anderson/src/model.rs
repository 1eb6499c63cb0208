//! Lattice geometry, disorder, and assembly of the finite-volume Anderson
//! Hamiltonian H = -Δ + V on the torus [-L,L]^d ∩ Z^d.
//!
//! The hopping term is the adjacency operator of the torus, (Hu)_n =
//! Σ_{|m-n|=1} u_m + ω_n u_n, so the matrix has unit off-diagonal entries
//! exactly on torus-adjacent pairs and the sampled potential on the
//! diagonal. In d=1 the matrix is tridiagonal (with a corner entry under
//! periodic boundary conditions), which the eigensolvers exploit.

use rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::u01;

/// Boundary condition for the restriction to the box.
///
/// `Periodic` wraps every coordinate modulo the side length. `Simple`
/// (Dirichlet) drops the wrap-around edges; in d=1 this yields a strictly
/// tridiagonal matrix and an O(N) Sturm counting fast path. The boundary
/// affects only surface terms, O(1/M) of the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Simple,
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryCondition::Periodic => write!(f, "periodic"),
            BoundaryCondition::Simple => write!(f, "simple"),
        }
    }
}

/// The discrete torus Λ = [-L,L]^d ∩ Z^d with M = 2L+1 sites per side.
///
/// Linear indices are row-major over coordinates shifted to [0,M)^d, first
/// coordinate slowest; this ordering is fixed so that outputs are
/// reproducible across runs and implementations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    dim: usize,
    half_side: i64,
    side: i64,
    volume: usize,
}

impl LatticeBox {
    /// Build the box; rejects `dim <= 0` or `half_side <= 0` and volumes
    /// that overflow the platform integer.
    pub fn build(dim: i64, half_side: i64) -> Result<Self> {
        if dim <= 0 || half_side <= 0 {
            return Err(Error::InvalidLattice { dim, half_side });
        }
        let side = 2 * half_side + 1;
        let mut volume: usize = 1;
        for _ in 0..dim {
            volume = volume
                .checked_mul(side as usize)
                .ok_or(Error::BoxTooLarge { dim, half_side })?;
        }
        Ok(LatticeBox {
            dim: dim as usize,
            half_side,
            side,
            volume,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_side(&self) -> i64 {
        self.half_side
    }

    /// Side length M = 2L+1 (odd, >= 3).
    pub fn side(&self) -> i64 {
        self.side
    }

    /// Number of sites N = M^d.
    pub fn volume(&self) -> usize {
        self.volume
    }

    /// Linear index of a site with coordinates in [-L, L]^d.
    pub fn index_of(&self, site: &[i64]) -> usize {
        debug_assert_eq!(site.len(), self.dim);
        let mut idx: usize = 0;
        for &c in site {
            debug_assert!(c.abs() <= self.half_side);
            idx = idx * self.side as usize + (c + self.half_side) as usize;
        }
        idx
    }

    /// Coordinates in [-L, L]^d of a linear index.
    pub fn site_of(&self, index: usize) -> Vec<i64> {
        debug_assert!(index < self.volume);
        let mut rem = index;
        let m = self.side as usize;
        let mut site = vec![0i64; self.dim];
        for k in (0..self.dim).rev() {
            site[k] = (rem % m) as i64 - self.half_side;
            rem /= m;
        }
        site
    }

    /// The 2d torus neighbors of a linear index (distinct since M >= 3).
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let site = self.site_of(index);
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut tmp = site.clone();
        for k in 0..self.dim {
            for step in [1i64, -1] {
                tmp[k] = wrap(site[k] + step, self.half_side);
                out.push(self.index_of(&tmp));
            }
            tmp[k] = site[k];
        }
        out
    }

    /// Neighbor in direction +step along axis `axis`, or None when a simple
    /// boundary cuts the wrap-around edge.
    fn neighbor_with_boundary(
        &self,
        site: &[i64],
        axis: usize,
        step: i64,
        bc: BoundaryCondition,
    ) -> Option<usize> {
        let raw = site[axis] + step;
        if raw.abs() <= self.half_side {
            let mut tmp = site.to_vec();
            tmp[axis] = raw;
            return Some(self.index_of(&tmp));
        }
        match bc {
            BoundaryCondition::Periodic => {
                let mut tmp = site.to_vec();
                tmp[axis] = wrap(raw, self.half_side);
                Some(self.index_of(&tmp))
            }
            BoundaryCondition::Simple => None,
        }
    }
}

fn wrap(c: i64, half_side: i64) -> i64 {
    let m = 2 * half_side + 1;
    let mut c = (c + half_side) % m;
    if c < 0 {
        c += m;
    }
    c - half_side
}

/// Single-site disorder distribution: a compactly supported bounded density
/// times a coupling multiplier λ > 0.
///
/// `Constant` is a degenerate test mode (every site gets the same value);
/// it is not a density and is flagged non-physical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DisorderSpec {
    Uniform {
        a: f64,
        b: f64,
        coupling: f64,
    },
    Piecewise {
        /// Strictly increasing breakpoints t_0 < ... < t_m.
        breakpoints: Vec<f64>,
        /// Density value on each piece [t_i, t_{i+1}); must integrate to 1.
        weights: Vec<f64>,
        coupling: f64,
    },
    Constant {
        value: f64,
        coupling: f64,
    },
}

impl DisorderSpec {
    /// Standard Anderson choice: uniform on [-1/2, 1/2] scaled by `coupling`.
    pub fn standard(coupling: f64) -> Self {
        DisorderSpec::Uniform {
            a: -0.5,
            b: 0.5,
            coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DisorderSpec::Uniform { a, b, coupling } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidDisorder(format!(
                        "uniform support [{a}, {b}] must be finite with a < b"
                    )));
                }
                check_coupling(*coupling)
            }
            DisorderSpec::Piecewise {
                breakpoints,
                weights,
                coupling,
            } => {
                if breakpoints.len() < 2 || weights.len() != breakpoints.len() - 1 {
                    return Err(Error::InvalidDisorder(format!(
                        "need m+1 breakpoints for m weights, got {} and {}",
                        breakpoints.len(),
                        weights.len()
                    )));
                }
                if breakpoints.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidDisorder("non-finite breakpoint".into()));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidDisorder(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
                if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
                    return Err(Error::InvalidDisorder("weights must be >= 0".into()));
                }
                let mass: f64 = weights
                    .iter()
                    .zip(breakpoints.windows(2))
                    .map(|(w, t)| w * (t[1] - t[0]))
                    .sum();
                if (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDisorder(format!(
                        "density integrates to {mass}, not 1"
                    )));
                }
                check_coupling(*coupling)
            }
            DisorderSpec::Constant { value, coupling } => {
                if !value.is_finite() {
                    return Err(Error::InvalidDisorder("non-finite constant value".into()));
                }
                check_coupling(*coupling)
            }
        }
    }

    /// Support [a, b] of the unscaled density.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DisorderSpec::Uniform { a, b, .. } => (*a, *b),
            DisorderSpec::Piecewise { breakpoints, .. } => {
                (breakpoints[0], *breakpoints.last().unwrap())
            }
            DisorderSpec::Constant { value, .. } => (*value, *value),
        }
    }

    pub fn coupling(&self) -> f64 {
        match self {
            DisorderSpec::Uniform { coupling, .. }
            | DisorderSpec::Piecewise { coupling, .. }
            | DisorderSpec::Constant { coupling, .. } => *coupling,
        }
    }

    /// Support of the scaled potential λ·[a, b].
    pub fn scaled_support(&self) -> (f64, f64) {
        let (a, b) = self.support();
        let lam = self.coupling();
        (lam * a, lam * b)
    }

    /// False for the degenerate constant test mode.
    pub fn is_physical(&self) -> bool {
        !matches!(self, DisorderSpec::Constant { .. })
    }

    /// Map one uniform draw u in [0,1) through the inverse CDF and coupling.
    fn transform(&self, u: f64) -> f64 {
        match self {
            DisorderSpec::Uniform { a, b, coupling } => coupling * (a + u * (b - a)),
            DisorderSpec::Piecewise {
                breakpoints,
                weights,
                coupling,
            } => {
                let mut acc = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    let len = breakpoints[i + 1] - breakpoints[i];
                    let mass = w * len;
                    if u < acc + mass || i == weights.len() - 1 {
                        let frac = if mass > 0.0 { (u - acc) / mass } else { 0.0 };
                        let frac = frac.clamp(0.0, 1.0);
                        return coupling * (breakpoints[i] + frac * len);
                    }
                    acc += mass;
                }
                unreachable!("weights empty")
            }
            DisorderSpec::Constant { value, coupling } => coupling * value,
        }
    }
}

fn check_coupling(coupling: f64) -> Result<()> {
    if coupling > 0.0 && coupling.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDisorder(format!(
            "coupling must be a positive finite real, got {coupling}"
        )))
    }
}

/// One sample of the i.i.d. potential (ω_n), tied to its seed.
#[derive(Debug, Clone)]
pub struct DisorderRealization {
    pub values: Vec<f64>,
    pub seed: u64,
    pub spec: DisorderSpec,
}

/// Draw N i.i.d. values from the density, scaled by the coupling.
///
/// Deterministic in (spec, box, seed): one ChaCha8 stream seeded by `seed`,
/// one 64-bit draw per site in linear-index order, mapped to [0,1) by
/// `(x >> 11) * 2^-53` and through the inverse CDF.
pub fn sample_disorder(spec: &DisorderSpec, lat: &LatticeBox, seed: u64) -> Result<DisorderRealization> {
    spec.validate()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..lat.volume())
        .map(|_| spec.transform(u01(&mut rng)))
        .collect();
    Ok(DisorderRealization {
        values,
        seed,
        spec: spec.clone(),
    })
}

/// Almost-sure spectrum envelope [-2d, 2d] + λ·supp g; every finite-volume
/// eigenvalue lies inside.
pub fn spectrum_bounds(spec: &DisorderSpec, dim: usize) -> (f64, f64) {
    let (lo, hi) = spec.scaled_support();
    let band = 2.0 * dim as f64;
    (-band + lo, band + hi)
}

/// Model block shared by every experiment: disorder, box, boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub spec: DisorderSpec,
    pub dim: i64,
    pub half_side: i64,
    pub boundary: BoundaryCondition,
}

impl ModelParams {
    pub fn lattice(&self) -> Result<LatticeBox> {
        LatticeBox::build(self.dim, self.half_side)
    }

    /// One disorder realization assembled into its Hamiltonian.
    pub fn realize(&self, lat: &LatticeBox, seed: u64) -> Result<HamiltonianMatrix> {
        let omega = sample_disorder(&self.spec, lat, seed)?;
        assemble_hamiltonian(lat, &omega, self.boundary)
    }
}

/// Internal storage of the symmetric Hamiltonian.
#[derive(Debug, Clone)]
pub enum Storage {
    /// d=1 with simple boundary: strictly tridiagonal.
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
    /// d=1 periodic: tridiagonal plus a corner entry coupling sites 0 and N-1.
    CyclicTridiagonal {
        diag: Vec<f64>,
        off: Vec<f64>,
        corner: f64,
    },
    /// General case, full row-major symmetric storage.
    Dense(Vec<f64>),
}

/// The assembled N×N symmetric matrix: diagonal ω_n, unit entries on
/// adjacent pairs.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    n: usize,
    dim: usize,
    boundary: BoundaryCondition,
    storage: Storage,
    inf_norm: f64,
}

/// Assemble H for the given box, potential, and boundary condition.
pub fn assemble_hamiltonian(
    lat: &LatticeBox,
    omega: &DisorderRealization,
    boundary: BoundaryCondition,
) -> Result<HamiltonianMatrix> {
    if omega.values.len() != lat.volume() {
        return Err(Error::LengthMismatch {
            got: omega.values.len(),
            expected: lat.volume(),
        });
    }
    let n = lat.volume();
    let storage = if lat.dim() == 1 {
        let diag = omega.values.clone();
        let off = vec![1.0; n - 1];
        match boundary {
            BoundaryCondition::Simple => Storage::Tridiagonal { diag, off },
            BoundaryCondition::Periodic => Storage::CyclicTridiagonal {
                diag,
                off,
                corner: 1.0,
            },
        }
    } else {
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            a[i * n + i] = omega.values[i];
            let site = lat.site_of(i);
            for axis in 0..lat.dim() {
                for step in [1i64, -1] {
                    if let Some(j) = lat.neighbor_with_boundary(&site, axis, step, boundary) {
                        a[i * n + j] = 1.0;
                    }
                }
            }
        }
        Storage::Dense(a)
    };
    Ok(HamiltonianMatrix::from_storage(lat.dim(), boundary, storage))
}

impl HamiltonianMatrix {
    fn from_storage(dim: usize, boundary: BoundaryCondition, storage: Storage) -> Self {
        let n = match &storage {
            Storage::Tridiagonal { diag, .. } | Storage::CyclicTridiagonal { diag, .. } => diag.len(),
            Storage::Dense(a) => (a.len() as f64).sqrt() as usize,
        };
        let mut h = HamiltonianMatrix {
            n,
            dim,
            boundary,
            storage,
            inf_norm: 0.0,
        };
        h.inf_norm = h.compute_inf_norm();
        h
    }

    /// Tridiagonal matrix from raw parts (test mode: arbitrary off-diagonals,
    /// optional corner entry). `off` may be empty for a hopping-free matrix.
    pub fn from_tridiagonal(diag: Vec<f64>, off: Vec<f64>, corner: Option<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length must be n-1");
        let storage = match corner {
            Some(c) if diag.len() >= 3 => Storage::CyclicTridiagonal {
                diag,
                off,
                corner: c,
            },
            _ => Storage::Tridiagonal { diag, off },
        };
        Self::from_storage(1, BoundaryCondition::Simple, storage)
    }

    /// Dense symmetric matrix from row-major entries (test mode).
    pub fn from_dense(n: usize, a: Vec<f64>) -> Self {
        assert_eq!(a.len(), n * n);
        Self::from_storage(1, BoundaryCondition::Periodic, Storage::Dense(a))
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn lattice_dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// Row-sum norm ‖H‖_∞; the scale for pivot floors and residual bounds.
    pub fn inf_norm(&self) -> f64 {
        self.inf_norm
    }

    fn compute_inf_norm(&self) -> f64 {
        let n = self.n;
        match &self.storage {
            Storage::Tridiagonal { diag, off } => (0..n)
                .map(|i| {
                    let mut s = diag[i].abs();
                    if i > 0 {
                        s += off[i - 1].abs();
                    }
                    if i + 1 < n {
                        s += off[i].abs();
                    }
                    s
                })
                .fold(0.0, f64::max),
            Storage::CyclicTridiagonal { diag, off, corner } => (0..n)
                .map(|i| {
                    let mut s = diag[i].abs();
                    if i > 0 {
                        s += off[i - 1].abs();
                    }
                    if i + 1 < n {
                        s += off[i].abs();
                    }
                    if i == 0 || i == n - 1 {
                        s += corner.abs();
                    }
                    s
                })
                .fold(0.0, f64::max),
            Storage::Dense(a) => (0..n)
                .map(|i| a[i * n..(i + 1) * n].iter().map(|x| x.abs()).sum())
                .fold(0.0, f64::max),
        }
    }

    /// y = H x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        match &self.storage {
            Storage::Tridiagonal { diag, off } => {
                for i in 0..n {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += off[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        s += off[i] * x[i + 1];
                    }
                    y[i] = s;
                }
            }
            Storage::CyclicTridiagonal { diag, off, corner } => {
                for i in 0..n {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += off[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        s += off[i] * x[i + 1];
                    }
                    y[i] = s;
                }
                y[0] += corner * x[n - 1];
                y[n - 1] += corner * x[0];
            }
            Storage::Dense(a) => {
                for i in 0..n {
                    y[i] = a[i * n..(i + 1) * n]
                        .iter()
                        .zip(x)
                        .map(|(aij, xj)| aij * xj)
                        .sum();
                }
            }
        }
    }

    /// Full dense copy (row-major), for the Householder path.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        match &self.storage {
            Storage::Dense(a) => a.clone(),
            Storage::Tridiagonal { diag, off } => {
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    a[i * n + i] = diag[i];
                    if i + 1 < n {
                        a[i * n + i + 1] = off[i];
                        a[(i + 1) * n + i] = off[i];
                    }
                }
                a
            }
            Storage::CyclicTridiagonal { diag, off, corner } => {
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    a[i * n + i] = diag[i];
                    if i + 1 < n {
                        a[i * n + i + 1] = off[i];
                        a[(i + 1) * n + i] = off[i];
                    }
                }
                a[n - 1] = *corner;
                a[(n - 1) * n] = *corner;
                a
            }
        }
    }

    /// Diagonal entries (the potential, for assembled matrices).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.n;
        match &self.storage {
            Storage::Tridiagonal { diag, .. } | Storage::CyclicTridiagonal { diag, .. } => {
                diag.clone()
            }
            Storage::Dense(a) => (0..n).map(|i| a[i * n + i]).collect(),
        }
    }

    /// Union of Gershgorin discs as a single enclosing interval.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        let n = self.n;
        let diag = self.diagonal();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius = self.row_offdiag_abs_sum(i);
            lo = lo.min(diag[i] - radius);
            hi = hi.max(diag[i] + radius);
        }
        (lo, hi)
    }

    pub fn row_offdiag_abs_sum(&self, i: usize) -> f64 {
        let n = self.n;
        match &self.storage {
            Storage::Tridiagonal { off, .. } => {
                let mut s = 0.0;
                if i > 0 {
                    s += off[i - 1].abs();
                }
                if i + 1 < n {
                    s += off[i].abs();
                }
                s
            }
            Storage::CyclicTridiagonal { off, corner, .. } => {
                let mut s = 0.0;
                if i > 0 {
                    s += off[i - 1].abs();
                }
                if i + 1 < n {
                    s += off[i].abs();
                }
                if i == 0 || i == n - 1 {
                    s += corner.abs();
                }
                s
            }
            Storage::Dense(a) => a[i * n..(i + 1) * n]
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| x.abs())
                .sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_torus_neighbors() {
        let lat = LatticeBox::build(1, 1).unwrap();
        assert_eq!(lat.side(), 3);
        assert_eq!(lat.volume(), 3);
        let mut nb = lat.neighbors(0);
        nb.sort_unstable();
        assert_eq!(nb, vec![1, 2]);
    }

    #[test]
    fn two_dim_all_sites_have_four_distinct_neighbors() {
        let lat = LatticeBox::build(2, 1).unwrap();
        assert_eq!(lat.volume(), 9);
        for i in 0..9 {
            let mut nb = lat.neighbors(i);
            nb.sort_unstable();
            nb.dedup();
            assert_eq!(nb.len(), 4, "site {i} has fewer than 4 distinct neighbors");
        }
    }

    #[test]
    fn wraparound_in_long_chain() {
        let lat = LatticeBox::build(1, 500).unwrap();
        assert_eq!(lat.volume(), 1001);
        // + direction neighbor of the last site is site 0
        let nb = lat.neighbors(1000);
        assert!(nb.contains(&0));
    }

    #[test]
    fn index_maps_are_inverse_bijections() {
        let lat = LatticeBox::build(3, 2).unwrap();
        for idx in 0..lat.volume() {
            let site = lat.site_of(idx);
            assert_eq!(lat.index_of(&site), idx);
        }
    }

    #[test]
    fn rejects_bad_boxes() {
        assert!(matches!(
            LatticeBox::build(0, 3),
            Err(Error::InvalidLattice { .. })
        ));
        assert!(matches!(
            LatticeBox::build(1, 0),
            Err(Error::InvalidLattice { .. })
        ));
        assert!(matches!(
            LatticeBox::build(64, 100),
            Err(Error::BoxTooLarge { .. })
        ));
    }

    #[test]
    fn disorder_support_scaling() {
        let spec = DisorderSpec::standard(5.0);
        let lat = LatticeBox::build(1, 100).unwrap();
        let omega = sample_disorder(&spec, &lat, 7).unwrap();
        assert!(omega.values.iter().all(|v| (-2.5..=2.5).contains(v)));
    }

    #[test]
    fn disorder_is_deterministic_in_seed() {
        let spec = DisorderSpec::standard(5.0);
        let lat = LatticeBox::build(1, 50).unwrap();
        let a = sample_disorder(&spec, &lat, 123).unwrap();
        let b = sample_disorder(&spec, &lat, 123).unwrap();
        assert_eq!(a.values, b.values, "same (spec, box, seed) must be bit-identical");
        let c = sample_disorder(&spec, &lat, 124).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn disorder_sample_mean_within_clt_envelope() {
        // Central-limit oracle: uniform on [-1/2,1/2] times coupling 5 has
        // mean 0 and standard deviation 5/sqrt(12); a sample of size 1e5
        // has its mean within 4 sigma/sqrt(n) except with prob ~6e-5.
        let spec = DisorderSpec::standard(5.0);
        let n: usize = 100_000;
        // d=1 box with exactly 1e5 sites does not exist (odd side), so draw
        // via two half-size realizations is avoided; use L=(n-1)/2.
        let lat = LatticeBox::build(1, ((n - 1) / 2) as i64).unwrap();
        let omega = sample_disorder(&spec, &lat, 42).unwrap();
        let mean: f64 = omega.values.iter().sum::<f64>() / omega.values.len() as f64;
        let bound = 4.0 * (5.0 / 12f64.sqrt()) / (omega.values.len() as f64).sqrt();
        assert!(
            mean.abs() <= bound,
            "sample mean {mean} exceeds CLT envelope {bound}"
        );
    }

    #[test]
    fn piecewise_density_must_normalize() {
        let bad = DisorderSpec::Piecewise {
            breakpoints: vec![0.0, 1.0],
            weights: vec![0.5],
            coupling: 1.0,
        };
        assert!(bad.validate().is_err());
        let good = DisorderSpec::Piecewise {
            breakpoints: vec![-1.0, 0.0, 1.0],
            weights: vec![0.25, 0.75],
            coupling: 2.0,
        };
        good.validate().unwrap();
        assert_eq!(good.scaled_support(), (-2.0, 2.0));
    }

    #[test]
    fn disorder_spec_json_round_trip() {
        let spec = DisorderSpec::Uniform {
            a: -0.5,
            b: 0.5,
            coupling: 5.0,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"uniform","a":-0.5,"b":0.5,"coupling":5.0}"#);
        let back: DisorderSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn spectrum_bounds_examples() {
        let s = DisorderSpec::standard(10.0);
        assert_eq!(spectrum_bounds(&s, 1), (-7.0, 7.0));
        let s2 = DisorderSpec::Uniform {
            a: 0.0,
            b: 1.0,
            coupling: 1.0,
        };
        assert_eq!(spectrum_bounds(&s2, 2), (-4.0, 5.0));
        let s3 = DisorderSpec::Constant {
            value: 0.0,
            coupling: 1.0,
        };
        assert_eq!(spectrum_bounds(&s3, 1), (-2.0, 2.0));
    }

    #[test]
    fn triangle_assembly() {
        let lat = LatticeBox::build(1, 1).unwrap();
        let omega = DisorderRealization {
            values: vec![5.0, 0.0, 0.0],
            seed: 0,
            spec: DisorderSpec::standard(1.0),
        };
        let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();
        let a = h.to_dense();
        let expected = [5.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        assert_eq!(a, expected.to_vec());
        let trace: f64 = h.diagonal().iter().sum();
        assert_eq!(trace, 5.0);
    }

    #[test]
    fn two_dim_row_sums_are_regular() {
        // omega = 0 on the 3x3 torus: every row sums to 2d = 4, so the
        // constant vector is an eigenvector with eigenvalue 4.
        let lat = LatticeBox::build(2, 1).unwrap();
        let omega = DisorderRealization {
            values: vec![0.0; 9],
            seed: 0,
            spec: DisorderSpec::standard(1.0),
        };
        let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();
        let x = vec![1.0; 9];
        let mut y = vec![0.0; 9];
        h.apply(&x, &mut y);
        for v in y {
            assert!((v - 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn simple_boundary_is_tridiagonal_in_one_dim() {
        let lat = LatticeBox::build(1, 2).unwrap();
        let spec = DisorderSpec::standard(1.0);
        let omega = sample_disorder(&spec, &lat, 1).unwrap();
        let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Simple).unwrap();
        assert!(matches!(h.storage(), Storage::Tridiagonal { .. }));
        let hp = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();
        assert!(matches!(hp.storage(), Storage::CyclicTridiagonal { .. }));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let lat = LatticeBox::build(1, 2).unwrap();
        let omega = DisorderRealization {
            values: vec![0.0; 4],
            seed: 0,
            spec: DisorderSpec::standard(1.0),
        };
        assert!(matches!(
            assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic),
            Err(Error::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn index_round_trip_random_boxes(dim in 1i64..=3, half in 1i64..=4, pick in 0usize..1000) {
            let lat = LatticeBox::build(dim, half).unwrap();
            let idx = pick % lat.volume();
            let site = lat.site_of(idx);
            prop_assert_eq!(lat.index_of(&site), idx);
        }

        #[test]
        fn every_site_has_2d_distinct_neighbors(dim in 1i64..=3, half in 1i64..=3, pick in 0usize..1000) {
            let lat = LatticeBox::build(dim, half).unwrap();
            let idx = pick % lat.volume();
            let mut nb = lat.neighbors(idx);
            nb.sort_unstable();
            nb.dedup();
            prop_assert_eq!(nb.len(), 2 * lat.dim());
        }

        #[test]
        fn sampled_values_stay_in_scaled_support(seed in 0u64..1000) {
            let spec = DisorderSpec::standard(5.0);
            let lat = LatticeBox::build(1, 20).unwrap();
            let omega = sample_disorder(&spec, &lat, seed).unwrap();
            let (lo, hi) = spec.scaled_support();
            prop_assert!(omega.values.iter().all(|v| (lo..=hi).contains(v)));
        }
    }
}
