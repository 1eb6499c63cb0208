//! Integrated density of states N(E) and density ν(E), calibrated by
//! disorder averaging.
//!
//! The estimator is the normalized eigenvalue count: ids(E) is the average
//! over realizations of count_below(H, E)/N, which by translation
//! invariance on the torus has the same expectation as the defining local
//! trace. On d=1 storages each grid probe is an O(N) Sturm count; on dense
//! storages one no-vector diagonalization per realization serves the whole
//! grid (identical integers, counts strictly below each grid energy).
//!
//! Tables persist as a one-line JSON header (metadata plus content hash)
//! followed by a CSV body `energy,ids,density`, and are keyed by a hash of
//! (disorder, box, boundary, grid, realizations, seed) so downstream
//! statistics runs can verify they use a matching calibration.

use std::io::BufRead;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eig;
use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::model::{
    assemble_hamiltonian, sample_disorder, spectrum_bounds, BoundaryCondition, DisorderSpec,
    HamiltonianMatrix, LatticeBox, Storage,
};

/// Default number of grid points.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Default margin added beyond the spectrum envelope.
pub const DEFAULT_GRID_MARGIN: f64 = 0.5;
/// Default centered-difference half-width, in grid steps.
pub const DENSITY_HALFWIDTH_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl EnergyGrid {
    /// Uniform grid over the spectrum envelope ± 0.5.
    pub fn default_for(spec: &DisorderSpec, dim: usize) -> Self {
        let (lo, hi) = spectrum_bounds(spec, dim);
        EnergyGrid {
            min: lo - DEFAULT_GRID_MARGIN,
            max: hi + DEFAULT_GRID_MARGIN,
            points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.points).map(|k| self.min + k as f64 * step).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DosMeta {
    pub spec: DisorderSpec,
    pub dim: i64,
    pub half_side: i64,
    pub boundary: BoundaryCondition,
    pub grid: EnergyGrid,
    pub realizations: usize,
    pub master_seed: u64,
    pub estimator: String,
    pub density_halfwidth_steps: usize,
    /// Count of negative finite-difference values clipped to zero.
    pub clip_count: usize,
    /// (realization index, replacement seed) for realizations that were
    /// resampled after a solver failure.
    pub replaced_seeds: Vec<(usize, u64)>,
    /// Trapezoid mass of the density column over the grid (should be 1
    /// within a couple of percent).
    pub density_mass: f64,
}

/// Calibrated integrated density of states on an energy grid.
#[derive(Debug, Clone)]
pub struct DosTable {
    energies: Vec<f64>,
    ids: Vec<f64>,
    density: Vec<f64>,
    pub meta: DosMeta,
}

/// Fields that key a calibration; two tables with equal keys are
/// interchangeable.
#[derive(Serialize)]
struct HashKey<'a> {
    spec: &'a DisorderSpec,
    dim: i64,
    half_side: i64,
    boundary: BoundaryCondition,
    grid: EnergyGrid,
    realizations: usize,
    master_seed: u64,
}

pub fn estimate_dos(
    spec: &DisorderSpec,
    lat: &LatticeBox,
    boundary: BoundaryCondition,
    grid: &EnergyGrid,
    realizations: usize,
    master_seed: u64,
) -> Result<DosTable> {
    spec.validate()?;
    assert!(realizations >= 1, "need at least one realization");
    assert!(grid.points >= 2, "grid needs at least two points");
    let (env_lo, env_hi) = spectrum_bounds(spec, lat.dim());
    if grid.min > env_lo || grid.max < env_hi {
        return Err(Error::GridTooSmall {
            env_lo,
            env_hi,
            grid_lo: grid.min,
            grid_hi: grid.max,
        });
    }

    let energies = grid.values();
    let n = lat.volume();

    struct RealizationCounts {
        counts: Vec<u64>,
        replaced: Option<(usize, u64)>,
    }

    let per_realization: Vec<Result<RealizationCounts>> = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let mut replaced = None;
            let mut seed = derive_seed(master_seed, r as u64);
            let mut last_err = None;
            for retry in 0..=3u64 {
                if retry > 0 {
                    seed = derive_seed(seed, retry);
                    replaced = Some((r, seed));
                }
                let omega = sample_disorder(spec, lat, seed)?;
                let h = assemble_hamiltonian(lat, &omega, boundary)?;
                match grid_counts(&h, &energies) {
                    Ok(counts) => return Ok(RealizationCounts { counts, replaced }),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(Error::RealizationFailed {
                index: r,
                retries: 3,
                source: Box::new(last_err.unwrap()),
            })
        })
        .collect();

    let mut totals = vec![0u64; energies.len()];
    let mut replaced_seeds = Vec::new();
    for item in per_realization {
        let item = item?;
        for (t, c) in totals.iter_mut().zip(&item.counts) {
            *t += c;
        }
        if let Some(rep) = item.replaced {
            replaced_seeds.push(rep);
        }
    }

    let denom = (realizations * n) as f64;
    let ids: Vec<f64> = totals.iter().map(|t| *t as f64 / denom).collect();
    let (density, clip_count) = differentiate(&energies, &ids, DENSITY_HALFWIDTH_STEPS);
    let density_mass = trapezoid(&energies, &density);

    Ok(DosTable {
        energies,
        ids,
        density,
        meta: DosMeta {
            spec: spec.clone(),
            dim: lat.dim() as i64,
            half_side: lat.half_side(),
            boundary,
            grid: *grid,
            realizations,
            master_seed,
            estimator: "normalized eigenvalue count".to_string(),
            density_halfwidth_steps: DENSITY_HALFWIDTH_STEPS,
            clip_count,
            replaced_seeds,
            density_mass,
        },
    })
}

/// Eigenvalue counts strictly below each grid energy for one realization.
fn grid_counts(h: &HamiltonianMatrix, energies: &[f64]) -> Result<Vec<u64>> {
    match h.storage() {
        Storage::Dense(_) => {
            let s = eig::eigen_full(h, false)?;
            Ok(energies
                .iter()
                .map(|e| s.eigenvalues.partition_point(|v| v < e) as u64)
                .collect())
        }
        _ => energies
            .iter()
            .map(|e| eig::count_below(h, *e).map(|c| c.count as u64))
            .collect(),
    }
}

/// Centered differences of ids with the given half-width in grid steps,
/// clamped at the edges; negative values are clipped to zero and counted.
fn differentiate(energies: &[f64], ids: &[f64], halfwidth: usize) -> (Vec<f64>, usize) {
    let g = energies.len();
    let mut clip = 0;
    let density = (0..g)
        .map(|k| {
            let lo = k.saturating_sub(halfwidth);
            let hi = (k + halfwidth).min(g - 1);
            let de = energies[hi] - energies[lo];
            let mut v = if de > 0.0 { (ids[hi] - ids[lo]) / de } else { 0.0 };
            if v < 0.0 {
                clip += 1;
                v = 0.0;
            }
            v
        })
        .collect();
    (density, clip)
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

impl DosTable {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn ids(&self) -> &[f64] {
        &self.ids
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn grid_step(&self) -> f64 {
        self.meta.grid.step()
    }

    /// Direct construction from prepared columns (tests and synthetic
    /// references).
    pub fn from_columns(energies: Vec<f64>, ids: Vec<f64>, density: Vec<f64>, meta: DosMeta) -> Self {
        assert_eq!(energies.len(), ids.len());
        assert_eq!(energies.len(), density.len());
        DosTable {
            energies,
            ids,
            density,
            meta,
        }
    }

    pub fn content_hash(&self) -> String {
        let key = HashKey {
            spec: &self.meta.spec,
            dim: self.meta.dim,
            half_side: self.meta.half_side,
            boundary: self.meta.boundary,
            grid: self.meta.grid,
            realizations: self.meta.realizations,
            master_seed: self.meta.master_seed,
        };
        let bytes = serde_json::to_vec(&key).expect("hash key serializes");
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hex_string(&hasher.finalize())
    }

    fn check_range(&self, e: f64) -> Result<()> {
        let min = self.energies[0];
        let max = *self.energies.last().unwrap();
        if e < min || e > max {
            return Err(Error::OutsideCalibratedRange {
                energy: e,
                min,
                max,
            });
        }
        Ok(())
    }

    /// Linear interpolation of the integrated density of states.
    pub fn ids_at(&self, e: f64) -> Result<f64> {
        self.check_range(e)?;
        let i = self
            .energies
            .partition_point(|g| *g <= e)
            .clamp(1, self.energies.len() - 1);
        let (g0, g1) = (self.energies[i - 1], self.energies[i]);
        let t = if g1 > g0 { (e - g0) / (g1 - g0) } else { 0.0 };
        Ok(self.ids[i - 1] * (1.0 - t) + self.ids[i] * t)
    }

    /// Linear interpolation of the density column.
    pub fn density_interp(&self, e: f64) -> Result<f64> {
        self.check_range(e)?;
        let i = self
            .energies
            .partition_point(|g| *g <= e)
            .clamp(1, self.energies.len() - 1);
        let (g0, g1) = (self.energies[i - 1], self.energies[i]);
        let t = if g1 > g0 { (e - g0) / (g1 - g0) } else { 0.0 };
        Ok(self.density[i - 1] * (1.0 - t) + self.density[i] * t)
    }

    /// ν(E0) by the default centered-difference bandwidth.
    pub fn density_at_default(&self, e0: f64) -> Result<f64> {
        density_at(self, e0, self.grid_step() * self.meta.density_halfwidth_steps as f64)
    }

    /// File image: one-line JSON header, then the CSV body.
    pub fn to_file_string(&self) -> String {
        let header = serde_json::to_string(&FileHeader {
            meta: self.meta.clone(),
            hash: self.content_hash(),
        })
        .expect("table header serializes");
        let mut out = header;
        out.push('\n');
        out.push_str("energy,ids,density\n");
        for i in 0..self.energies.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.energies[i], self.ids[i], self.density[i]
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::harness::write_atomic(path, self.to_file_string().as_bytes())
    }

    pub fn load(path: &Path) -> Result<DosTable> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut lines = std::io::BufReader::new(file).lines();
        let header_line = lines
            .next()
            .ok_or_else(|| Error::MalformedDosTable("empty file".into()))?
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let header: FileHeader = serde_json::from_str(&header_line)?;
        let csv_header = lines
            .next()
            .ok_or_else(|| Error::MalformedDosTable("missing csv header".into()))?
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if csv_header.trim() != "energy,ids,density" {
            return Err(Error::MalformedDosTable(format!(
                "unexpected csv header: {csv_header}"
            )));
        }
        let mut energies = Vec::new();
        let mut ids = Vec::new();
        let mut density = Vec::new();
        for line in lines {
            let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::MalformedDosTable(format!("short row: {line}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::MalformedDosTable(format!("bad number in {line}: {e}")))
            };
            energies.push(next()?);
            ids.push(next()?);
            density.push(next()?);
        }
        let table = DosTable {
            energies,
            ids,
            density,
            meta: header.meta,
        };
        let recomputed = table.content_hash();
        if recomputed != header.hash {
            return Err(Error::DosTableHashMismatch {
                expected: header.hash,
                actual: recomputed,
            });
        }
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct FileHeader {
    meta: DosMeta,
    hash: String,
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// ν(E0) as a centered difference (N(E0+h) - N(E0-h)) / 2h interpolated
/// from the table; h must be at least two grid steps and the stencil must
/// stay inside the grid.
pub fn density_at(table: &DosTable, e0: f64, h: f64) -> Result<f64> {
    assert!(
        h >= 2.0 * table.grid_step() - 1e-12,
        "bandwidth h={h} below two grid steps"
    );
    let upper = table.ids_at(e0 + h)?;
    let lower = table.ids_at(e0 - h)?;
    Ok(((upper - lower) / (2.0 * h)).max(0.0))
}

/// N(J) = N(b) - N(a) interpolated from the table.
pub fn interval_mass(table: &DosTable, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(Error::BadInterval { lo, hi });
    }
    Ok((table.ids_at(hi)? - table.ids_at(lo)?).max(0.0))
}

/// Bandwidth-doubling diagnostic at E0: the density estimate is considered
/// locally stable when doubling h moves it by at most 5%.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandwidthDiagnostic {
    pub value_h: f64,
    pub value_2h: f64,
    pub relative_change: f64,
    pub stable: bool,
}

pub fn bandwidth_stability(table: &DosTable, e0: f64, h: f64) -> Result<BandwidthDiagnostic> {
    let value_h = density_at(table, e0, h)?;
    let value_2h = density_at(table, e0, 2.0 * h)?;
    let relative_change = (value_2h - value_h).abs() / value_h.abs().max(1e-300);
    Ok(BandwidthDiagnostic {
        value_h,
        value_2h,
        relative_change,
        stable: relative_change <= 0.05,
    })
}
