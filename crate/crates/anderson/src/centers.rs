//! Localization centers and their statistics.
//!
//! A center is a site where |φ| attains its maximum. In the localized
//! regime the joint process of rescaled energies ν(E0)(E_j - E0)·ℓ^d and
//! rescaled centers x_j/ℓ converges to a unit Poisson process once the two
//! scalings are covariant, and the nearest-neighbor distances between
//! centers with energy in a small window, normalized by the mean spacing
//! (ν(E0)|I|)^(-1/d), follow the law of a homogeneous Poisson cloud.
//! Distances use the max norm on the torus throughout, matching the cubic
//! box geometry.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dos::DosTable;
use crate::eig::{eigenpairs_in_window, SpectralData};
use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::model::{LatticeBox, ModelParams};
use crate::pointproc::{count_distribution_test, CountSample, CountTestReport};
use crate::spacings::{dls_statistic, sup_distance_between, EmpiricalDistribution};
use crate::stats::{sample_poisson, uniform_index};

/// Seed tag for the Poisson oracle stream.
const ORACLE_TAG: u64 = 0x0A_C1E5;
const CALIBRATION_TAG: u64 = 0xC0DE_CA11;

/// Max-norm distance on the torus between two sites.
pub fn torus_distance(lat: &LatticeBox, a: &[i64], b: &[i64]) -> i64 {
    let m = lat.side();
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let w = (x - y).rem_euclid(m);
            w.min(m - w)
        })
        .max()
        .unwrap_or(0)
}

/// Site of maximal |φ|; ties broken by the smallest linear index.
#[derive(Debug, Clone, Serialize)]
pub struct LocalizationCenter {
    pub linear_index: usize,
    pub site: Vec<i64>,
    pub amplitude: f64,
}

pub fn localization_center(vector: &[f64], lat: &LatticeBox) -> Result<LocalizationCenter> {
    debug_assert_eq!(vector.len(), lat.volume());
    let mut best = 0usize;
    let mut amp = 0.0f64;
    for (i, v) in vector.iter().enumerate() {
        let a = v.abs();
        if a > amp {
            amp = a;
            best = i;
        }
    }
    if amp == 0.0 {
        return Err(Error::ZeroVector);
    }
    debug_assert!(
        (vector.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() <= 1e-10,
        "center extraction expects a normalized vector"
    );
    Ok(LocalizationCenter {
        linear_index: best,
        site: lat.site_of(best),
        amplitude: amp,
    })
}

/// Max-norm torus diameter of the near-maximal set {γ : |φ(γ)| ≥ (1-τ)·max}.
/// τ = 0 gives the exact argmax set.
pub fn center_cloud_diameter(vector: &[f64], lat: &LatticeBox, tau: f64) -> Result<i64> {
    assert!((0.0..1.0).contains(&tau), "tau must be in [0, 1)");
    let max = vector.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Err(Error::ZeroVector);
    }
    let threshold = (1.0 - tau) * max;
    let cloud: Vec<Vec<i64>> = vector
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() >= threshold)
        .map(|(i, _)| lat.site_of(i))
        .collect();
    let mut diameter = 0;
    for i in 0..cloud.len() {
        for j in (i + 1)..cloud.len() {
            diameter = diameter.max(torus_distance(lat, &cloud[i], &cloud[j]));
        }
    }
    Ok(diameter)
}

/// A point of the joint (rescaled energy, rescaled center) process.
#[derive(Debug, Clone, Serialize)]
pub struct JointPoint {
    /// ν(E0)·(E_j - E0)·ℓ^d
    pub xi: f64,
    /// center coordinates divided by ℓ, componentwise
    pub x: Vec<f64>,
    pub eigen_index: usize,
    pub energy: f64,
    pub center_linear: usize,
}

/// Build joint points from windowed eigenpairs at spatial scale ℓ.
/// Warns when ℓ sits outside the admissible range (well above log|Λ|, at
/// most the box side).
pub fn joint_points(
    spectral: &SpectralData,
    e0: f64,
    nu0: f64,
    ell: f64,
    lat: &LatticeBox,
) -> Result<(Vec<JointPoint>, Vec<String>)> {
    let vectors = spectral
        .eigenvectors
        .as_ref()
        .ok_or(Error::MissingEigenvectors)?;
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive { energy: e0, nu: nu0 });
    }
    let mut warnings = Vec::new();
    let volume = lat.volume() as f64;
    if ell <= 5.0 * volume.ln() {
        warnings.push(format!(
            "spatial scale ell = {ell} is not well above log|Λ| = {:.2}",
            volume.ln()
        ));
    }
    if ell > lat.side() as f64 {
        warnings.push(format!(
            "spatial scale ell = {ell} exceeds the box side {}",
            lat.side()
        ));
    }
    let ell_d = ell.powi(lat.dim() as i32);
    let points = spectral
        .eigenvalues
        .iter()
        .zip(vectors)
        .enumerate()
        .map(|(i, (energy, vector))| {
            let center = localization_center(vector, lat)?;
            Ok(JointPoint {
                xi: nu0 * (energy - e0) * ell_d,
                x: center.site.iter().map(|c| *c as f64 / ell).collect(),
                eigen_index: spectral.global_offset + i,
                energy: *energy,
                center_linear: center.linear_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((points, warnings))
}

/// A product box: an energy interval times a spatial cube (both in
/// rescaled units, endpoints closed).
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ProductBox {
    pub interval: (f64, f64),
    pub cube: Vec<(f64, f64)>,
}

impl ProductBox {
    fn contains(&self, p: &JointPoint) -> bool {
        let (lo, hi) = self.interval;
        if p.xi < lo || p.xi > hi {
            return false;
        }
        p.x.iter()
            .zip(&self.cube)
            .all(|(c, (clo, chi))| *c >= *clo && *c <= *chi)
    }

    /// Lebesgue measure |I|·|C|, the Poisson reference mean.
    pub fn reference_mean(&self) -> f64 {
        let mut m = self.interval.1 - self.interval.0;
        for (lo, hi) in &self.cube {
            m *= hi - lo;
        }
        m
    }

    fn overlaps(&self, other: &ProductBox) -> bool {
        let energy_overlap =
            self.interval.0 < other.interval.1 && other.interval.0 < self.interval.1;
        if !energy_overlap {
            return false;
        }
        self.cube
            .iter()
            .zip(&other.cube)
            .all(|((alo, ahi), (blo, bhi))| alo < bhi && blo < ahi)
    }
}

/// Exact counts of joint points in pairwise disjoint product boxes.
pub fn product_box_counts(points: &[JointPoint], boxes: &[ProductBox]) -> Result<Vec<u64>> {
    for i in 0..boxes.len() {
        for j in (i + 1)..boxes.len() {
            if boxes[i].overlaps(&boxes[j]) {
                return Err(Error::BoxesNotDisjoint {
                    first: i,
                    second: j,
                });
            }
        }
    }
    Ok(boxes
        .iter()
        .map(|b| points.iter().filter(|p| b.contains(p)).count() as u64)
        .collect())
}

/// Scales for the non-covariant counting: energies at ℓ, spatial cube C at
/// ℓ̃, with the regime set by the ratio ℓ̃/ℓ'.
#[derive(Debug, Clone, Serialize)]
pub struct NoncovariantScales {
    pub ell: f64,
    pub ell_prime: f64,
    pub ell_tilde: f64,
}

/// Count points with ξ (at scale ℓ) in J and center/ℓ̃ in C (equivalently
/// center/ℓ' in C·(ℓ̃/ℓ')); the normalized count multiplies by
/// (ℓ/ℓ̃)^(-d).
pub fn noncovariant_count(
    spectral: &SpectralData,
    e0: f64,
    nu0: f64,
    scales: &NoncovariantScales,
    j: (f64, f64),
    cube: &[(f64, f64)],
    lat: &LatticeBox,
) -> Result<(u64, f64)> {
    let (points, _) = joint_points(spectral, e0, nu0, scales.ell, lat)?;
    let d = lat.dim() as i32;
    let raw = points
        .iter()
        .filter(|p| {
            if p.xi < j.0 || p.xi > j.1 {
                return false;
            }
            let site = lat.site_of(p.center_linear);
            site.iter()
                .zip(cube)
                .all(|(c, (lo, hi))| {
                    let y = *c as f64 / scales.ell_tilde;
                    y >= *lo && y <= *hi
                })
        })
        .count() as u64;
    let normalized = (scales.ell / scales.ell_tilde).powi(-d) * raw as f64;
    Ok((raw, normalized))
}

/// Normalized nearest-neighbor distances between centers: for each center,
/// the max-norm torus distance to the closest other center, multiplied by
/// (ν(E0)·|I|)^(1/d) so the reference mean spacing is one.
pub fn center_spacings(
    centers: &[LocalizationCenter],
    nu0: f64,
    interval_len: f64,
    lat: &LatticeBox,
) -> Result<Vec<f64>> {
    if centers.len() < 2 {
        return Err(Error::InsufficientCenters {
            got: centers.len(),
        });
    }
    let normalizer = (nu0 * interval_len).powf(1.0 / lat.dim() as f64);
    Ok((0..centers.len())
        .map(|i| {
            let nearest = (0..centers.len())
                .filter(|j| *j != i)
                .map(|j| torus_distance(lat, &centers[i].site, &centers[j].site))
                .min()
                .unwrap();
            nearest as f64 * normalizer
        })
        .collect())
}

/// Parameters for the center-spacing experiment around E0.
pub struct DcsParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub e0: f64,
    /// Window width |I|; should be at most 1/log^d(volume).
    pub window_width: f64,
    pub realizations: usize,
    pub master_seed: u64,
    /// Poisson-oracle realizations used to build the reference curve.
    pub oracle_realizations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DcsReport {
    pub e0: f64,
    pub nu0: f64,
    pub window: (f64, f64),
    pub volume: usize,
    pub intensity_per_site: f64,
    pub normalizer: f64,
    pub realizations: usize,
    pub skipped_realizations: usize,
    pub pooled_spacings: usize,
    pub oracle_realizations: usize,
    pub oracle_spacings: usize,
    /// Sup distance between the empirical curve and the same-intensity
    /// Poisson-oracle curve (the gated statistic).
    pub sup_distance_to_oracle: f64,
    /// Sup distance to s ↦ e^(-s^d), reported for reference only; the
    /// constant in the exponent depends on the metric convention.
    pub sup_distance_to_exp_sd: f64,
    pub warnings: Vec<String>,
}

pub struct DcsOutcome {
    pub report: DcsReport,
    pub empirical: EmpiricalDistribution,
    pub oracle: EmpiricalDistribution,
    /// (s, empirical survival, oracle survival)
    pub curve: Vec<(f64, f64, f64)>,
}

/// Center-spacing statistics: pool normalized nearest-neighbor distances
/// of centers with energy in the window across realizations, and compare
/// against a homogeneous Poisson cloud of the same intensity on the same
/// discrete torus, identically normalized.
pub fn dcs_experiment(p: &DcsParams) -> Result<DcsOutcome> {
    let lat = p.model.lattice()?;
    let volume = lat.volume();
    let nu0 = p.table.density_at_default(p.e0)?;
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive {
            energy: p.e0,
            nu: nu0,
        });
    }
    let window = (p.e0 - p.window_width / 2.0, p.e0 + p.window_width / 2.0);
    let mut warnings = Vec::new();
    let dim = lat.dim();
    let log_bound = 1.0 / (volume as f64).ln().powi(dim as i32);
    if p.window_width > log_bound {
        warnings.push(format!(
            "window width {} exceeds 1/log^d(volume) = {log_bound:.4}; the limit law needs shrinking windows",
            p.window_width
        ));
    }
    let intensity = nu0 * p.window_width;

    struct PerRealization {
        spacings: Vec<f64>,
        skipped: bool,
    }

    let results: Vec<PerRealization> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            // fewer than two levels contribute nothing; the inertia count
            // answers that much cheaper than extracting eigenvectors
            if crate::eig::count_in_interval(&h, window.0, window.1)?.count < 2 {
                return Ok(PerRealization {
                    spacings: Vec::new(),
                    skipped: true,
                });
            }
            let w = eigenpairs_in_window(&h, window.0, window.1, true)?;
            let vectors = w.data.eigenvectors.as_ref().unwrap();
            let centers: Vec<LocalizationCenter> = vectors
                .iter()
                .map(|v| localization_center(v, &lat))
                .collect::<Result<Vec<_>>>()?;
            if centers.len() < 2 {
                return Ok(PerRealization {
                    spacings: Vec::new(),
                    skipped: true,
                });
            }
            let spacings = center_spacings(&centers, nu0, p.window_width, &lat)?;
            Ok(PerRealization {
                spacings,
                skipped: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = Vec::new();
    let mut skipped = 0;
    for r in results {
        pooled.extend(r.spacings);
        if r.skipped {
            skipped += 1;
        }
    }
    if pooled.is_empty() {
        return Err(Error::InsufficientCenters { got: 0 });
    }

    let (oracle_pool, oracle_used) = poisson_cloud_spacings(
        &lat,
        intensity,
        p.oracle_realizations,
        derive_seed(p.master_seed, ORACLE_TAG),
        nu0,
        p.window_width,
    );

    let empirical = EmpiricalDistribution::new(pooled);
    let oracle = EmpiricalDistribution::new(oracle_pool);
    let sup_distance_to_oracle = sup_distance_between(&empirical, &oracle);
    let d_exp = dls_statistic(&empirical, |s: f64| (-s.powi(dim as i32)).exp());

    let curve = {
        let n = empirical.len();
        let step = (n / 512).max(1);
        (0..n)
            .step_by(step)
            .map(|i| {
                let s = empirical.values()[i];
                (s, empirical.survival(s), oracle.survival(s))
            })
            .collect()
    };

    let report = DcsReport {
        e0: p.e0,
        nu0,
        window,
        volume,
        intensity_per_site: intensity,
        normalizer: (nu0 * p.window_width).powf(1.0 / dim as f64),
        realizations: p.realizations,
        skipped_realizations: skipped,
        pooled_spacings: empirical.len(),
        oracle_realizations: p.oracle_realizations,
        oracle_spacings: oracle_used,
        sup_distance_to_oracle,
        sup_distance_to_exp_sd: d_exp,
        warnings,
    };
    Ok(DcsOutcome {
        report,
        empirical,
        oracle,
        curve,
    })
}

/// Nearest-neighbor spacings of homogeneous Poisson clouds on the discrete
/// torus: K ~ Poisson(intensity·N) points dropped uniformly on the sites,
/// normalized exactly like the center spacings.
fn poisson_cloud_spacings(
    lat: &LatticeBox,
    intensity: f64,
    realizations: usize,
    seed: u64,
    nu0: f64,
    interval_len: f64,
) -> (Vec<f64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lat.volume();
    let mean = intensity * n as f64;
    let mut pool = Vec::new();
    for _ in 0..realizations {
        let k = sample_poisson(&mut rng, mean) as usize;
        if k < 2 {
            continue;
        }
        let centers: Vec<LocalizationCenter> = (0..k)
            .map(|_| {
                let idx = uniform_index(&mut rng, n);
                LocalizationCenter {
                    linear_index: idx,
                    site: lat.site_of(idx),
                    amplitude: 1.0,
                }
            })
            .collect();
        if let Ok(s) = center_spacings(&centers, nu0, interval_len, lat) {
            pool.extend(s);
        }
    }
    let count = pool.len();
    (pool, count)
}

/// Parameters for the covariant joint (energy, center) experiment.
pub struct JointParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub e0: f64,
    pub ell: f64,
    pub boxes: Vec<ProductBox>,
    pub realizations: usize,
    pub master_seed: u64,
    pub stated_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JointReport {
    pub e0: f64,
    pub nu0: f64,
    pub ell: f64,
    pub volume: usize,
    pub boxes: Vec<ProductBox>,
    pub means: Vec<f64>,
    pub realizations: usize,
    pub master_seed: u64,
    pub test: CountTestReport,
    pub warnings: Vec<String>,
}

/// Joint counts over disjoint product boxes against the product-Poisson
/// law with Lebesgue means |I|·|C|.
pub fn joint_experiment(
    p: &JointParams,
    samples_out: Option<&mut Vec<CountSample>>,
) -> Result<JointReport> {
    let lat = p.model.lattice()?;
    let volume = lat.volume();
    let nu0 = p.table.density_at_default(p.e0)?;
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive {
            energy: p.e0,
            nu: nu0,
        });
    }
    // energy window covering every box's interval
    let xi_lo = p
        .boxes
        .iter()
        .map(|b| b.interval.0)
        .fold(f64::INFINITY, f64::min);
    let xi_hi = p
        .boxes
        .iter()
        .map(|b| b.interval.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let ell_d = p.ell.powi(lat.dim() as i32);
    let c = nu0 * ell_d;
    let window = (p.e0 + xi_lo / c - f64::EPSILON, p.e0 + xi_hi / c + f64::EPSILON);

    let mut shared_warnings: Vec<String> = Vec::new();
    let samples: Vec<(CountSample, Vec<String>)> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let w = eigenpairs_in_window(&h, window.0, window.1, true)?;
            let (points, warnings) = joint_points(&w.data, p.e0, nu0, p.ell, &lat)?;
            let counts = product_box_counts(&points, &p.boxes)?;
            Ok((CountSample { counts, seed }, warnings))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((_, w)) = samples.first() {
        shared_warnings.extend(w.clone());
    }

    let count_samples: Vec<CountSample> = samples.iter().map(|(s, _)| s.clone()).collect();
    let means: Vec<f64> = p.boxes.iter().map(|b| b.reference_mean()).collect();
    let test = count_distribution_test(
        &count_samples,
        &means,
        p.stated_floor,
        derive_seed(p.master_seed, CALIBRATION_TAG),
    );

    let report = JointReport {
        e0: p.e0,
        nu0,
        ell: p.ell,
        volume,
        boxes: p.boxes.clone(),
        means,
        realizations: p.realizations,
        master_seed: p.master_seed,
        test,
        warnings: shared_warnings,
    };
    if let Some(out) = samples_out {
        *out = count_samples;
    }
    Ok(report)
}

/// Parameters for the non-covariant regime checks.
pub struct NoncovariantParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub e0: f64,
    pub scales: NoncovariantScales,
    pub j: (f64, f64),
    pub cube: Vec<(f64, f64)>,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoncovariantReport {
    pub e0: f64,
    pub nu0: f64,
    pub scales: NoncovariantScales,
    pub j: (f64, f64),
    pub cube: Vec<(f64, f64)>,
    pub realizations: usize,
    pub zero_fraction: f64,
    pub mean_raw: f64,
    pub mean_normalized: f64,
    /// |J|·|C|, the regime-2 limit of the mean normalized count.
    pub lebesgue_product: f64,
}

pub fn noncovariant_experiment(p: &NoncovariantParams) -> Result<NoncovariantReport> {
    let lat = p.model.lattice()?;
    let nu0 = p.table.density_at_default(p.e0)?;
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive {
            energy: p.e0,
            nu: nu0,
        });
    }
    let ell_d = p.scales.ell.powi(lat.dim() as i32);
    let c = nu0 * ell_d;
    let window = (p.e0 + p.j.0 / c - f64::EPSILON, p.e0 + p.j.1 / c + f64::EPSILON);

    let outcomes: Vec<(u64, f64)> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let w = eigenpairs_in_window(&h, window.0, window.1, true)?;
            noncovariant_count(&w.data, p.e0, nu0, &p.scales, p.j, &p.cube, &lat)
        })
        .collect::<Result<Vec<_>>>()?;

    let rf = p.realizations as f64;
    let zero_fraction = outcomes.iter().filter(|(raw, _)| *raw == 0).count() as f64 / rf;
    let mean_raw = outcomes.iter().map(|(raw, _)| *raw as f64).sum::<f64>() / rf;
    let mean_normalized = outcomes.iter().map(|(_, n)| *n).sum::<f64>() / rf;
    let mut lebesgue_product = p.j.1 - p.j.0;
    for (lo, hi) in &p.cube {
        lebesgue_product *= hi - lo;
    }
    Ok(NoncovariantReport {
        e0: p.e0,
        nu0,
        scales: p.scales.clone(),
        j: p.j,
        cube: p.cube.clone(),
        realizations: p.realizations,
        zero_fraction,
        mean_raw,
        mean_normalized,
        lebesgue_product,
    })
}

/// Parameters for the per-center record dump and the cloud-diameter
/// diagnostic.
pub struct CentersParams<'a> {
    pub model: &'a ModelParams,
    pub window: (f64, f64),
    pub tau: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CenterRow {
    pub realization: usize,
    pub seed: u64,
    pub eigen_index: usize,
    pub energy: f64,
    pub site: Vec<i64>,
    pub amplitude: f64,
    pub cloud_diameter: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CentersReport {
    pub window: (f64, f64),
    pub tau: f64,
    pub realizations: usize,
    pub center_count: usize,
    pub median_cloud_diameter: f64,
    pub max_cloud_diameter: i64,
    pub mean_levels_per_realization: f64,
}

/// Extract per-center records (eigen index, energy, site, amplitude,
/// near-maximal cloud diameter at τ) for every eigenpair in the window.
pub fn centers_experiment(p: &CentersParams) -> Result<(CentersReport, Vec<CenterRow>)> {
    let lat = p.model.lattice()?;
    let rows_per_real: Vec<Vec<CenterRow>> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let w = eigenpairs_in_window(&h, p.window.0, p.window.1, true)?;
            let vectors = w.data.eigenvectors.as_ref().unwrap();
            w.data
                .eigenvalues
                .iter()
                .zip(vectors)
                .enumerate()
                .map(|(i, (energy, vector))| {
                    let center = localization_center(vector, &lat)?;
                    let diameter = center_cloud_diameter(vector, &lat, p.tau)?;
                    Ok(CenterRow {
                        realization: r,
                        seed,
                        eigen_index: w.data.global_offset + i,
                        energy: *energy,
                        site: center.site,
                        amplitude: center.amplitude,
                        cloud_diameter: diameter,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<CenterRow> = rows_per_real.into_iter().flatten().collect();
    let mut diameters: Vec<i64> = rows.iter().map(|r| r.cloud_diameter).collect();
    diameters.sort_unstable();
    let median = if diameters.is_empty() {
        0.0
    } else if diameters.len() % 2 == 1 {
        diameters[diameters.len() / 2] as f64
    } else {
        (diameters[diameters.len() / 2 - 1] + diameters[diameters.len() / 2]) as f64 / 2.0
    };
    let report = CentersReport {
        window: p.window,
        tau: p.tau,
        realizations: p.realizations,
        center_count: rows.len(),
        median_cloud_diameter: median,
        max_cloud_diameter: diameters.last().copied().unwrap_or(0),
        mean_levels_per_realization: rows.len() as f64 / p.realizations as f64,
    };
    Ok((report, rows))
}
