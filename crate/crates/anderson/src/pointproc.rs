//! Local level statistics: rescaling spectra around a reference energy,
//! empirical interval counts, and calibrated total-variation tests against
//! the Poisson limit laws, plus the two-energy independence experiment and
//! the eigenvalue-count concentration experiment.
//!
//! The rescaling ξ_j = |Λ| ν(E0) (E_j - E0) makes the mean local spacing
//! one; in the localized regime the rescaled configuration converges to a
//! unit-intensity Poisson process, so counts in disjoint intervals become
//! independent Poisson variables with the interval lengths as means.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dos::{interval_mass, DosTable};
use crate::eig::count_in_interval;
use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::model::ModelParams;
use crate::stats::{
    calibrate_independence_threshold, calibrate_tv_threshold, ln_factorial, poisson_pmf_with_tail,
    sample_poisson, tv_distance, wilson_interval, JointPmf,
};

/// Seed tag for calibration streams; far above any realization index.
const CALIBRATION_TAG: u64 = 0xC0DE_CA11;

/// A spectrum rescaled around E0: ξ_j = volume · ν(E0) · (E_j - E0).
#[derive(Debug, Clone)]
pub struct RescaledConfiguration {
    pub e0: f64,
    pub nu0: f64,
    pub volume: usize,
    /// Sorted rescaled points.
    pub points: Vec<f64>,
}

/// Per-interval counts for one realization.
#[derive(Debug, Clone, Serialize)]
pub struct CountSample {
    pub counts: Vec<u64>,
    pub seed: u64,
}

/// Window/separation exponents for the admissible-scale checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSpec {
    pub beta: f64,
    pub delta: f64,
}

impl ScaleSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let lower = dim as f64 / (dim as f64 + 2.0);
        if !(self.beta > lower && self.beta < 1.0) {
            return Err(Error::InadmissibleExponent {
                beta: self.beta,
                lower,
                dim,
            });
        }
        assert!(self.delta > 0.0, "separation exponent must be positive");
        Ok(())
    }
}

/// Rescale eigenvalues around E0. Order is preserved; the map is exactly
/// invertible via E_j = E0 + ξ_j / (volume·ν(E0)).
pub fn rescale_levels(
    levels: &[f64],
    e0: f64,
    nu0: f64,
    volume: usize,
) -> Result<RescaledConfiguration> {
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive { energy: e0, nu: nu0 });
    }
    assert!(volume >= 1);
    let c = volume as f64 * nu0;
    let points = levels.iter().map(|ev| c * (ev - e0)).collect();
    Ok(RescaledConfiguration {
        e0,
        nu0,
        volume,
        points,
    })
}

/// The admissible energy window of half-width volume^-β around E0 and the
/// rescaled range volume^(1-β)·[-1,1] that ξ-intervals are expected to
/// stay inside.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibleWindow {
    pub energy_lo: f64,
    pub energy_hi: f64,
    pub rescaled_halfwidth: f64,
}

pub fn admissible_window(
    e0: f64,
    beta: f64,
    dim: usize,
    volume: usize,
) -> Result<AdmissibleWindow> {
    ScaleSpec { beta, delta: 1.0 }.validate(dim)?;
    let v = volume as f64;
    let halfwidth = v.powf(-beta);
    Ok(AdmissibleWindow {
        energy_lo: e0 - halfwidth,
        energy_hi: e0 + halfwidth,
        rescaled_halfwidth: v.powf(1.0 - beta),
    })
}

/// Exact counts of rescaled points in each interval (closed endpoints) by
/// binary search. Errors on strictly overlapping intervals; violations of
/// the separation/containment conditions are asymptotic-scale warnings,
/// not errors.
pub fn interval_counts(
    config: &RescaledConfiguration,
    intervals: &[(f64, f64)],
    scale: Option<&ScaleSpec>,
) -> Result<(CountSample, Vec<String>)> {
    validate_disjoint(intervals)?;
    let warnings = scale
        .map(|s| scale_warnings(intervals, config.volume, s))
        .unwrap_or_default();
    let counts = intervals
        .iter()
        .map(|(lo, hi)| {
            let a = config.points.partition_point(|x| x < lo);
            let b = config.points.partition_point(|x| x <= hi);
            (b - a) as u64
        })
        .collect();
    Ok((
        CountSample {
            counts,
            seed: 0,
        },
        warnings,
    ))
}

fn validate_disjoint(intervals: &[(f64, f64)]) -> Result<()> {
    for (lo, hi) in intervals {
        if lo > hi {
            return Err(Error::BadInterval { lo: *lo, hi: *hi });
        }
    }
    let mut sorted: Vec<(f64, f64)> = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in sorted.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(Error::IntervalsNotDisjoint {
                a0: pair[0].0,
                a1: pair[0].1,
                b0: pair[1].0,
                b1: pair[1].1,
            });
        }
    }
    Ok(())
}

fn scale_warnings(intervals: &[(f64, f64)], volume: usize, scale: &ScaleSpec) -> Vec<String> {
    let v = volume as f64;
    let mut warnings = Vec::new();
    let range = v.powf(1.0 - scale.beta);
    for (lo, hi) in intervals {
        if *lo < -range || *hi > range {
            warnings.push(format!(
                "interval [{lo}, {hi}] exits the admissible rescaled range ±{range:.3}"
            ));
        }
    }
    let min_sep = (-v.powf(scale.delta)).exp();
    let mut sorted: Vec<(f64, f64)> = intervals.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in sorted.windows(2) {
        let dist = (pair[1].0 - pair[0].1).max(0.0);
        if dist < min_sep {
            warnings.push(format!(
                "intervals separated by {dist:.3e}, below exp(-volume^delta) = {min_sep:.3e}"
            ));
        }
    }
    warnings
}

/// Product of Poisson probabilities Π e^-μ μ^k / k!, in log space.
pub fn poisson_reference(means: &[f64], counts: &[u64]) -> f64 {
    assert_eq!(means.len(), counts.len());
    assert!(means.iter().all(|m| *m >= 0.0));
    let log_p: f64 = means
        .iter()
        .zip(counts)
        .map(|(m, k)| {
            if *m == 0.0 {
                if *k == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                -m + *k as f64 * m.ln() - ln_factorial(*k)
            }
        })
        .sum();
    log_p.exp()
}

/// Empirical joint count pmf versus the product-Poisson reference, with a
/// simulation-calibrated pass threshold.
#[derive(Debug, Clone, Serialize)]
pub struct CountTestReport {
    pub sample_count: usize,
    pub means: Vec<f64>,
    pub cutoffs: Vec<u64>,
    pub tv_joint: f64,
    pub tv_marginals: Vec<f64>,
    pub calibration_threshold: f64,
    pub threshold: f64,
    pub pass: bool,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
}

/// Compare empirical joint counts to the product-Poisson law. The pass
/// threshold is max(stated_floor, 99th percentile of the TV of a genuine
/// Poisson simulation at the same sample count, never below 0.02).
pub fn count_distribution_test(
    samples: &[CountSample],
    means: &[f64],
    stated_floor: f64,
    calibration_seed: u64,
) -> CountTestReport {
    assert!(samples.len() >= 100, "need at least 100 samples");
    let cutoffs = JointPmf::cutoffs_for(means, 1e-4);
    let rows: Vec<Vec<u64>> = samples.iter().map(|s| s.counts.clone()).collect();
    let empirical = JointPmf::empirical(cutoffs.clone(), &rows);
    let reference = JointPmf::product_poisson(cutoffs.clone(), means);
    let tv_joint = empirical.tv_to(&reference);
    let tv_marginals: Vec<f64> = empirical
        .marginals()
        .iter()
        .zip(means.iter().zip(&cutoffs))
        .map(|(emp_m, (mean, cut))| tv_distance(emp_m, &poisson_pmf_with_tail(*mean, *cut)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(calibration_seed);
    let calibration_threshold =
        calibrate_tv_threshold(&mut rng, means, samples.len(), 200, 0.02);
    let threshold = stated_floor.max(calibration_threshold);
    CountTestReport {
        sample_count: samples.len(),
        means: means.to_vec(),
        cutoffs,
        tv_joint,
        tv_marginals,
        calibration_threshold,
        threshold,
        pass: tv_joint <= threshold,
        empirical: empirical.cells,
        reference: reference.cells,
    }
}

/// Parameters for the local Poisson-law experiment around one reference
/// energy.
pub struct LevelStatsParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub e0: f64,
    /// Intervals in rescaled units.
    pub intervals: Vec<(f64, f64)>,
    pub scale: ScaleSpec,
    pub realizations: usize,
    pub master_seed: u64,
    pub stated_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStatsReport {
    pub e0: f64,
    pub nu0: f64,
    pub volume: usize,
    pub intervals: Vec<(f64, f64)>,
    pub realizations: usize,
    pub master_seed: u64,
    pub test: CountTestReport,
    pub warnings: Vec<String>,
}

/// Per-realization interval counts near E0, via inertia counts on the
/// energy windows that the rescaled intervals map to (no eigenvectors).
pub fn levelstats_experiment(
    p: &LevelStatsParams,
    samples_out: Option<&mut Vec<CountSample>>,
) -> Result<LevelStatsReport> {
    p.scale.validate(p.model.dim as usize)?;
    validate_disjoint(&p.intervals)?;
    let lat = p.model.lattice()?;
    let volume = lat.volume();
    let nu0 = p.table.density_at_default(p.e0)?;
    if nu0 <= 0.0 {
        return Err(Error::DensityNonpositive {
            energy: p.e0,
            nu: nu0,
        });
    }
    let mut warnings = scale_warnings(&p.intervals, volume, &p.scale);
    if !p.model.spec.is_physical() {
        warnings.push("constant-potential test mode is non-physical".into());
    }

    let c = volume as f64 * nu0;
    let windows: Vec<(f64, f64)> = p
        .intervals
        .iter()
        .map(|(lo, hi)| (p.e0 + lo / c, p.e0 + hi / c))
        .collect();

    let samples: Vec<CountSample> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let counts = windows
                .iter()
                .map(|(lo, hi)| count_in_interval(&h, *lo, *hi).map(|c| c.count as u64))
                .collect::<Result<Vec<u64>>>()?;
            Ok(CountSample { counts, seed })
        })
        .collect::<Result<Vec<_>>>()?;

    let means: Vec<f64> = p.intervals.iter().map(|(lo, hi)| hi - lo).collect();
    let test = count_distribution_test(
        &samples,
        &means,
        p.stated_floor,
        derive_seed(p.master_seed, CALIBRATION_TAG),
    );
    let report = LevelStatsReport {
        e0: p.e0,
        nu0,
        volume,
        intervals: p.intervals.clone(),
        realizations: p.realizations,
        master_seed: p.master_seed,
        test,
        warnings,
    };
    if let Some(out) = samples_out {
        *out = samples;
    }
    Ok(report)
}

/// Parameters for the two-energy independence experiment.
pub struct TwoEnergyParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub e0: f64,
    pub e0_prime: f64,
    pub u_plus: (f64, f64),
    pub u_minus: (f64, f64),
    pub realizations: usize,
    pub master_seed: u64,
    pub stated_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoEnergyReport {
    pub e0: f64,
    pub e0_prime: f64,
    pub nu0: f64,
    pub nu0_prime: f64,
    pub volume: usize,
    pub u_plus: (f64, f64),
    pub u_minus: (f64, f64),
    pub realizations: usize,
    pub master_seed: u64,
    /// volume · |E0 - E0'|: must diverge for asymptotic independence.
    pub divergence_parameter: f64,
    pub tv_independence: f64,
    pub independence_threshold: f64,
    pub independence_pass: bool,
    pub tv_product_poisson: f64,
    pub poisson_calibration: f64,
    pub warnings: Vec<String>,
}

/// Joint counts at two reference energies; tests independence (TV between
/// the joint law and the product of its own marginals) and the full
/// product-Poisson limit.
pub fn two_energy_experiment(
    p: &TwoEnergyParams,
    samples_out: Option<&mut Vec<CountSample>>,
) -> Result<TwoEnergyReport> {
    let lat = p.model.lattice()?;
    let volume = lat.volume();
    let nu0 = p.table.density_at_default(p.e0)?;
    let nu0_prime = p.table.density_at_default(p.e0_prime)?;
    for (e, nu) in [(p.e0, nu0), (p.e0_prime, nu0_prime)] {
        if nu <= 0.0 {
            return Err(Error::DensityNonpositive { energy: e, nu });
        }
    }

    let mut warnings = Vec::new();
    let divergence_parameter = volume as f64 * (p.e0 - p.e0_prime).abs();
    if divergence_parameter < 100.0 {
        warnings.push(format!(
            "volume·|E0-E0'| = {divergence_parameter:.1} < 100: asymptotic independence only weakly in force"
        ));
    }
    let dim = p.model.dim as f64;
    if p.model.dim >= 2 && (p.e0 - p.e0_prime).abs() <= 2.0 * dim {
        warnings.push(format!(
            "|E0-E0'| = {} within the 2d band width in dimension {}: independence is only conjectured at this separation",
            (p.e0 - p.e0_prime).abs(),
            p.model.dim
        ));
    }

    let c_plus = volume as f64 * nu0;
    let c_minus = volume as f64 * nu0_prime;
    let w_plus = (p.e0 + p.u_plus.0 / c_plus, p.e0 + p.u_plus.1 / c_plus);
    let w_minus = (
        p.e0_prime + p.u_minus.0 / c_minus,
        p.e0_prime + p.u_minus.1 / c_minus,
    );

    let samples: Vec<CountSample> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let k_plus = count_in_interval(&h, w_plus.0, w_plus.1)?.count as u64;
            let k_minus = count_in_interval(&h, w_minus.0, w_minus.1)?.count as u64;
            Ok(CountSample {
                counts: vec![k_plus, k_minus],
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let means = [p.u_plus.1 - p.u_plus.0, p.u_minus.1 - p.u_minus.0];
    let cutoffs = JointPmf::cutoffs_for(&means, 1e-4);
    let rows: Vec<Vec<u64>> = samples.iter().map(|s| s.counts.clone()).collect();
    let empirical = JointPmf::empirical(cutoffs.clone(), &rows);
    let tv_independence = empirical.tv_to(&empirical.product_of_marginals());
    let reference = JointPmf::product_poisson(cutoffs, &means);
    let tv_product_poisson = empirical.tv_to(&reference);

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.master_seed, CALIBRATION_TAG));
    let independence_calibration = calibrate_independence_threshold(
        &mut rng,
        &means,
        p.realizations,
        200,
        0.02,
    );
    let independence_threshold = p.stated_floor.max(independence_calibration);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.master_seed, CALIBRATION_TAG + 1));
    let poisson_calibration =
        calibrate_tv_threshold(&mut rng, &means, p.realizations, 200, 0.02);

    let report = TwoEnergyReport {
        e0: p.e0,
        e0_prime: p.e0_prime,
        nu0,
        nu0_prime,
        volume,
        u_plus: p.u_plus,
        u_minus: p.u_minus,
        realizations: p.realizations,
        master_seed: p.master_seed,
        divergence_parameter,
        tv_independence,
        independence_threshold,
        independence_pass: tv_independence <= independence_threshold,
        tv_product_poisson,
        poisson_calibration,
        warnings,
    };
    if let Some(out) = samples_out {
        *out = samples;
    }
    Ok(report)
}

/// Exponential reference bound exp(-(N(I)|Λ|)^δ / δ) for the count
/// concentration.
pub fn ldp_reference_bound(mass_volume: f64, delta: f64) -> f64 {
    (-mass_volume.powf(delta) / delta).exp()
}

/// Parameters for the eigenvalue-count concentration experiment over a
/// list of box sizes.
pub struct ConcentrationParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub half_sides: Vec<i64>,
    pub interval: (f64, f64),
    pub epsilon: f64,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub half_side: i64,
    pub volume: usize,
    pub epsilon: f64,
    pub expected_count: f64,
    pub mean_count: f64,
    pub tail_probability: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// exp(-(N(I)|Λ|)^δ/δ) at δ = 0.5, for reference.
    pub ldp_bound_half: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub interval: (f64, f64),
    pub epsilon: f64,
    pub interval_mass: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub rows: Vec<ConcentrationRow>,
    pub nonincreasing: bool,
}

/// Empirical tail P(|N(I,ω,Λ) - N(I)|Λ|| ≥ ε N(I)|Λ|) per box size, with
/// Wilson confidence intervals; counts only, no eigenvectors.
pub fn concentration_experiment(p: &ConcentrationParams) -> Result<ConcentrationReport> {
    assert!(p.epsilon > 0.0 && p.epsilon < 1.0, "epsilon must be in (0,1)");
    let (ilo, ihi) = p.interval;
    let mass = interval_mass(p.table, ilo, ihi)?;
    if mass <= 0.0 {
        return Err(Error::EmptyMass { lo: ilo, hi: ihi });
    }

    let mut rows = Vec::with_capacity(p.half_sides.len());
    for (li, &half_side) in p.half_sides.iter().enumerate() {
        let model = ModelParams {
            half_side,
            ..p.model.clone()
        };
        let lat = model.lattice()?;
        let volume = lat.volume();
        let expected = mass * volume as f64;
        let slack = p.epsilon * expected;

        let counts: Vec<u64> = (0..p.realizations)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(p.master_seed, (li * p.realizations + r) as u64);
                let h = model.realize(&lat, seed)?;
                Ok(count_in_interval(&h, ilo, ihi)?.count as u64)
            })
            .collect::<Result<Vec<u64>>>()?;

        let hits = counts
            .iter()
            .filter(|c| (**c as f64 - expected).abs() >= slack)
            .count() as u64;
        let (wilson_low, wilson_high) = wilson_interval(hits, p.realizations as u64);
        rows.push(ConcentrationRow {
            half_side,
            volume,
            epsilon: p.epsilon,
            expected_count: expected,
            mean_count: counts.iter().sum::<u64>() as f64 / p.realizations as f64,
            tail_probability: hits as f64 / p.realizations as f64,
            wilson_low,
            wilson_high,
            ldp_bound_half: ldp_reference_bound(expected, 0.5),
        });
    }

    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].tail_probability <= w[0].tail_probability);
    Ok(ConcentrationReport {
        interval: p.interval,
        epsilon: p.epsilon,
        interval_mass: mass,
        realizations: p.realizations,
        master_seed: p.master_seed,
        rows,
        nonincreasing,
    })
}

/// Draw joint samples from independent Poisson streams (oracle input for
/// self-tests of the count machinery).
pub fn poisson_oracle_samples(means: &[f64], r: usize, seed: u64) -> Vec<CountSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..r)
        .map(|i| CountSample {
            counts: means.iter().map(|m| sample_poisson(&mut rng, *m)).collect(),
            seed: i as u64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_is_simple_arithmetic() {
        let cfg = rescale_levels(&[0.1, 0.2], 0.1, 0.5, 100).unwrap();
        assert_eq!(cfg.points, vec![0.0, 5.0]);
    }

    #[test]
    fn rescale_is_shift_equivariant_and_invertible() {
        let levels = [0.05, 0.07, 0.11];
        let cfg = rescale_levels(&levels, 0.06, 0.3, 50).unwrap();
        let shifted: Vec<f64> = levels.iter().map(|e| e + 0.01).collect();
        let cfg2 = rescale_levels(&shifted, 0.06, 0.3, 50).unwrap();
        for (a, b) in cfg.points.iter().zip(&cfg2.points) {
            assert!((b - a - 50.0 * 0.3 * 0.01).abs() < 1e-12);
        }
        // invertibility
        for (xi, e) in cfg.points.iter().zip(&levels) {
            let back = 0.06 + xi / (50.0 * 0.3);
            assert!((back - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn remark_normalization_is_a_scalar_ratio() {
        let levels = [0.01, 0.03, 0.04];
        let a = rescale_levels(&levels, 0.0, 0.2, 100).unwrap();
        let b = rescale_levels(&levels, 0.0, 0.35, 100).unwrap();
        let ratio = 0.35 / 0.2;
        for (x, y) in a.points.iter().zip(&b.points) {
            assert!((y - x * ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_rejects_nonpositive_density() {
        assert!(matches!(
            rescale_levels(&[0.0], 0.0, 0.0, 10),
            Err(Error::DensityNonpositive { .. })
        ));
    }

    #[test]
    fn admissible_window_arithmetic() {
        let w = admissible_window(0.0, 0.5, 1, 10_000).unwrap();
        assert!((w.energy_hi - w.energy_lo - 2e-2).abs() < 1e-15);
        assert!((w.rescaled_halfwidth - 100.0).abs() < 1e-9);
    }

    #[test]
    fn beta_at_boundary_is_rejected() {
        // d/(d+2) = 1/3 in one dimension; the inequality is strict
        assert!(matches!(
            admissible_window(0.0, 1.0 / 3.0, 1, 1000),
            Err(Error::InadmissibleExponent { .. })
        ));
        assert!(admissible_window(0.0, 1.0 / 3.0 + 1e-6, 1, 1000).is_ok());
    }

    #[test]
    fn rescaled_range_shrinks_as_beta_grows() {
        let near = admissible_window(0.0, 0.999, 1, 1000).unwrap();
        assert!(near.rescaled_halfwidth < 1.01);
    }

    #[test]
    fn interval_count_examples() {
        let cfg = RescaledConfiguration {
            e0: 0.0,
            nu0: 1.0,
            volume: 1,
            points: vec![-0.5, 0.2, 3.0],
        };
        let (s, _) = interval_counts(&cfg, &[(-1.0, 0.0), (0.1, 1.0)], None).unwrap();
        assert_eq!(s.counts, vec![1, 1]);

        let empty = RescaledConfiguration {
            points: vec![],
            ..cfg.clone()
        };
        let (s, _) = interval_counts(&empty, &[(-1.0, 0.0), (0.1, 1.0)], None).unwrap();
        assert_eq!(s.counts, vec![0, 0]);
    }

    #[test]
    fn partition_counts_are_additive() {
        let cfg = RescaledConfiguration {
            e0: 0.0,
            nu0: 1.0,
            volume: 1,
            points: vec![0.1, 0.4, 1.3, 1.7, 1.9],
        };
        let (parts, _) = interval_counts(&cfg, &[(0.0, 1.0), (1.0 + 1e-12, 2.0)], None).unwrap();
        let (whole, _) = interval_counts(&cfg, &[(0.0, 2.0)], None).unwrap();
        assert_eq!(parts.counts[0] + parts.counts[1], whole.counts[0]);
    }

    #[test]
    fn overlapping_intervals_error() {
        let cfg = RescaledConfiguration {
            e0: 0.0,
            nu0: 1.0,
            volume: 1,
            points: vec![],
        };
        assert!(matches!(
            interval_counts(&cfg, &[(0.0, 1.0), (0.5, 2.0)], None),
            Err(Error::IntervalsNotDisjoint { .. })
        ));
    }

    #[test]
    fn scaling_nu_scales_counts_consistently() {
        // multiplying nu0 by c multiplies every point by c and maps counts
        // over I to counts over cI exactly
        let levels = [0.01, 0.02, 0.05, 0.09];
        let a = rescale_levels(&levels, 0.0, 0.25, 100).unwrap();
        let b = rescale_levels(&levels, 0.0, 0.75, 100).unwrap();
        let (ca, _) = interval_counts(&a, &[(0.0, 1.0)], None).unwrap();
        let (cb, _) = interval_counts(&b, &[(0.0, 3.0)], None).unwrap();
        assert_eq!(ca.counts, cb.counts);
    }

    #[test]
    fn poisson_reference_examples() {
        let p = poisson_reference(&[2.0], &[0]);
        assert!((p - (-2.0f64).exp()).abs() < 1e-12);
        let p2 = poisson_reference(&[1.0, 1.0], &[1, 1]);
        assert!((p2 - (-2.0f64).exp()).abs() < 1e-12);
        // normalization over k
        let total: f64 = (0..200).map(|k| poisson_reference(&[3.7], &[k])).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn count_test_passes_on_genuine_poisson_input() {
        let means = [2.0];
        let samples = poisson_oracle_samples(&means, 2000, 314);
        let report = count_distribution_test(&samples, &means, 0.05, 2718);
        assert!(
            report.pass,
            "genuine Poisson input must pass: tv={} threshold={}",
            report.tv_joint, report.threshold
        );
    }

    #[test]
    fn count_test_rejects_degenerate_input() {
        // all counts zero against mean 2: TV = 1 - e^-2
        let samples: Vec<CountSample> = (0..500)
            .map(|i| CountSample {
                counts: vec![0],
                seed: i,
            })
            .collect();
        let report = count_distribution_test(&samples, &[2.0], 0.05, 99);
        let expected = 1.0 - (-2.0f64).exp();
        assert!((report.tv_joint - expected).abs() < 1e-9);
        assert!(!report.pass);
    }

    #[test]
    fn ldp_bound_arithmetic() {
        let b = ldp_reference_bound(100.0, 0.5);
        assert!((b - (-20.0f64).exp()).abs() < 1e-24);
    }
}
