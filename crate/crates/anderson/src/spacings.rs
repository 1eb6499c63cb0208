//! Level-spacing statistics.
//!
//! Consecutive eigenvalue gaps inside an energy window, normalized so the
//! mean spacing is one, are pooled across disorder realizations into an
//! empirical survival function and compared in sup norm against the
//! expected limit: e^-x for windows shrinking around a reference energy,
//! and the density-of-states mixture g(x) = ∫_J e^{-ν_J(λ)x} ν_J(λ) dλ on
//! macroscopic intervals. Each level E_j inside the window contributes the
//! gap to its successor, which may lie beyond the window edge.

use rayon::prelude::*;
use serde::Serialize;

use crate::dos::{interval_mass, DosTable};
use crate::eig::levels_in_window_plus_next;
use crate::error::{Error, Result};
use crate::harness::derive_seed;
use crate::model::ModelParams;

/// Empirical survival function S(x) = #{values ≥ x}/n of a nonnegative
/// sample.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        EmpiricalDistribution { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// S(x) = #{v >= x} / n.
    pub fn survival(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|v| *v < x);
        (self.values.len() - below) as f64 / self.values.len() as f64
    }

    /// S(x+) = #{v > x} / n.
    pub fn survival_above(&self, x: f64) -> f64 {
        let not_above = self.values.partition_point(|v| *v <= x);
        (self.values.len() - not_above) as f64 / self.values.len() as f64
    }
}

/// Exact sup_{x ≥ 0} |S(x) - reference(x)| for a nonincreasing reference:
/// the supremum is attained at a step of S evaluated from both sides, or
/// at x = 0.
pub fn dls_statistic(emp: &EmpiricalDistribution, reference: impl Fn(f64) -> f64) -> f64 {
    let vals = &emp.values;
    let n = vals.len();
    assert!(n > 0, "empty sample");
    let nf = n as f64;
    let mut sup = (1.0 - reference(0.0f64.min(vals[0]))).abs();
    let mut i = 0;
    while i < n {
        let v = vals[i];
        let mut j = i;
        while j < n && vals[j] == v {
            j += 1;
        }
        let s_at = (n - i) as f64 / nf;
        let s_after = (n - j) as f64 / nf;
        let r = reference(v);
        sup = sup.max((s_at - r).abs()).max((s_after - r).abs());
        i = j;
    }
    sup
}

/// Exact sup |S_a - S_b| between two empirical survival functions,
/// evaluated from both sides of every jump of either sample.
pub fn sup_distance_between(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let mut sup = 0.0f64;
    for v in a.values.iter().chain(&b.values) {
        sup = sup.max((a.survival(*v) - b.survival(*v)).abs());
        sup = sup.max((a.survival_above(*v) - b.survival_above(*v)).abs());
    }
    sup
}

/// Normalized consecutive spacings δ_j = c (E_{j+1} - E_j) of a sorted
/// level list; length is one less than the input.
pub fn spacing_sequence(levels: &[f64], c: f64) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels { got: levels.len() });
    }
    assert!(c > 0.0, "normalization constant must be positive");
    debug_assert!(levels.windows(2).all(|w| w[0] <= w[1]), "levels not sorted");
    Ok(levels.windows(2).map(|w| c * (w[1] - w[0])).collect())
}

/// The macroscopic spacing reference g(x) = ∫_J e^{-ν_J(λ) x} ν_J(λ) dλ
/// with ν_J = ν / N(J), evaluated by trapezoid quadrature on the table
/// grid restricted to J. The normalizing mass uses the same quadrature, so
/// g(0) = 1 identically.
#[derive(Debug, Clone)]
pub struct MacroReference {
    nodes: Vec<f64>,
    nu_j: Vec<f64>,
}

impl MacroReference {
    pub fn new(table: &DosTable, j: (f64, f64)) -> Result<Self> {
        let (lo, hi) = j;
        if lo >= hi {
            return Err(Error::BadInterval { lo, hi });
        }
        let mut nodes = vec![lo];
        for &g in table.energies() {
            if g > lo && g < hi {
                nodes.push(g);
            }
        }
        nodes.push(hi);
        let dens: Vec<f64> = nodes
            .iter()
            .map(|x| table.density_interp(*x))
            .collect::<Result<Vec<f64>>>()?;
        let mass = trapezoid(&nodes, &dens);
        if mass <= 0.0 {
            return Err(Error::EmptyMass { lo, hi });
        }
        let nu_j = dens.iter().map(|d| d / mass).collect();
        Ok(MacroReference { nodes, nu_j })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let integrand: Vec<f64> = self
            .nu_j
            .iter()
            .map(|nu| (-nu * x).exp() * nu)
            .collect();
        trapezoid(&self.nodes, &integrand)
    }

    pub fn nu_j_range(&self) -> (f64, f64) {
        let lo = self.nu_j.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.nu_j.iter().copied().fold(0.0f64, f64::max);
        (lo, hi)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// g_{ν,J}(x) from the calibrated table.
pub fn g_limit(table: &DosTable, j: (f64, f64), x: f64) -> Result<f64> {
    Ok(MacroReference::new(table, j)?.eval(x))
}

/// Which window and reference the spacing experiment runs against.
#[derive(Debug, Clone, Copy)]
pub enum DlsMode {
    /// Shrinking window centered at E0; by default |I| = volume^(-width_exponent).
    Local {
        e0: f64,
        window_width: Option<f64>,
        width_exponent: f64,
    },
    /// Fixed macroscopic interval J.
    Macroscopic { interval: (f64, f64) },
}

/// Normalization constant for the spacings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpacingNormalization {
    /// |Λ|·ν(E0) locally, |Λ|·N(J) macroscopically.
    Standard,
    /// |Λ|·N(I)/|I| — the interval-averaged alternative, usable where the
    /// density vanishes.
    IntervalAverage,
}

pub struct DlsParams<'a> {
    pub model: &'a ModelParams,
    pub table: &'a DosTable,
    pub mode: DlsMode,
    pub normalization: SpacingNormalization,
    pub realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DlsReport {
    pub mode: String,
    pub normalization: String,
    pub e0: Option<f64>,
    pub window: (f64, f64),
    pub constant: f64,
    pub volume: usize,
    pub realizations: usize,
    pub master_seed: u64,
    pub pooled_spacings: usize,
    pub skipped_realizations: usize,
    pub mean_levels_per_realization: f64,
    pub reference: String,
    pub sup_distance: f64,
    pub warnings: Vec<String>,
}

pub struct DlsOutcome {
    pub report: DlsReport,
    pub spacings: EmpiricalDistribution,
    /// (x, empirical survival, reference survival) samples of the curves.
    pub curve: Vec<(f64, f64, f64)>,
}

/// Pool normalized spacings across realizations and measure the sup
/// distance to the mode's reference law. Each realization contributes the
/// spacings of its own window levels; the last window level pairs with the
/// first level beyond the window. Realizations whose window yields fewer
/// than one spacing are skipped and counted.
pub fn dls_experiment(p: &DlsParams) -> Result<DlsOutcome> {
    let lat = p.model.lattice()?;
    let volume = lat.volume();
    let vf = volume as f64;

    let (window, e0, mode_name) = match p.mode {
        DlsMode::Local {
            e0,
            window_width,
            width_exponent,
        } => {
            let width = window_width.unwrap_or_else(|| vf.powf(-width_exponent));
            ((e0 - width / 2.0, e0 + width / 2.0), Some(e0), "local")
        }
        DlsMode::Macroscopic { interval } => (interval, None, "macroscopic"),
    };

    let mut warnings = Vec::new();
    let (constant, norm_name) = match (p.normalization, p.mode) {
        (SpacingNormalization::Standard, DlsMode::Local { e0, .. }) => {
            let nu0 = p.table.density_at_default(e0)?;
            if nu0 <= 0.0 {
                return Err(Error::DensityNonpositive { energy: e0, nu: nu0 });
            }
            (vf * nu0, "density")
        }
        (SpacingNormalization::Standard, DlsMode::Macroscopic { interval }) => {
            let mass = interval_mass(p.table, interval.0, interval.1)?;
            if mass <= 0.0 {
                return Err(Error::EmptyMass {
                    lo: interval.0,
                    hi: interval.1,
                });
            }
            (vf * mass, "mass")
        }
        (SpacingNormalization::IntervalAverage, _) => {
            let mass = interval_mass(p.table, window.0, window.1)?;
            if mass <= 0.0 {
                return Err(Error::EmptyMass {
                    lo: window.0,
                    hi: window.1,
                });
            }
            (vf * mass / (window.1 - window.0), "interval-average")
        }
    };

    if let Some(e0) = e0 {
        let diag = crate::dos::bandwidth_stability(p.table, e0,
            p.table.grid_step() * 5.0)?;
        if !diag.stable {
            warnings.push(format!(
                "density at E0 = {e0} moves {:.1}% under bandwidth doubling; reference energy may sit on a rough patch of the table",
                100.0 * diag.relative_change
            ));
        }
    }

    struct PerRealization {
        spacings: Vec<f64>,
        levels: usize,
        skipped: bool,
    }

    let results: Vec<PerRealization> = (0..p.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(p.master_seed, r as u64);
            let h = p.model.realize(&lat, seed)?;
            let wl = levels_in_window_plus_next(&h, window.0, window.1)?;
            let mut levels = wl.levels;
            let in_window = levels.len();
            if let Some(next) = wl.next_above {
                levels.push(next);
            }
            if levels.len() < 2 {
                return Ok(PerRealization {
                    spacings: Vec::new(),
                    levels: in_window,
                    skipped: true,
                });
            }
            let spacings = spacing_sequence(&levels, constant)?;
            Ok(PerRealization {
                spacings,
                levels: in_window,
                skipped: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled = Vec::new();
    let mut skipped = 0usize;
    let mut level_total = 0usize;
    for r in results {
        pooled.extend(r.spacings);
        level_total += r.levels;
        if r.skipped {
            skipped += 1;
        }
    }
    if pooled.is_empty() {
        return Err(Error::InsufficientLevels { got: 0 });
    }

    let emp = EmpiricalDistribution::new(pooled);
    let (reference_name, sup_distance, reference): (String, f64, Box<dyn Fn(f64) -> f64>) =
        match p.mode {
            DlsMode::Local { .. } => {
                let f = |x: f64| (-x).exp();
                ("exp(-x)".to_string(), dls_statistic(&emp, f), Box::new(f))
            }
            DlsMode::Macroscopic { interval } => {
                let g = MacroReference::new(p.table, interval)?;
                let sup = dls_statistic(&emp, |x| g.eval(x));
                (
                    "g_nu_J".to_string(),
                    sup,
                    Box::new(move |x| g.eval(x)),
                )
            }
        };

    let curve = curve_samples(&emp, reference.as_ref());
    let report = DlsReport {
        mode: mode_name.to_string(),
        normalization: norm_name.to_string(),
        e0,
        window,
        constant,
        volume,
        realizations: p.realizations,
        master_seed: p.master_seed,
        pooled_spacings: emp.len(),
        skipped_realizations: skipped,
        mean_levels_per_realization: level_total as f64 / p.realizations as f64,
        reference: reference_name,
        sup_distance,
        warnings,
    };
    Ok(DlsOutcome {
        report,
        spacings: emp,
        curve,
    })
}

fn curve_samples(emp: &EmpiricalDistribution, reference: &dyn Fn(f64) -> f64) -> Vec<(f64, f64, f64)> {
    let n = emp.len();
    let step = (n / 512).max(1);
    let mut curve = Vec::new();
    for i in (0..n).step_by(step) {
        let x = emp.values()[i];
        curve.push((x, emp.survival(x), reference(x)));
    }
    curve
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dos::{DosMeta, EnergyGrid};
    use crate::model::{BoundaryCondition, DisorderSpec};
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    fn synthetic_table(density_fn: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> DosTable {
        let grid = EnergyGrid {
            min: lo,
            max: hi,
            points,
        };
        let energies = grid.values();
        let density: Vec<f64> = energies.iter().map(|e| density_fn(*e)).collect();
        // cumulative trapezoid for ids
        let mut ids = vec![0.0];
        for i in 1..energies.len() {
            let inc =
                0.5 * (density[i] + density[i - 1]) * (energies[i] - energies[i - 1]);
            ids.push(ids[i - 1] + inc);
        }
        DosTable::from_columns(
            energies,
            ids,
            density,
            DosMeta {
                spec: DisorderSpec::standard(1.0),
                dim: 1,
                half_side: 1,
                boundary: BoundaryCondition::Periodic,
                grid,
                realizations: 1,
                master_seed: 0,
                estimator: "synthetic".into(),
                density_halfwidth_steps: 5,
                clip_count: 0,
                replaced_seeds: vec![],
                density_mass: 1.0,
            },
        )
    }

    use crate::dos::DosTable;

    #[test]
    fn spacing_sequence_basics() {
        let s = spacing_sequence(&[0.0, 1.0, 3.0], 2.0).unwrap();
        assert_eq!(s, vec![2.0, 4.0]);
        let doubled = spacing_sequence(&[0.0, 1.0, 3.0], 4.0).unwrap();
        for (a, b) in s.iter().zip(&doubled) {
            assert_eq!(*b, 2.0 * a);
        }
        // degenerate eigenvalue yields a zero spacing, kept by convention
        let z = spacing_sequence(&[1.0, 1.0, 2.0], 1.0).unwrap();
        assert_eq!(z[0], 0.0);
        assert!(matches!(
            spacing_sequence(&[0.5], 1.0),
            Err(Error::InsufficientLevels { got: 1 })
        ));
    }

    #[test]
    fn survival_axioms() {
        let emp = EmpiricalDistribution::new(vec![0.5, 0.1, 0.9, 0.1]);
        assert_eq!(emp.survival(0.0), 1.0);
        assert_eq!(emp.survival(0.1), 1.0);
        assert_eq!(emp.survival_above(0.1), 0.5);
        assert_eq!(emp.survival(1.0), 0.0);
        let mut prev = 1.0;
        let mut x = 0.0;
        while x < 1.2 {
            let s = emp.survival(x);
            assert!(s <= prev + 1e-15);
            prev = s;
            x += 0.01;
        }
    }

    #[test]
    fn one_point_sample_against_exponential() {
        // single sample at ln 2: survival steps from 1 to 0 where the
        // reference is exactly 1/2
        let emp = EmpiricalDistribution::new(vec![2.0f64.ln()]);
        let d = dls_statistic(&emp, |x| (-x).exp());
        assert!((d - 0.5).abs() < 1e-15, "distance {d}");
    }

    #[test]
    fn all_zero_sample_against_exponential() {
        let emp = EmpiricalDistribution::new(vec![0.0; 10]);
        let d = dls_statistic(&emp, |x| (-x).exp());
        assert!((d - 1.0).abs() < 1e-15, "distance {d}");
    }

    #[test]
    fn self_comparison_decays_with_sample_size() {
        // sampling the reference exactly at inverse-cdf quantiles keeps the
        // sup at the classical 1/n envelope
        for n in [100usize, 10_000] {
            let values: Vec<f64> = (0..n)
                .map(|i| -((i as f64 + 0.5) / n as f64).ln())
                .collect();
            let emp = EmpiricalDistribution::new(values);
            let d = dls_statistic(&emp, |x| (-x).exp());
            assert!(d <= 1.0 / n as f64 + 1e-12, "n={n}: {d}");
        }
    }

    #[test]
    fn dense_grid_oracle_agrees_with_exact_sup() {
        // brute-force the sup on a dense x grid and compare
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let values: Vec<f64> = (0..500)
            .map(|_| -crate::stats::u01(&mut rng).max(1e-12).ln())
            .collect();
        let emp = EmpiricalDistribution::new(values);
        let exact = dls_statistic(&emp, |x| (-x).exp());
        let mut brute = 0.0f64;
        let mut x = 0.0;
        while x < 20.0 {
            brute = brute.max((emp.survival(x) - (-x).exp()).abs());
            x += 1e-4;
        }
        assert!(exact >= brute - 1e-9, "exact {exact} < brute {brute}");
        assert!(exact - brute < 1e-3, "exact {exact} far above brute {brute}");
    }

    #[test]
    fn g_limit_constant_density_reduces_to_exponential() {
        let table = synthetic_table(|_| 0.25, -2.0, 2.0, 2001);
        // J of length 1: nu_J = 1 and g(x) = e^-x
        for x in [0.0, 0.3, 1.0, 2.5] {
            let g = g_limit(&table, (-0.5, 0.5), x).unwrap();
            assert!((g - (-x).exp()).abs() < 1e-9, "x={x}: {g}");
        }
        // J of length 1/2: nu_J = 2 and g(x) = e^-2x
        let g = g_limit(&table, (0.0, 0.5), 1.0).unwrap();
        assert!((g - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn g_limit_is_one_at_zero_for_any_table() {
        let table = synthetic_table(|e| 0.1 + 0.05 * (3.0 * e).sin().abs(), -2.0, 2.0, 801);
        let g0 = g_limit(&table, (-1.3, 0.7), 0.0).unwrap();
        assert!((g0 - 1.0).abs() < 1e-12, "g(0) = {g0}");
    }

    #[test]
    fn g_limit_two_piece_density_matches_closed_form() {
        // nu = a on [-1, 0), nu = b on [0, 1]
        let (a, b) = (0.12, 0.48);
        let table = synthetic_table(move |e| if e < 0.0 { a } else { b }, -1.0, 1.0, 4001);
        let mass = a + b;
        let closed = |x: f64| {
            (a / mass) * (-(a / mass) * x).exp() + (b / mass) * (-(b / mass) * x).exp()
        };
        for x in [0.0, 0.5, 1.0, 3.0] {
            let g = g_limit(&table, (-1.0, 1.0), x).unwrap();
            assert!((g - closed(x)).abs() < 5e-3, "x={x}: {g} vs {}", closed(x));
        }
    }

    #[test]
    fn g_limit_respects_exponential_envelopes() {
        let table = synthetic_table(|e| 0.2 + 0.1 * e, -1.0, 1.0, 2001);
        let j = (-0.8, 0.9);
        let reference = MacroReference::new(&table, j).unwrap();
        let (lo, hi) = reference.nu_j_range();
        for x in [0.1, 0.7, 2.0, 5.0] {
            let g = reference.eval(x);
            assert!(g <= (-x * lo).exp() + 1e-9);
            assert!(g >= (-x * hi).exp() - 1e-9);
        }
        // nonincreasing
        assert!(reference.eval(0.5) >= reference.eval(0.6));
    }

    #[test]
    fn uniform_points_oracle_matches_exponential_limit() {
        // i.i.d. uniform "eigenvalues" on [0,1]: spacings in a window,
        // unfolded by the point density, follow e^-x
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let per_real = 400usize;
        let mut pooled = Vec::new();
        for _ in 0..60 {
            let mut pts: Vec<f64> = (0..per_real).map(|_| crate::stats::u01(&mut rng)).collect();
            pts.sort_by(f64::total_cmp);
            let lo = 0.2;
            let hi = 0.8;
            let first = pts.partition_point(|v| *v < lo);
            let last = pts.partition_point(|v| *v < hi);
            if last >= pts.len() || last - first < 1 {
                continue;
            }
            let mut levels: Vec<f64> = pts[first..last].to_vec();
            levels.push(pts[last]);
            pooled.extend(spacing_sequence(&levels, per_real as f64).unwrap());
        }
        let emp = EmpiricalDistribution::new(pooled);
        let d = dls_statistic(&emp, |x| (-x).exp());
        assert!(d < 0.02, "uniform oracle sup distance {d}");
    }

    #[test]
    fn sup_between_two_empiricals_is_exact() {
        let a = EmpiricalDistribution::new(vec![1.0, 2.0, 3.0, 4.0]);
        let b = EmpiricalDistribution::new(vec![2.0, 1.0, 4.0, 3.0]);
        assert_eq!(sup_distance_between(&a, &b), 0.0);
        let c = EmpiricalDistribution::new(vec![1.0, 1.0, 4.0, 4.0]);
        let d = EmpiricalDistribution::new(vec![1.0, 1.0, 1.0, 4.0]);
        assert!((sup_distance_between(&c, &d) - 0.25).abs() < 1e-15);
    }
}
