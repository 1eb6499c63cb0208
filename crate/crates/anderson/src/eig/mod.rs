//! Symmetric eigensolver and inertia-based eigenvalue counting.
//!
//! Two independent routes to the spectrum run through this module and
//! cross-check each other everywhere: full diagonalization (Householder
//! reduction + implicitly shifted QL) and Sylvester inertia counting (LDLᵀ
//! pivot signs, with O(N) Sturm recurrences on the d=1 fast paths).
//! Counting costs a handful of factorizations instead of a full solve and
//! carries every Monte Carlo experiment that only needs eigenvalue counts.

pub mod dense;
pub mod tridiag;
mod window;

pub use window::{
    eigenpairs_in_window, levels_in_window_plus_next, WindowLevels, WindowedSpectrum,
};

use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, Storage};

/// Relative pivot floor below which a factorization counts as hitting an
/// eigenvalue.
pub const PIVOT_FLOOR_REL: f64 = 1e-13;
/// Relative upward shift applied to the probe energy after a pivot breakdown.
pub const ENDPOINT_SHIFT_REL: f64 = 1e-10;
/// Residual contract for returned eigenpairs: ‖Hv - λv‖_∞ ≤ 1e-10·‖H‖_∞.
pub const RESIDUAL_REL: f64 = 1e-10;

/// Sorted eigenvalues (multiplicity repeated) with optional orthonormal
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` is the normalized eigenvector of `eigenvalues[j]`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    /// Max measured ‖Hv - λv‖_∞ over returned (or sampled) pairs; 0 when no
    /// vectors were requested.
    pub residual_bound: f64,
    /// Index of `eigenvalues[0]` in the global ascending order (0 for full
    /// solves).
    pub global_offset: usize,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Full diagonalization. Without vectors the rotation accumulation is
/// skipped entirely; the eigenvalue arithmetic is identical either way.
pub fn eigen_full(h: &HamiltonianMatrix, want_vectors: bool) -> Result<SpectralData> {
    let n = h.dimension();
    let mut q = want_vectors.then(|| identity(n));

    let mut d;
    let mut e;
    match h.storage() {
        Storage::Tridiagonal { diag, off } => {
            d = diag.clone();
            e = vec![0.0; n];
            e[..off.len()].copy_from_slice(off);
        }
        _ => {
            let mut a = h.to_dense();
            let (dd, ee) = dense::tridiagonalize(&mut a, n, q.as_deref_mut());
            d = dd;
            e = ee;
        }
    }
    dense::tql2(&mut d, &mut e, q.as_deref_mut(), n)?;

    let eigenvectors = q.map(|qm| matrix_columns(&qm, n));
    let residual_bound = sampled_residual(h, &d, eigenvectors.as_deref());
    Ok(SpectralData {
        eigenvalues: d,
        eigenvectors,
        residual_bound,
        global_offset: 0,
    })
}

fn identity(n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    q
}

fn matrix_columns(q: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|j| (0..n).map(|i| q[i * n + j]).collect())
        .collect()
}

/// ‖Hv - λv‖_∞ of one pair.
pub fn residual_inf(h: &HamiltonianMatrix, value: f64, vector: &[f64]) -> f64 {
    let mut hv = vec![0.0; vector.len()];
    h.apply(vector, &mut hv);
    hv.iter()
        .zip(vector)
        .map(|(y, x)| (y - value * x).abs())
        .fold(0.0, f64::max)
}

fn sampled_residual(h: &HamiltonianMatrix, values: &[f64], vectors: Option<&[Vec<f64>]>) -> f64 {
    let Some(vectors) = vectors else {
        return 0.0;
    };
    if vectors.is_empty() {
        return 0.0;
    }
    let step = (vectors.len() / 16).max(1);
    (0..vectors.len())
        .step_by(step)
        .map(|j| residual_inf(h, values[j], &vectors[j]))
        .fold(0.0, f64::max)
}

/// Result of an inertia count; `shift_applied` is nonzero when the probe
/// energy had to be nudged upward past a pivot breakdown
/// ("shift-perturbed count").
#[derive(Debug, Clone, Copy)]
pub struct CountBelow {
    pub count: usize,
    pub shift_applied: f64,
}

pub(crate) fn pivot_scale(h: &HamiltonianMatrix) -> f64 {
    h.inf_norm().max(1e-30)
}

/// Exact number of eigenvalues strictly below `energy`, by the sign count
/// of the shifted LDLᵀ pivots. Retries at upward-shifted energies when a
/// pivot falls under the floor (an exact or near-exact eigenvalue hit).
pub fn count_below(h: &HamiltonianMatrix, energy: f64) -> Result<CountBelow> {
    let scale = pivot_scale(h);
    let floor = PIVOT_FLOOR_REL * scale;
    let step = ENDPOINT_SHIFT_REL * scale;
    let retries = 8;
    for retry in 0..=retries {
        let shift_applied = retry as f64 * step;
        let e_used = energy + shift_applied;
        let outcome = match h.storage() {
            Storage::Tridiagonal { diag, off } => tridiag::sturm_count(diag, off, e_used, floor),
            Storage::CyclicTridiagonal { diag, off, corner } => {
                tridiag::cyclic_count(diag, off, *corner, e_used, floor)
            }
            Storage::Dense(a) => {
                let mut work = a.clone();
                dense::ldlt_count_dense(&mut work, h.dimension(), e_used, floor)
            }
        };
        if let Ok(count) = outcome {
            return Ok(CountBelow {
                count,
                shift_applied,
            });
        }
    }
    Err(Error::CountBreakdown {
        energy,
        floor,
        retries,
    })
}

/// Count of eigenvalues in [lo, hi); exact endpoint hits are resolved
/// upward by the perturbation rule, so a hit at `lo` is excluded and a hit
/// at `hi` included.
#[derive(Debug, Clone, Copy)]
pub struct IntervalCount {
    pub count: usize,
    pub perturbed: bool,
}

pub fn count_in_interval(h: &HamiltonianMatrix, lo: f64, hi: f64) -> Result<IntervalCount> {
    if !(lo <= hi) {
        return Err(Error::BadInterval { lo, hi });
    }
    let below_hi = count_below(h, hi)?;
    let below_lo = count_below(h, lo)?;
    Ok(IntervalCount {
        count: below_hi.count.saturating_sub(below_lo.count),
        perturbed: below_hi.shift_applied > 0.0 || below_lo.shift_applied > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        assemble_hamiltonian, sample_disorder, BoundaryCondition, DisorderSpec, LatticeBox,
    };

    /// Closed-form eigenvalues of a symmetric 3x3 matrix via the
    /// trigonometric solution of the characteristic cubic. Independent of
    /// every solver path in the crate.
    fn cubic_eigenvalues_3x3(m: &[f64; 9]) -> [f64; 3] {
        let (a, b, c) = (m[0], m[4], m[8]);
        let (d, e, f) = (m[1], m[2], m[5]);
        let p1 = d * d + e * e + f * f;
        if p1 == 0.0 {
            let mut v = [a, b, c];
            v.sort_by(f64::total_cmp);
            return v;
        }
        let q = (a + b + c) / 3.0;
        let p2 = (a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let bb = [
            (a - q) / p,
            d / p,
            e / p,
            d / p,
            (b - q) / p,
            f / p,
            e / p,
            f / p,
            (c - q) / p,
        ];
        let det_b = bb[0] * (bb[4] * bb[8] - bb[5] * bb[7])
            - bb[1] * (bb[3] * bb[8] - bb[5] * bb[6])
            + bb[2] * (bb[3] * bb[7] - bb[4] * bb[6]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut v = [e1, e2, e3];
        v.sort_by(f64::total_cmp);
        v
    }

    fn triangle(diagonal: [f64; 3]) -> HamiltonianMatrix {
        HamiltonianMatrix::from_tridiagonal(diagonal.to_vec(), vec![1.0, 1.0], Some(1.0))
    }

    fn random_hamiltonian(
        half_side: i64,
        coupling: f64,
        seed: u64,
        bc: BoundaryCondition,
    ) -> HamiltonianMatrix {
        let lat = LatticeBox::build(1, half_side).unwrap();
        let spec = DisorderSpec::standard(coupling);
        let omega = sample_disorder(&spec, &lat, seed).unwrap();
        assemble_hamiltonian(&lat, &omega, bc).unwrap()
    }

    #[test]
    fn triangle_spectrum_is_exact() {
        let h = triangle([0.0; 3]);
        let s = eigen_full(&h, true).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[2] - 2.0).abs() < 1e-12);
        // the top eigenvector is the constant vector
        let v = &s.eigenvectors.as_ref().unwrap()[2];
        let c = 1.0 / 3.0f64.sqrt();
        for x in v {
            assert!((x.abs() - c).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_with_diagonal_matches_cubic_oracle() {
        let h = triangle([5.0, 0.0, 0.0]);
        let s = eigen_full(&h, false).unwrap();
        let dense: Vec<f64> = h.to_dense();
        let oracle = cubic_eigenvalues_3x3(&dense.try_into().unwrap());
        for (got, want) in s.eigenvalues.iter().zip(oracle) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        // and the roots are -1, 3 - sqrt 6, 3 + sqrt 6
        assert!((oracle[0] + 1.0).abs() < 1e-12);
        assert!((oracle[1] - (3.0 - 6.0f64.sqrt())).abs() < 1e-12);
        assert!((oracle[2] - (3.0 + 6.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn random_cubics_match_oracle() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let mut m = [0.0f64; 9];
            let mut draw = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0;
            let (a, b, c, d, e, f) = (draw(), draw(), draw(), draw(), draw(), draw());
            m[0] = a;
            m[4] = b;
            m[8] = c;
            m[1] = d;
            m[3] = d;
            m[2] = e;
            m[6] = e;
            m[5] = f;
            m[7] = f;
            let h = HamiltonianMatrix::from_dense(3, m.to_vec());
            let s = eigen_full(&h, false).unwrap();
            let oracle = cubic_eigenvalues_3x3(&m);
            for (got, want) in s.eigenvalues.iter().zip(oracle) {
                assert!((got - want).abs() < 1e-11, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn eigenvalues_identical_with_and_without_vectors() {
        let h = random_hamiltonian(30, 3.0, 5, BoundaryCondition::Periodic);
        let with = eigen_full(&h, true).unwrap();
        let without = eigen_full(&h, false).unwrap();
        let tol = 1e-12 * h.inf_norm();
        for (a, b) in with.eigenvalues.iter().zip(&without.eigenvalues) {
            assert!((a - b).abs() <= tol);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_with_small_residuals() {
        let h = random_hamiltonian(20, 2.0, 9, BoundaryCondition::Periodic);
        let n = h.dimension();
        let s = eigen_full(&h, true).unwrap();
        let vs = s.eigenvectors.as_ref().unwrap();
        for i in 0..n {
            for j in i..n {
                let dot: f64 = vs[i].iter().zip(&vs[j]).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot - expected).abs() <= 1e-10,
                    "orthonormality violated at ({i},{j}): {dot}"
                );
            }
        }
        for j in 0..n {
            let r = residual_inf(&h, s.eigenvalues[j], &vs[j]);
            assert!(r <= RESIDUAL_REL * h.inf_norm(), "residual {r} at {j}");
        }
    }

    #[test]
    fn trace_and_envelope_hold() {
        let spec = DisorderSpec::standard(5.0);
        let lat = LatticeBox::build(1, 40).unwrap();
        let omega = sample_disorder(&spec, &lat, 3).unwrap();
        let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();
        let s = eigen_full(&h, false).unwrap();
        let trace: f64 = omega.values.iter().sum();
        let sum: f64 = s.eigenvalues.iter().sum();
        let max_abs = omega.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((trace - sum).abs() <= 1e-9 * h.dimension() as f64 * max_abs.max(1.0));
        let (lo, hi) = crate::model::spectrum_bounds(&spec, 1);
        assert!(s.eigenvalues.iter().all(|v| (lo..=hi).contains(v)));
        // Gershgorin union
        let diag = h.diagonal();
        for &ev in &s.eigenvalues {
            let inside = (0..h.dimension())
                .any(|i| (ev - diag[i]).abs() <= h.row_offdiag_abs_sum(i) + 1e-9);
            assert!(inside, "{ev} escapes the Gershgorin union");
        }
    }

    #[test]
    fn torus_translation_preserves_spectrum() {
        // relabeling sites by a translation conjugates H by a permutation
        let lat = LatticeBox::build(2, 2).unwrap();
        let spec = DisorderSpec::standard(4.0);
        let omega = sample_disorder(&spec, &lat, 17).unwrap();
        let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();

        let mut shifted = vec![0.0; lat.volume()];
        for idx in 0..lat.volume() {
            let mut site = lat.site_of(idx);
            site[0] = if site[0] == lat.half_side() {
                -lat.half_side()
            } else {
                site[0] + 1
            };
            shifted[lat.index_of(&site)] = omega.values[idx];
        }
        let omega2 = crate::model::DisorderRealization {
            values: shifted,
            seed: omega.seed,
            spec: spec.clone(),
        };
        let h2 = assemble_hamiltonian(&lat, &omega2, BoundaryCondition::Periodic).unwrap();

        let s1 = eigen_full(&h, false).unwrap();
        let s2 = eigen_full(&h2, false).unwrap();
        for (a, b) in s1.eigenvalues.iter().zip(&s2.eigenvalues) {
            assert!((a - b).abs() <= 1e-10 * h.inf_norm());
        }
    }

    #[test]
    fn count_below_matches_diagonal_example() {
        let h = HamiltonianMatrix::from_tridiagonal(vec![-1.0, 0.0, 2.0], vec![0.0, 0.0], None);
        assert_eq!(count_below(&h, 1.0).unwrap().count, 2);
    }

    #[test]
    fn count_below_triangle() {
        let h = triangle([0.0; 3]);
        assert_eq!(count_below(&h, 0.0).unwrap().count, 2);
    }

    #[test]
    fn count_below_shifts_past_exact_eigenvalue() {
        let h = triangle([0.0; 3]);
        let r = count_below(&h, 2.0).unwrap();
        assert_eq!(r.count, 3, "exact hit resolves upward");
        assert!(r.shift_applied > 0.0);
    }

    #[test]
    fn counts_match_full_solver_on_random_instances() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for seed in 0..10u64 {
            let bc = if seed % 2 == 0 {
                BoundaryCondition::Periodic
            } else {
                BoundaryCondition::Simple
            };
            let h = random_hamiltonian(25, 4.0, seed, bc);
            let s = eigen_full(&h, false).unwrap();
            let (lo, hi) = h.gershgorin_interval();
            for _ in 0..40 {
                let t = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                let probe = lo - 0.2 + t * (hi - lo + 0.4);
                let exact = s.eigenvalues.iter().filter(|v| **v < probe).count();
                assert_eq!(
                    count_below(&h, probe).unwrap().count,
                    exact,
                    "probe {probe} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn dense_counts_match_full_solver_in_two_dims() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(78);
        let lat = LatticeBox::build(2, 3).unwrap();
        let spec = DisorderSpec::standard(6.0);
        for seed in 0..4u64 {
            let omega = sample_disorder(&spec, &lat, seed).unwrap();
            let h = assemble_hamiltonian(&lat, &omega, BoundaryCondition::Periodic).unwrap();
            assert!(matches!(h.storage(), Storage::Dense(_)));
            let s = eigen_full(&h, false).unwrap();
            let (lo, hi) = h.gershgorin_interval();
            for _ in 0..25 {
                let t = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                let probe = lo - 0.2 + t * (hi - lo + 0.4);
                let exact = s.eigenvalues.iter().filter(|v| **v < probe).count();
                assert_eq!(count_below(&h, probe).unwrap().count, exact, "probe {probe}");
            }
        }
    }

    #[test]
    fn count_below_is_monotone_with_saturating_ends() {
        let h = random_hamiltonian(30, 5.0, 2, BoundaryCondition::Periodic);
        let (lo, hi) = h.gershgorin_interval();
        assert_eq!(count_below(&h, lo - 1.0).unwrap().count, 0);
        assert_eq!(count_below(&h, hi + 1.0).unwrap().count, h.dimension());
        let mut prev = 0;
        let mut x = lo - 0.5;
        while x < hi + 0.5 {
            let c = count_below(&h, x).unwrap().count;
            assert!(c >= prev);
            prev = c;
            x += 0.37;
        }
    }

    #[test]
    fn interval_count_examples() {
        let h = triangle([0.0; 3]);
        assert_eq!(count_in_interval(&h, -1.5, 0.0).unwrap().count, 2);
        assert_eq!(count_in_interval(&h, 0.5, 0.5).unwrap().count, 0);
        let hr = random_hamiltonian(40, 5.0, 6, BoundaryCondition::Periodic);
        let (lo, hi) = hr.gershgorin_interval();
        assert_eq!(
            count_in_interval(&hr, lo - 1e-9, hi + 1e-9).unwrap().count,
            hr.dimension()
        );
    }

    #[test]
    fn interval_counts_are_additive() {
        let h = random_hamiltonian(35, 5.0, 8, BoundaryCondition::Simple);
        let total = count_in_interval(&h, -4.0, 4.0).unwrap().count;
        let left = count_in_interval(&h, -4.0, 0.3).unwrap().count;
        let right = count_in_interval(&h, 0.3, 4.0).unwrap().count;
        assert_eq!(left + right, total);
    }
}
