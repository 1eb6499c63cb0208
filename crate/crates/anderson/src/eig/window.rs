//! Windowed eigenpair extraction: bisection on the inertia count brackets
//! each eigenvalue in the window, then inverse iteration builds its vector.
//! Falls back to a full solve when the window covers more than 20% of the
//! spectrum envelope, when a dense matrix holds many pairs in the window,
//! or when inverse iteration stagnates.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use super::dense::DenseLdlt;
use super::tridiag::{CyclicLdlt, TridiagLu};
use super::{
    count_below, eigen_full, pivot_scale, residual_inf, SpectralData, RESIDUAL_REL,
};
use crate::error::{Error, Result};
use crate::model::{HamiltonianMatrix, Storage};
use crate::stats::u01;

/// Window wider than this fraction of the Gershgorin envelope goes through
/// the full solver.
const FULL_SOLVE_WINDOW_FRACTION: f64 = 0.2;
/// On dense storage, more pairs than this in the window make the full
/// solve-with-vectors cheaper than per-pair inverse iteration.
const DENSE_INVIT_MAX_PAIRS: usize = 12;
/// Eigenvalues closer than this (relative to ‖H‖) form a cluster whose
/// inverse-iteration vectors are orthogonalized against each other.
const CLUSTER_GAP_REL: f64 = 1e-4;

/// Eigenpairs with eigenvalue in [lo, hi), indices relative to the global
/// ascending order.
#[derive(Debug, Clone)]
pub struct WindowedSpectrum {
    pub data: SpectralData,
    /// Why (and whether) the full-solve fallback ran.
    pub fallback: Option<String>,
}

pub fn eigenpairs_in_window(
    h: &HamiltonianMatrix,
    lo: f64,
    hi: f64,
    want_vectors: bool,
) -> Result<WindowedSpectrum> {
    if !(lo <= hi) {
        return Err(Error::BadInterval { lo, hi });
    }
    let (env_lo, env_hi) = h.gershgorin_interval();
    if hi - lo > FULL_SOLVE_WINDOW_FRACTION * (env_hi - env_lo) {
        return full_filtered(h, lo, hi, want_vectors, "window wider than 20% of envelope");
    }

    let values: Vec<f64>;
    let global_offset: usize;
    match h.storage() {
        Storage::Dense(_) => {
            // One no-vector solve beats bisection here: every inertia count
            // on dense storage is itself a full factorization.
            let all = eigen_full(h, false)?;
            let k_lo = all.eigenvalues.partition_point(|v| *v < lo);
            let k_hi = all.eigenvalues.partition_point(|v| *v < hi);
            if want_vectors && k_hi - k_lo > DENSE_INVIT_MAX_PAIRS {
                return full_filtered(h, lo, hi, true, "many pairs in window on dense storage");
            }
            values = all.eigenvalues[k_lo..k_hi].to_vec();
            global_offset = k_lo;
        }
        _ => {
            let k_lo = count_below(h, lo)?.count;
            let k_hi = count_below(h, hi)?.count;
            let mut v = Vec::with_capacity(k_hi - k_lo);
            for idx in k_lo..k_hi {
                v.push(bracket_by_index(h, idx, lo, hi)?);
            }
            values = v;
            global_offset = k_lo;
        }
    }

    if !want_vectors || values.is_empty() {
        return Ok(WindowedSpectrum {
            data: SpectralData {
                eigenvalues: values,
                eigenvectors: want_vectors.then(Vec::new),
                residual_bound: 0.0,
                global_offset,
            },
            fallback: None,
        });
    }

    match inverse_iteration_sweep(h, &values, global_offset) {
        Ok((vectors, residual_bound)) => Ok(WindowedSpectrum {
            data: SpectralData {
                eigenvalues: values,
                eigenvectors: Some(vectors),
                residual_bound,
                global_offset,
            },
            fallback: None,
        }),
        Err(Error::InverseIterationStagnation { .. }) => {
            full_filtered(h, lo, hi, true, "inverse iteration stagnated")
        }
        Err(e) => Err(e),
    }
}

/// Eigenvalues in [lo, hi) plus the first eigenvalue at or above `hi`
/// (needed by spacing statistics, where the last level in a window pairs
/// with the first level beyond it).
#[derive(Debug, Clone)]
pub struct WindowLevels {
    pub levels: Vec<f64>,
    pub next_above: Option<f64>,
    pub global_offset: usize,
}

pub fn levels_in_window_plus_next(h: &HamiltonianMatrix, lo: f64, hi: f64) -> Result<WindowLevels> {
    if !(lo <= hi) {
        return Err(Error::BadInterval { lo, hi });
    }
    let n = h.dimension();
    let (env_lo, env_hi) = h.gershgorin_interval();
    let use_full = hi - lo > FULL_SOLVE_WINDOW_FRACTION * (env_hi - env_lo);
    match h.storage() {
        _ if use_full => {
            let all = eigen_full(h, false)?;
            let k_lo = all.eigenvalues.partition_point(|v| *v < lo);
            let k_hi = all.eigenvalues.partition_point(|v| *v < hi);
            Ok(WindowLevels {
                levels: all.eigenvalues[k_lo..k_hi].to_vec(),
                next_above: all.eigenvalues.get(k_hi).copied(),
                global_offset: k_lo,
            })
        }
        Storage::Dense(_) => {
            let all = eigen_full(h, false)?;
            let k_lo = all.eigenvalues.partition_point(|v| *v < lo);
            let k_hi = all.eigenvalues.partition_point(|v| *v < hi);
            Ok(WindowLevels {
                levels: all.eigenvalues[k_lo..k_hi].to_vec(),
                next_above: all.eigenvalues.get(k_hi).copied(),
                global_offset: k_lo,
            })
        }
        _ => {
            let k_lo = count_below(h, lo)?.count;
            let k_hi = count_below(h, hi)?.count;
            let mut levels = Vec::with_capacity(k_hi - k_lo);
            for idx in k_lo..k_hi {
                levels.push(bracket_by_index(h, idx, lo, hi)?);
            }
            let next_above = if k_hi < n {
                Some(bracket_by_index(h, k_hi, hi, env_hi + pivot_scale(h) * 1e-6)?)
            } else {
                None
            };
            Ok(WindowLevels {
                levels,
                next_above,
                global_offset: k_lo,
            })
        }
    }
}

fn full_filtered(
    h: &HamiltonianMatrix,
    lo: f64,
    hi: f64,
    want_vectors: bool,
    reason: &str,
) -> Result<WindowedSpectrum> {
    let full = eigen_full(h, want_vectors)?;
    let k_lo = full.eigenvalues.partition_point(|v| *v < lo);
    let k_hi = full.eigenvalues.partition_point(|v| *v < hi);
    let eigenvalues = full.eigenvalues[k_lo..k_hi].to_vec();
    let eigenvectors = full
        .eigenvectors
        .map(|vs| vs[k_lo..k_hi].to_vec());
    let residual_bound = match &eigenvectors {
        Some(vs) => vs
            .iter()
            .zip(&eigenvalues)
            .map(|(v, lam)| residual_inf(h, *lam, v))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    Ok(WindowedSpectrum {
        data: SpectralData {
            eigenvalues,
            eigenvectors,
            residual_bound,
            global_offset: k_lo,
        },
        fallback: Some(reason.to_string()),
    })
}

/// Bisection on the inertia count: converges to the eigenvalue of global
/// index `idx`, starting from a bracket with count(lo) <= idx < count(hi).
fn bracket_by_index(h: &HamiltonianMatrix, idx: usize, lo: f64, hi: f64) -> Result<f64> {
    let scale = pivot_scale(h);
    let mut a = lo;
    let mut b = hi;
    for _ in 0..160 {
        let mid = 0.5 * (a + b);
        if b - a <= (1e-13 * scale).max(4.0 * f64::EPSILON * mid.abs()) {
            break;
        }
        if count_below(h, mid)?.count <= idx {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

enum ShiftedSolver {
    Tri(TridiagLu),
    Cyclic(CyclicLdlt),
    Dense(DenseLdlt),
}

impl ShiftedSolver {
    fn new(h: &HamiltonianMatrix, shift: f64, clamp: f64) -> Self {
        match h.storage() {
            Storage::Tridiagonal { diag, off } => {
                ShiftedSolver::Tri(TridiagLu::factor(diag, off, shift, clamp))
            }
            Storage::CyclicTridiagonal { diag, off, corner } => {
                ShiftedSolver::Cyclic(CyclicLdlt::factor(diag, off, *corner, shift, clamp))
            }
            Storage::Dense(a) => {
                ShiftedSolver::Dense(DenseLdlt::factor(a.clone(), h.dimension(), shift, clamp))
            }
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            ShiftedSolver::Tri(f) => f.solve(b),
            ShiftedSolver::Cyclic(f) => f.solve(b),
            ShiftedSolver::Dense(f) => f.solve(b),
        }
    }
}

/// Inverse iteration for each bracketed eigenvalue; vectors within a
/// near-degenerate cluster are Gram-Schmidt orthogonalized against each
/// other so the orthonormality contract survives small gaps.
fn inverse_iteration_sweep(
    h: &HamiltonianMatrix,
    values: &[f64],
    global_offset: usize,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let scale = pivot_scale(h);
    let cluster_gap = CLUSTER_GAP_REL * scale;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0usize;
    let mut worst = 0.0f64;
    for (i, &lambda) in values.iter().enumerate() {
        if i > 0 && lambda - values[i - 1] > cluster_gap {
            cluster_start = i;
        }
        let prior = &vectors[cluster_start..i];
        let (v, resid) = inverse_iteration(h, lambda, scale, prior, (global_offset + i) as u64)?;
        worst = worst.max(resid);
        vectors.push(v);
    }
    Ok((vectors, worst))
}

fn inverse_iteration(
    h: &HamiltonianMatrix,
    lambda: f64,
    scale: f64,
    prior: &[Vec<f64>],
    tag: u64,
) -> Result<(Vec<f64>, f64)> {
    let n = h.dimension();
    let clamp = f64::EPSILON * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(0x1A7E_5EED ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut best: Option<(Vec<f64>, f64)> = None;

    for attempt in 0..3 {
        let shift = lambda + [0.0, 1.0, -1.0][attempt] * 1e-12 * scale;
        let solver = ShiftedSolver::new(h, shift, clamp);
        let mut x = random_unit(n, &mut rng);
        for _ in 0..8 {
            let mut y = solver.solve(&x);
            for p in prior {
                let c: f64 = y.iter().zip(p).map(|(a, b)| a * b).sum();
                for (yi, pi) in y.iter_mut().zip(p) {
                    *yi -= c * pi;
                }
            }
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-280 {
                x = random_unit(n, &mut rng);
                continue;
            }
            for v in &mut y {
                *v /= norm;
            }
            let resid = residual_inf(h, lambda, &y);
            if best.as_ref().map_or(true, |(_, r)| resid < *r) {
                best = Some((y.clone(), resid));
            }
            x = y;
            if resid <= 0.1 * RESIDUAL_REL * scale {
                let (v, r) = best.unwrap();
                return Ok((v, r));
            }
        }
        if let Some((_, r)) = &best {
            if *r <= RESIDUAL_REL * scale {
                let (v, r) = best.unwrap();
                return Ok((v, r));
            }
        }
    }
    let residual = best.map(|(_, r)| r).unwrap_or(f64::INFINITY);
    Err(Error::InverseIterationStagnation {
        value: lambda,
        residual,
    })
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| 2.0 * u01(rng) - 1.0).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for x in &mut v {
        *x /= norm;
    }
    v
}
