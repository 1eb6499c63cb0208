//! Shared statistical plumbing: stable uniform/Poisson sampling, Poisson
//! probability mass functions, truncated joint pmfs with total-variation
//! distances, the simulation-calibrated pass thresholds, and Wilson score
//! intervals.
//!
//! Sampling is built directly on ChaCha8 64-bit output so results are
//! bit-identical across platforms and library versions.

use rand_core::RngCore;

/// Uniform in [0, 1): top 53 bits of one 64-bit draw.
pub fn u01(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased uniform index in [0, n) by rejection.
pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % n) as usize;
        }
    }
}

/// Exact Poisson sampling by the product method, chunked so the threshold
/// e^-mu never underflows.
pub fn sample_poisson(rng: &mut impl RngCore, mean: f64) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite());
    let mut remaining = mean;
    let mut total = 0u64;
    while remaining > 0.0 {
        let mu = remaining.min(16.0);
        remaining -= mu;
        let threshold = (-mu).exp();
        let mut prod = 1.0;
        let mut k = 0u64;
        loop {
            prod *= u01(rng);
            if prod <= threshold {
                break;
            }
            k += 1;
        }
        total += k;
    }
    total
}

/// ln k!
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Poisson pmf P(X = k) for X ~ Poisson(mean), computed in log space.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - ln_factorial(k)).exp()
}

/// Smallest K with P(X > K) < tail.
pub fn poisson_tail_cutoff(mean: f64, tail: f64) -> u64 {
    let mut cdf = 0.0;
    let mut k = 0u64;
    loop {
        cdf += poisson_pmf(mean, k);
        if 1.0 - cdf < tail {
            return k;
        }
        k += 1;
        assert!(k < 100_000, "tail cutoff did not converge");
    }
}

/// Total variation distance between two pmfs on the same finite support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// A pmf on a product of truncated count axes. Axis i has `cutoffs[i] + 2`
/// cells: counts 0..=cutoffs[i] plus one overflow cell for counts beyond.
#[derive(Debug, Clone)]
pub struct JointPmf {
    pub cutoffs: Vec<u64>,
    axis_sizes: Vec<usize>,
    pub cells: Vec<f64>,
}

impl JointPmf {
    fn new(cutoffs: Vec<u64>) -> Self {
        let axis_sizes: Vec<usize> = cutoffs.iter().map(|k| *k as usize + 2).collect();
        let total: usize = axis_sizes.iter().product();
        JointPmf {
            cutoffs,
            axis_sizes,
            cells: vec![0.0; total],
        }
    }

    /// Truncation cutoffs such that each Poisson(means[i]) tail beyond the
    /// cutoff has mass < tail.
    pub fn cutoffs_for(means: &[f64], tail: f64) -> Vec<u64> {
        means.iter().map(|m| poisson_tail_cutoff(*m, tail)).collect()
    }

    fn cell_index(&self, counts: &[u64]) -> usize {
        let mut idx = 0;
        for (axis, &c) in counts.iter().enumerate() {
            let cell = (c.min(self.cutoffs[axis] + 1)) as usize;
            idx = idx * self.axis_sizes[axis] + cell;
        }
        idx
    }

    /// Empirical pmf of joint count samples.
    pub fn empirical(cutoffs: Vec<u64>, samples: &[Vec<u64>]) -> Self {
        let mut pmf = Self::new(cutoffs);
        let w = 1.0 / samples.len() as f64;
        for s in samples {
            let idx = pmf.cell_index(s);
            pmf.cells[idx] += w;
        }
        pmf
    }

    /// Product-Poisson reference with the given means; the overflow cell on
    /// each axis carries the lumped tail mass.
    pub fn product_poisson(cutoffs: Vec<u64>, means: &[f64]) -> Self {
        assert_eq!(cutoffs.len(), means.len());
        let mut pmf = Self::new(cutoffs.clone());
        let axis_pmfs: Vec<Vec<f64>> = means
            .iter()
            .zip(&cutoffs)
            .map(|(m, k)| poisson_pmf_with_tail(*m, *k))
            .collect();
        fill_product(&mut pmf.cells, &axis_pmfs);
        pmf
    }

    /// Per-axis marginals, each of length cutoff+2.
    pub fn marginals(&self) -> Vec<Vec<f64>> {
        let d = self.axis_sizes.len();
        let mut out: Vec<Vec<f64>> = self.axis_sizes.iter().map(|s| vec![0.0; *s]).collect();
        for (flat, p) in self.cells.iter().enumerate() {
            let mut rem = flat;
            for axis in (0..d).rev() {
                let s = self.axis_sizes[axis];
                out[axis][rem % s] += p;
                rem /= s;
            }
        }
        out
    }

    /// Independent product of this pmf's own marginals.
    pub fn product_of_marginals(&self) -> Self {
        let mut pmf = Self::new(self.cutoffs.clone());
        fill_product(&mut pmf.cells, &self.marginals());
        pmf
    }

    pub fn tv_to(&self, other: &JointPmf) -> f64 {
        tv_distance(&self.cells, &other.cells)
    }
}

/// Poisson pmf over 0..=cutoff with the lumped tail mass appended.
pub fn poisson_pmf_with_tail(mean: f64, cutoff: u64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=cutoff).map(|k| poisson_pmf(mean, k)).collect();
    let tail = (1.0 - v.iter().sum::<f64>()).max(0.0);
    v.push(tail);
    v
}

fn fill_product(cells: &mut [f64], axis_pmfs: &[Vec<f64>]) {
    let sizes: Vec<usize> = axis_pmfs.iter().map(|v| v.len()).collect();
    for (flat, cell) in cells.iter_mut().enumerate() {
        let mut rem = flat;
        let mut p = 1.0;
        for axis in (0..sizes.len()).rev() {
            p *= axis_pmfs[axis][rem % sizes[axis]];
            rem /= sizes[axis];
        }
        *cell = p;
    }
}

/// Draw `r` joint samples from independent Poissons and return the TV of
/// their empirical pmf to the exact product reference.
fn one_calibration_tv(rng: &mut impl RngCore, means: &[f64], cutoffs: &[u64], r: usize) -> f64 {
    let samples: Vec<Vec<u64>> = (0..r)
        .map(|_| means.iter().map(|m| sample_poisson(rng, *m)).collect())
        .collect();
    let emp = JointPmf::empirical(cutoffs.to_vec(), &samples);
    let reference = JointPmf::product_poisson(cutoffs.to_vec(), means);
    emp.tv_to(&reference)
}

/// Calibrated TV pass threshold: simulate the exact limit law at the same
/// sample count `r` `sims` times, take the 99th percentile of the TV to its
/// own reference, and never go below `floor`.
pub fn calibrate_tv_threshold(
    rng: &mut impl RngCore,
    means: &[f64],
    r: usize,
    sims: usize,
    floor: f64,
) -> f64 {
    let cutoffs = JointPmf::cutoffs_for(means, 1e-4);
    let mut tvs: Vec<f64> = (0..sims)
        .map(|_| one_calibration_tv(rng, means, &cutoffs, r))
        .collect();
    tvs.sort_by(f64::total_cmp);
    percentile_nearest_rank(&tvs, 0.99).max(floor)
}

/// Same protocol for the independence statistic: TV between the joint
/// empirical pmf of two independent Poisson streams and the product of its
/// own marginals.
pub fn calibrate_independence_threshold(
    rng: &mut impl RngCore,
    means: &[f64; 2],
    r: usize,
    sims: usize,
    floor: f64,
) -> f64 {
    let cutoffs = JointPmf::cutoffs_for(means, 1e-4);
    let mut tvs: Vec<f64> = (0..sims)
        .map(|_| {
            let samples: Vec<Vec<u64>> = (0..r)
                .map(|_| vec![sample_poisson(rng, means[0]), sample_poisson(rng, means[1])])
                .collect();
            let emp = JointPmf::empirical(cutoffs.clone(), &samples);
            emp.tv_to(&emp.product_of_marginals())
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    percentile_nearest_rank(&tvs, 0.99).max(floor)
}

/// Nearest-rank percentile of a sorted slice.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
