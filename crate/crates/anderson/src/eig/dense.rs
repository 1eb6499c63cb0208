//! Dense symmetric kernels: Householder tridiagonalization, the implicitly
//! shifted QL iteration, and LDLᵀ factorization with diagonal pivoting for
//! Sylvester inertia counts and shifted solves.

use crate::error::{Error, Result};

/// Reduce a full symmetric matrix (row-major, length n*n) to tridiagonal
/// form by Householder reflections: T = Qᵀ A Q.
///
/// Returns (d, e) with d the diagonal and e[k] the subdiagonal between k and
/// k+1 (e has length n, last entry 0). When `q` is given it must be the
/// identity on entry and accumulates the product of reflections, so that
/// feeding it to `tql2` yields eigenvectors of A. The (d, e) arithmetic is
/// identical with and without accumulation.
pub fn tridiagonalize(a: &mut [f64], n: usize, mut q: Option<&mut [f64]>) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut v = vec![0.0f64; n];
    let mut p = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x0 = a[(k + 1) * n + k];
        let mut norm2 = x0 * x0;
        for i in 2..=m {
            let xi = a[(k + i) * n + k];
            norm2 += xi * xi;
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        // v = x - alpha e1; beta = 2 / vᵀv with vᵀv = 2(norm² - alpha·x0)
        let vtv = 2.0 * (norm2 - alpha * x0);
        let beta = 2.0 / vtv;
        v[0] = x0 - alpha;
        for i in 1..m {
            v[i] = a[(k + 1 + i) * n + k];
        }

        // p = beta · A_sub · v on the trailing block
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            let mut s = 0.0;
            for j in 0..m {
                s += row[j] * v[j];
            }
            p[i] = beta * s;
        }
        let kappa = 0.5 * beta * dot(&p[..m], &v[..m]);
        for i in 0..m {
            w[i] = p[i] - kappa * v[i];
        }
        // A_sub -= v wᵀ + w vᵀ
        for i in 0..m {
            let vi = v[i];
            let wi = w[i];
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
            for j in 0..m {
                row[j] -= vi * w[j] + wi * v[j];
            }
        }
        a[(k + 1) * n + k] = alpha;
        a[k * n + k + 1] = alpha;
        for i in 2..=m {
            a[(k + i) * n + k] = 0.0;
            a[k * n + k + i] = 0.0;
        }

        // Q ← Q (I - beta v vᵀ)
        if let Some(q) = q.as_deref_mut() {
            for r in 0..n {
                let row = &mut q[r * n + k + 1..r * n + n];
                let mut s = 0.0;
                for j in 0..m {
                    s += row[j] * v[j];
                }
                s *= beta;
                for j in 0..m {
                    row[j] -= s * v[j];
                }
            }
        }
    }

    let d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut e = vec![0.0f64; n];
    for i in 0..n.saturating_sub(1) {
        e[i] = a[(i + 1) * n + i];
    }
    (d, e)
}

/// Implicitly shifted QL iteration on a symmetric tridiagonal matrix.
///
/// `d` holds the diagonal, `e[i]` the subdiagonal between i and i+1 with
/// e[n-1] = 0. Eigenvalues land in `d` sorted ascending; when `q` is given
/// (row-major n×n, typically the output of `tridiagonalize` or the
/// identity) its columns become the matching eigenvectors. Errors out with
/// the eigenvalue index if an eigenvalue fails to converge within 50
/// implicit shifts; never returns silently wrong data.
pub fn tql2(d: &mut [f64], e: &mut [f64], mut q: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    debug_assert_eq!(d.len(), n);
    debug_assert_eq!(e.len(), n);
    e[n - 1] = 0.0;

    let eps = 2.0_f64.powi(-52);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(Error::EigenNonConvergence {
                        index: l,
                        iterations: 50,
                    });
                }

                // implicit shift from the leading 2x2
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;

                // QL sweep
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gi = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gi;
                    d[i + 1] = h + s * (c * gi + s * d[i]);

                    if let Some(q) = q.as_deref_mut() {
                        for k in 0..n {
                            let h2 = q[k * n + i + 1];
                            q[k * n + i + 1] = s * q[k * n + i] + c * h2;
                            q[k * n + i] = c * q[k * n + i] - s * h2;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // sort ascending, carrying eigenvector columns along
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d.swap(i, k);
            if let Some(q) = q.as_deref_mut() {
                for r in 0..n {
                    q.swap(r * n + i, r * n + k);
                }
            }
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug)]
pub struct PivotBreakdown;

/// Number of eigenvalues of (A - shift·I) below zero via LDLᵀ with
/// symmetric diagonal pivoting; `a` is a working copy and is destroyed.
/// Fails when a pivot magnitude drops below `floor` (the caller retries at
/// a shifted energy).
pub fn ldlt_count_dense(
    a: &mut [f64],
    n: usize,
    shift: f64,
    floor: f64,
) -> std::result::Result<usize, PivotBreakdown> {
    for i in 0..n {
        a[i * n + i] -= shift;
    }
    let mut col = vec![0.0f64; n];
    let mut negatives = 0;
    for k in 0..n {
        // largest remaining diagonal entry as pivot (congruence preserves inertia)
        let mut jmax = k;
        let mut best = a[k * n + k].abs();
        for j in (k + 1)..n {
            let cand = a[j * n + j].abs();
            if cand > best {
                best = cand;
                jmax = j;
            }
        }
        if jmax != k {
            swap_symmetric(a, n, k, jmax);
        }
        let pivot = a[k * n + k];
        if pivot.abs() < floor {
            return Err(PivotBreakdown);
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        eliminate_column(a, n, k, pivot, &mut col);
    }
    Ok(negatives)
}

/// Rank-1 elimination of column k on the trailing lower triangle; the
/// original column entries are snapshotted first because the multipliers
/// overwrite them in place.
fn eliminate_column(a: &mut [f64], n: usize, k: usize, pivot: f64, col: &mut [f64]) {
    for i in (k + 1)..n {
        col[i] = a[i * n + k];
    }
    for i in (k + 1)..n {
        let m = col[i] / pivot;
        for j in (k + 1)..=i {
            a[i * n + j] -= m * col[j];
        }
        a[i * n + k] = m;
    }
}

/// Symmetric row/column interchange r <-> s (r < s) acting on the lower
/// triangle, multipliers included.
fn swap_symmetric(a: &mut [f64], n: usize, r: usize, s: usize) {
    debug_assert!(r < s);
    for j in 0..r {
        a.swap(r * n + j, s * n + j);
    }
    for i in (r + 1)..s {
        a.swap(i * n + r, s * n + i);
    }
    let drr = a[r * n + r];
    a[r * n + r] = a[s * n + s];
    a[s * n + s] = drr;
    for i in (s + 1)..n {
        a.swap(i * n + r, i * n + s);
    }
}

/// LDLᵀ factorization of (A - shift·I) with diagonal pivoting and clamped
/// pivots, for shifted solves in inverse iteration. Never fails: pivots
/// with magnitude below `clamp` are replaced by ±clamp (the deliberate
/// near-singular solve at an eigenvalue shift relies on this).
pub struct DenseLdlt {
    n: usize,
    /// unit-lower multipliers below the diagonal, pivots on the diagonal
    a: Vec<f64>,
    /// interchanges in elimination order: step k swapped k <-> swaps[k]
    swaps: Vec<usize>,
}

impl DenseLdlt {
    pub fn factor(mut a: Vec<f64>, n: usize, shift: f64, clamp: f64) -> Self {
        for i in 0..n {
            a[i * n + i] -= shift;
        }
        let mut col = vec![0.0f64; n];
        let mut swaps = vec![0usize; n];
        for k in 0..n {
            let mut jmax = k;
            let mut best = a[k * n + k].abs();
            for j in (k + 1)..n {
                let cand = a[j * n + j].abs();
                if cand > best {
                    best = cand;
                    jmax = j;
                }
            }
            swaps[k] = jmax;
            if jmax != k {
                swap_symmetric(&mut a, n, k, jmax);
            }
            let mut pivot = a[k * n + k];
            if pivot.abs() < clamp {
                pivot = if pivot >= 0.0 { clamp } else { -clamp };
                a[k * n + k] = pivot;
            }
            eliminate_column(&mut a, n, k, pivot, &mut col);
        }
        DenseLdlt { n, a, swaps }
    }

    /// Solve (A - shift·I) x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let a = &self.a;
        let mut x = b.to_vec();
        for k in 0..n {
            if self.swaps[k] != k {
                x.swap(k, self.swaps[k]);
            }
        }
        // L z = Pᵀb
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s;
        }
        // D
        for i in 0..n {
            x[i] /= a[i * n + i];
        }
        // Lᵀ
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= a[j * n + i] * x[j];
            }
            x[i] = s;
        }
        for k in (0..n).rev() {
            if self.swaps[k] != k {
                x.swap(k, self.swaps[k]);
            }
        }
        x
    }
}
