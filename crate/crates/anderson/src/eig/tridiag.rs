//! O(N) inertia counting and shifted solves for tridiagonal matrices and
//! for the d=1 periodic case (tridiagonal plus one corner entry).
//!
//! Counting runs the Sturm sequence / unpivoted LDLᵀ recurrence and counts
//! negative pivots (Sylvester's law). For the periodic matrix the corner
//! couples site 0 to site N-1; eliminating sites in order keeps all fill-in
//! inside the last column, so the factorization stays O(N) with O(1) state.

use super::dense::PivotBreakdown;

/// Eigenvalues of the tridiagonal matrix strictly below `x`: negative pivot
/// count of the shifted LDLᵀ. Errors out on a pivot below `floor`.
pub fn sturm_count(
    diag: &[f64],
    off: &[f64],
    x: f64,
    floor: f64,
) -> Result<usize, PivotBreakdown> {
    let n = diag.len();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < floor {
        return Err(PivotBreakdown);
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q;
        if q.abs() < floor {
            return Err(PivotBreakdown);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

/// Same count for the cyclic (periodic d=1) matrix: tridiagonal plus
/// `corner` coupling sites 0 and n-1. Requires n >= 3.
pub fn cyclic_count(
    diag: &[f64],
    off: &[f64],
    corner: f64,
    x: f64,
    floor: f64,
) -> Result<usize, PivotBreakdown> {
    let n = diag.len();
    debug_assert!(n >= 3);
    let mut count = 0;
    let mut dk = diag[0] - x; // current pivot candidate
    let mut bk = corner; // border entry coupling row k to row n-1
    let mut dlast = diag[n - 1] - x; // running last diagonal

    for k in 0..(n - 2) {
        if dk.abs() < floor {
            return Err(PivotBreakdown);
        }
        if dk < 0.0 {
            count += 1;
        }
        let ek = off[k];
        let natural_border = if k + 1 == n - 2 { off[n - 2] } else { 0.0 };
        let dnext = (diag[k + 1] - x) - ek * ek / dk;
        let bnext = natural_border - ek * bk / dk;
        dlast -= bk * bk / dk;
        dk = dnext;
        bk = bnext;
    }
    // trailing 2x2 block [[dk, bk], [bk, dlast]]
    if dk.abs() < floor {
        return Err(PivotBreakdown);
    }
    if dk < 0.0 {
        count += 1;
    }
    dlast -= bk * bk / dk;
    if dlast.abs() < floor {
        return Err(PivotBreakdown);
    }
    if dlast < 0.0 {
        count += 1;
    }
    Ok(count)
}

/// LU factorization of (T - shift·I) with partial pivoting for a strictly
/// tridiagonal T, for inverse-iteration solves. Zero pivots are clamped to
/// ±`clamp`; near-singular shifts are the intended use.
pub struct TridiagLu {
    n: usize,
    dl: Vec<f64>, // multipliers
    d: Vec<f64>,  // upper diagonal of U
    du: Vec<f64>, // first superdiagonal of U
    du2: Vec<f64>, // second superdiagonal fill from pivoting
    swapped: Vec<bool>,
}

impl TridiagLu {
    pub fn factor(diag: &[f64], off: &[f64], shift: f64, clamp: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl: Vec<f64> = off.to_vec();
        let mut du: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                let pivot = clamp_pivot(d[i], clamp);
                d[i] = pivot;
                let fact = dl[i] / pivot;
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                du[i] = temp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if n > 0 {
            d[n - 1] = clamp_pivot(d[n - 1], clamp);
        }
        TridiagLu {
            n,
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.dl[i] * x[i];
            } else {
                x[i + 1] -= self.dl[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.du[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * x[i + 2];
            }
            x[i] = s / self.d[i];
        }
        x
    }
}

/// Unpivoted bordered LDLᵀ of the shifted cyclic matrix with clamped
/// pivots, for inverse-iteration solves in the periodic d=1 case.
pub struct CyclicLdlt {
    n: usize,
    pivots: Vec<f64>,
    /// L[k+1][k] for k < n-1 (index n-2 holds L[n-1][n-2])
    lsub: Vec<f64>,
    /// L[n-1][k] for k < n-2
    lbord: Vec<f64>,
}

impl CyclicLdlt {
    pub fn factor(diag: &[f64], off: &[f64], corner: f64, shift: f64, clamp: f64) -> Self {
        let n = diag.len();
        debug_assert!(n >= 3);
        let mut pivots = vec![0.0; n];
        let mut lsub = vec![0.0; n - 1];
        let mut lbord = vec![0.0; n - 2];

        let mut dk = diag[0] - shift;
        let mut bk = corner;
        let mut dlast = diag[n - 1] - shift;
        for k in 0..(n - 2) {
            let pivot = clamp_pivot(dk, clamp);
            pivots[k] = pivot;
            let ek = off[k];
            lsub[k] = ek / pivot;
            lbord[k] = bk / pivot;
            let natural_border = if k + 1 == n - 2 { off[n - 2] } else { 0.0 };
            let dnext = (diag[k + 1] - shift) - ek * ek / pivot;
            let bnext = natural_border - ek * bk / pivot;
            dlast -= bk * bk / pivot;
            dk = dnext;
            bk = bnext;
        }
        let pivot = clamp_pivot(dk, clamp);
        pivots[n - 2] = pivot;
        lsub[n - 2] = bk / pivot;
        dlast -= bk * bk / pivot;
        pivots[n - 1] = clamp_pivot(dlast, clamp);

        CyclicLdlt {
            n,
            pivots,
            lsub,
            lbord,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut z = b.to_vec();
        // L z = b
        for k in 0..(n - 2) {
            z[k + 1] -= self.lsub[k] * z[k];
            z[n - 1] -= self.lbord[k] * z[k];
        }
        z[n - 1] -= self.lsub[n - 2] * z[n - 2];
        // D
        for i in 0..n {
            z[i] /= self.pivots[i];
        }
        // Lᵀ x = z
        let mut x = z;
        x[n - 2] -= self.lsub[n - 2] * x[n - 1];
        for k in (0..(n - 2)).rev() {
            x[k] -= self.lsub[k] * x[k + 1] + self.lbord[k] * x[n - 1];
        }
        x
    }
}

fn clamp_pivot(p: f64, clamp: f64) -> f64 {
    if p.abs() < clamp {
        if p >= 0.0 {
            clamp
        } else {
            -clamp
        }
    } else {
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_on_two_by_two() {
        // [[1,-1],[-1,3]]: eigenvalues 2 ± sqrt 2 ≈ 0.586, 3.414
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(sturm_count(&d, &e, 0.0, 1e-300).unwrap(), 0);
        assert_eq!(sturm_count(&d, &e, 1.5, 1e-300).unwrap(), 1);
        assert_eq!(sturm_count(&d, &e, 4.0, 1e-300).unwrap(), 2);
    }

    #[test]
    fn sturm_count_reports_zero_pivot() {
        // probing at x = diag[0] zeroes the first pivot; the caller is
        // expected to retry at a shifted energy
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert!(sturm_count(&d, &e, 1.0, 1e-13).is_err());
    }

    #[test]
    fn sturm_count_diagonal_no_hopping() {
        let d = [-1.0, 0.0, 2.0];
        let e = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &e, 1.0, 1e-300).unwrap(), 2);
    }

    #[test]
    fn cyclic_count_triangle() {
        // C3 adjacency: eigenvalues -1, -1, 2
        let d = [0.0; 3];
        let e = [1.0; 2];
        assert_eq!(cyclic_count(&d, &e, 1.0, 0.5, 1e-12).unwrap(), 2);
        assert_eq!(cyclic_count(&d, &e, 1.0, -1.5, 1e-12).unwrap(), 0);
        assert_eq!(cyclic_count(&d, &e, 1.0, 3.0, 1e-12).unwrap(), 3);
    }

    #[test]
    fn cyclic_count_detects_exact_eigenvalue() {
        // x = 2 is an eigenvalue of the triangle: last pivot hits zero
        let d = [0.0; 3];
        let e = [1.0; 2];
        assert!(cyclic_count(&d, &e, 1.0, 2.0, 1e-12).is_err());
    }

    #[test]
    fn cyclic_count_agrees_with_free_ring_formula() {
        // omega = 0 ring: eigenvalues 2 cos(2 pi k / n)
        let n = 101;
        let d = vec![0.0; n];
        let e = vec![1.0; n - 1];
        for x in [-1.7, -0.3, 0.0001, 0.9, 1.99] {
            let exact = (0..n)
                .filter(|&k| 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos() < x)
                .count();
            let got = cyclic_count(&d, &e, 1.0, x, 1e-13 * 4.0).unwrap();
            assert_eq!(got, exact, "x = {x}");
        }
    }

    #[test]
    fn tridiag_lu_solves_shifted_system() {
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos() * 2.0).collect();
        let off = vec![1.0; n - 1];
        let shift = 0.41;
        let lu = TridiagLu::factor(&diag, &off, shift, 1e-300);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 1.1).sin()).collect();
        let x = lu.solve(&b);
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut s = (diag[i] - shift) * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += off[i] * x[i + 1];
            }
            worst = worst.max((s - b[i]).abs());
        }
        assert!(worst < 1e-10, "residual {worst}");
    }

    #[test]
    fn cyclic_ldlt_solves_shifted_system() {
        let n = 64;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64 * 0.73).sin() * 3.0).collect();
        let off = vec![1.0; n - 1];
        let corner = 1.0;
        let shift = -0.27;
        let f = CyclicLdlt::factor(&diag, &off, corner, shift, 1e-300);
        let b: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.01).cos()).collect();
        let x = f.solve(&b);
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut s = (diag[i] - shift) * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += off[i] * x[i + 1];
            }
            if i == 0 {
                s += corner * x[n - 1];
            }
            if i == n - 1 {
                s += corner * x[0];
            }
            worst = worst.max((s - b[i]).abs());
        }
        assert!(worst < 1e-9, "residual {worst}");
    }
}
