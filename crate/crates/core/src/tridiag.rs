//! Eigenpairs of real symmetric tridiagonal matrices.
//!
//! Eigenvalues are located by Sturm-sequence bisection, eigenvectors by
//! inverse iteration with a partially pivoted tridiagonal factorization.
//! Only the part of the spectrum below a cutoff is computed.

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = if i == 0 { d - x } else { (d - x) - e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d.abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// All eigenvalues below `cutoff`, ascending, each bisected to machine precision.
pub fn eigenvalues_below(diag: &[f64], off: &[f64], cutoff: f64) -> Vec<f64> {
    assert_eq!(off.len() + 1, diag.len());
    let (glo, ghi) = gershgorin(diag, off);
    let count = sturm_count(diag, off, cutoff);
    let upper = cutoff.min(ghi);
    let scale = glo.abs().max(ghi.abs()).max(1.0);
    (0..count)
        .map(|k| {
            // bracket: sturm_count(lo) <= k < sturm_count(hi)
            let (mut lo, mut hi) = (glo - 1e-12 * scale, upper);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sturm_count(diag, off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Solve (T - shift I) x = rhs in place with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    // rows after elimination: u0 (diag), u1 (first super), u2 (second super)
    let mut u0: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut u1: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { off[i] } else { 0.0 })
        .collect();
    let mut u2 = vec![0.0; n];
    let tiny = f64::EPSILON * gershgorin(diag, off).1.abs().max(1.0);
    for i in 0..n.saturating_sub(1) {
        let sub = off[i];
        if sub.abs() > u0[i].abs() {
            // swap rows i and i+1; row i+1 is still untouched: [sub, u0, u1]
            let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
            let r1 = u0[i + 1];
            let r2 = u1[i + 1];
            u0[i] = sub;
            u1[i] = r1;
            u2[i] = r2;
            rhs.swap(i, i + 1);
            let l = a0 / sub;
            u0[i + 1] = a1 - l * r1;
            u1[i + 1] = a2 - l * r2;
            rhs[i + 1] -= l * rhs[i];
        } else {
            let piv = if u0[i] == 0.0 { tiny } else { u0[i] };
            u0[i] = piv;
            let l = sub / piv;
            u0[i + 1] -= l * u1[i];
            u1[i + 1] -= l * u2[i];
            rhs[i + 1] -= l * rhs[i];
        }
    }
    if u0[n - 1] == 0.0 {
        u0[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * rhs[i + 2];
        }
        rhs[i] = s / u0[i];
    }
}

/// Unit-norm eigenvector for the (accurately known) eigenvalue `lambda`.
///
/// `previous` vectors are projected out after each iteration; pass the
/// vectors of nearby eigenvalues when the spectrum is clustered.
pub fn eigenvector(diag: &[f64], off: &[f64], lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
    let n = diag.len();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.754_877_666).sin())
        .collect();
    for _ in 0..4 {
        shifted_solve(diag, off, lambda, &mut v);
        for p in previous {
            let dot: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
