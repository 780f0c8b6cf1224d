use crate::model::{dot, norm};

/// Smallest Ritz value after `steps` Lanczos steps from `start`, with full
/// reorthogonalization. An upper bound on the smallest eigenvalue.
pub fn lanczos_min_eig<F>(apply: F, start: &[f64], steps: usize) -> f64
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = start.len();
    let s = norm(start);
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / s).collect()];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for k in 0..steps.min(n) {
        let mut w = apply(&basis[k]);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for q in &basis {
            let c = dot(&w, q);
            for i in 0..n {
                w[i] -= c * q[i];
            }
        }
        let b = norm(&w);
        if k + 1 == steps.min(n) || b <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    tridiagonal_min_eig(&alpha, &beta)
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
pub fn tridiagonal_min_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let radius = |i: usize| {
        let l = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let r = if i < beta.len() { beta[i].abs() } else { 0.0 };
        l + r
    };
    let mut lo = (0..n).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    // number of eigenvalues below x
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
