use crate::error::{Error, Result};
use crate::model::dot;

/// Preconditioned conjugate gradients on one or two right-hand sides in
/// lockstep, so that operator and preconditioner can process both
/// directions with one batched call.
///
/// `apply` and `precond` map a batch of vectors to their images.
pub(crate) fn pcg_batch<A, P>(
    apply: A,
    precond: P,
    rhs: &[&[f64]],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<Vec<f64>>, usize)>
where
    A: Fn(&[&[f64]]) -> Vec<Vec<f64>>,
    P: Fn(&[&[f64]]) -> Vec<Vec<f64>>,
{
    let k = rhs.len();
    let n = rhs.first().map_or(0, |b| b.len());
    let bnorm: Vec<f64> = rhs.iter().map(|b| dot(b, b).sqrt()).collect();
    let mut x = vec![vec![0.0; n]; k];
    let mut r: Vec<Vec<f64>> = rhs.iter().map(|b| b.to_vec()).collect();
    let mut active: Vec<bool> = bnorm.iter().map(|&b| b > 0.0).collect();
    let mut p = vec![Vec::new(); k];
    let mut rz = vec![0.0; k];
    {
        let idx: Vec<usize> = (0..k).filter(|&j| active[j]).collect();
        let zs = precond(&idx.iter().map(|&j| r[j].as_slice()).collect::<Vec<_>>());
        for (j, zj) in idx.into_iter().zip(zs) {
            rz[j] = dot(&r[j], &zj);
            p[j] = zj;
        }
    }
    let mut iterations = 0;
    while active.iter().any(|&a| a) {
        if iterations == maxit {
            let residual = (0..k)
                .filter(|&j| active[j])
                .map(|j| dot(&r[j], &r[j]).sqrt() / bnorm[j])
                .fold(0.0, f64::max);
            return Err(Error::NoConvergence { iterations, residual });
        }
        iterations += 1;
        let idx: Vec<usize> = (0..k).filter(|&j| active[j]).collect();
        let qs = apply(&idx.iter().map(|&j| p[j].as_slice()).collect::<Vec<_>>());
        for (&j, q) in idx.iter().zip(&qs) {
            let pq = dot(&p[j], q);
            if !(pq > 0.0) {
                return Err(Error::IndefiniteJacobian {
                    curvature: pq / dot(&p[j], &p[j]),
                });
            }
            let alpha = rz[j] / pq;
            for i in 0..n {
                x[j][i] += alpha * p[j][i];
                r[j][i] -= alpha * q[i];
            }
            if dot(&r[j], &r[j]).sqrt() <= tol * bnorm[j] {
                active[j] = false;
            }
        }
        let idx: Vec<usize> = (0..k).filter(|&j| active[j]).collect();
        if idx.is_empty() {
            break;
        }
        let zs = precond(&idx.iter().map(|&j| r[j].as_slice()).collect::<Vec<_>>());
        for (j, zj) in idx.into_iter().zip(zs) {
            let rz_new = dot(&r[j], &zj);
            let beta = rz_new / rz[j];
            rz[j] = rz_new;
            for i in 0..n {
                p[j][i] = zj[i] + beta * p[j][i];
            }
        }
    }
    Ok((x, iterations))
}
