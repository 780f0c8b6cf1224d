use crate::error::{Error, Result};

/// `LDLᵀ` factorization of a symmetric tridiagonal matrix with constant
/// off-diagonal `off`. Fails on a nonpositive pivot, so success certifies
/// positive definiteness.
#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    pivots: Vec<f64>,
    off: f64,
}

impl TridiagonalFactor {
    pub fn new(diag: &[f64], off: f64) -> Result<Self> {
        let mut pivots = Vec::with_capacity(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            let p = if i == 0 { d } else { d - off * off / pivots[i - 1] };
            if !(p > 0.0) {
                return Err(Error::IndefiniteJacobian { curvature: p });
            }
            pivots.push(p);
        }
        Ok(Self { pivots, off })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut y = b.to_vec();
        for i in 1..n {
            y[i] -= self.off / self.pivots[i - 1] * y[i - 1];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let next = if i + 1 < n { self.off * x[i + 1] } else { 0.0 };
            x[i] = (y[i] - next) / self.pivots[i];
        }
        x
    }
}
