//! Nonlinearities for the multi-block solver.

use crate::error::{Error, Result};
use crate::model::{Nonlinearity, Quartic};

pub fn plugin_quartic(beta: f64) -> Result<Quartic> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidSpec(format!("quartic coefficient must be positive, got {beta}")));
    }
    Ok(Quartic { beta })
}

/// `h̃(u) = Σ (u_i² - ln(1 + u_i²/a_i))`, the saturable nonlinearity.
#[derive(Debug, Clone, PartialEq)]
pub struct Saturable {
    a: Vec<f64>,
}

pub fn plugin_saturable(a: Vec<f64>) -> Result<Saturable> {
    if a.is_empty() || a.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidSpec("saturation parameters must be positive".into()));
    }
    Ok(Saturable { a })
}

impl Saturable {
    pub fn parameters(&self) -> &[f64] {
        &self.a
    }
}

impl Nonlinearity for Saturable {
    fn name(&self) -> &str {
        "saturable"
    }

    fn value(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.a).map(|(x, a)| x * x - (x * x / a).ln_1p()).sum()
    }

    fn ratio(&self, u: &[f64], out: &mut [f64]) {
        for ((o, x), a) in out.iter_mut().zip(u).zip(&self.a) {
            *o = 2.0 * (1.0 - 1.0 / (a + x * x));
        }
    }

    fn curvature_diag(&self, u: &[f64], out: &mut [f64]) {
        for ((o, x), a) in out.iter_mut().zip(u).zip(&self.a) {
            let s = a + x * x;
            *o = 2.0 - 2.0 * (a - x * x) / (s * s);
        }
    }

    fn value_change(&self, u: &[f64], e: &[f64]) -> f64 {
        u.iter()
            .zip(e)
            .zip(&self.a)
            .map(|((x, d), a)| {
                let t = d * (2.0 * x + d);
                t - (t / (a + x * x)).ln_1p()
            })
            .sum()
    }
}

/// `h̃(u) = (u²)ᵀ M u²` for a symmetric nonnegative matrix `M`.
///
/// The gradient is `4 (M u²) ∘ u`, so `ρ = 4 M u²`; the Hessian has
/// off-diagonal entries `8 u_i M_ik u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedGpe {
    n: usize,
    m: Vec<f64>,
    diagonal: bool,
}

pub fn plugin_modified_gpe(rows: &[Vec<f64>]) -> Result<ModifiedGpe> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidSpec("interaction matrix must be square and nonempty".into()));
    }
    let m: Vec<f64> = rows.iter().flatten().copied().collect();
    for i in 0..n {
        for k in 0..n {
            let a = m[i * n + k];
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidSpec("interaction matrix must be nonnegative".into()));
            }
            if (a - m[k * n + i]).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::InvalidSpec("interaction matrix must be symmetric".into()));
            }
        }
    }
    let diagonal = (0..n).all(|i| (0..n).all(|k| i == k || m[i * n + k] == 0.0));
    Ok(ModifiedGpe { n, m, diagonal })
}

impl ModifiedGpe {
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.m[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn squares(u: &[f64]) -> Vec<f64> {
        u.iter().map(|x| x * x).collect()
    }
}

impl Nonlinearity for ModifiedGpe {
    fn name(&self) -> &str {
        "modified_gpe"
    }

    fn value(&self, u: &[f64]) -> f64 {
        let s = Self::squares(u);
        s.iter().zip(self.mul(&s)).map(|(a, b)| a * b).sum()
    }

    fn ratio(&self, u: &[f64], out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(self.mul(&Self::squares(u))) {
            *o = 4.0 * m;
        }
    }

    fn curvature_diag(&self, u: &[f64], out: &mut [f64]) {
        let ms = self.mul(&Self::squares(u));
        for i in 0..self.n {
            out[i] = 4.0 * ms[i] + 8.0 * self.m[i * self.n + i] * u[i] * u[i];
        }
    }

    fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    fn hessian_apply(&self, u: &[f64], x: &[f64], out: &mut [f64]) {
        let ms = self.mul(&Self::squares(u));
        let ux: Vec<f64> = u.iter().zip(x).map(|(a, b)| a * b).collect();
        let mux = self.mul(&ux);
        for i in 0..self.n {
            out[i] = 4.0 * ms[i] * x[i] + 8.0 * u[i] * mux[i];
        }
    }

    fn value_change(&self, u: &[f64], e: &[f64]) -> f64 {
        let s = Self::squares(u);
        let t: Vec<f64> = u.iter().zip(e).map(|(x, d)| d * (2.0 * x + d)).collect();
        let mt = self.mul(&t);
        s.iter().zip(&t).zip(&mt).map(|((a, b), c)| (2.0 * a + b) * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(nl: &dyn Nonlinearity, u: &[f64]) -> Vec<f64> {
        let eps = 1e-6;
        (0..u.len())
            .map(|i| {
                let mut up = u.to_vec();
                let mut dn = u.to_vec();
                up[i] += eps;
                dn[i] -= eps;
                (nl.value(&up) - nl.value(&dn)) / (2.0 * eps)
            })
            .collect()
    }

    fn check_consistency(nl: &dyn Nonlinearity, u: &[f64]) {
        let n = u.len();
        let grad = fd_gradient(nl, u);
        let mut rho = vec![0.0; n];
        nl.ratio(u, &mut rho);
        for i in 0..n {
            let g = rho[i] * u[i];
            assert!((g - grad[i]).abs() <= 1e-6 * (1.0 + g.abs()), "{} gradient {i}", nl.name());
        }
        // Hessian columns by differencing the analytic gradient
        let eps = 1e-6;
        let mut diag = vec![0.0; n];
        nl.curvature_diag(u, &mut diag);
        for k in 0..n {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[k] += eps;
            dn[k] -= eps;
            let (mut rp, mut rd) = (vec![0.0; n], vec![0.0; n]);
            nl.ratio(&up, &mut rp);
            nl.ratio(&dn, &mut rd);
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let mut col = vec![0.0; n];
            nl.hessian_apply(u, &e, &mut col);
            for i in 0..n {
                let fd = (rp[i] * up[i] - rd[i] * dn[i]) / (2.0 * eps);
                assert!((fd - col[i]).abs() <= 1e-6 * (1.0 + fd.abs()), "{} hessian ({i},{k})", nl.name());
            }
            assert!((col[k] - diag[k]).abs() <= 1e-12 * (1.0 + diag[k].abs()));
        }
        let e: Vec<f64> = (0..n).map(|i| 1e-3 * (i as f64 + 1.0)).collect();
        let moved: Vec<f64> = u.iter().zip(&e).map(|(a, b)| a + b).collect();
        let direct = nl.value(&moved) - nl.value(u);
        assert!((nl.value_change(u, &e) - direct).abs() < 1e-12);
    }

    #[test]
    fn quartic_example() {
        let q = plugin_quartic(2.0).unwrap();
        assert_eq!(q.value(&[1.0, 1.0]), 1.0);
        let mut rho = [0.0; 2];
        q.ratio(&[1.0, 1.0], &mut rho);
        assert_eq!(rho, [2.0, 2.0]);
        check_consistency(&q, &[0.3, 0.7, 0.2]);
        assert!(plugin_quartic(0.0).is_err());
    }

    #[test]
    fn saturable_example() {
        let s = plugin_saturable(vec![1.0]).unwrap();
        assert!((s.value(&[1.0]) - (1.0 - 2f64.ln())).abs() < 1e-15);
        let mut rho = [0.0];
        s.ratio(&[1.0], &mut rho);
        assert!((rho[0] - 1.0).abs() < 1e-15);
        let s = plugin_saturable(vec![1.0, 0.5, 2.0]).unwrap();
        check_consistency(&s, &[0.4, 0.9, 0.1]);
        assert!(plugin_saturable(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn modified_gpe_gradient_factor_four() {
        let identity = plugin_modified_gpe(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!(identity.is_diagonal());
        let u = [0.5, 0.3, 0.8];
        let grad = fd_gradient(&identity, &u);
        for i in 0..3 {
            // ∇h̃ = 4 (A u²) ∘ u; the factor-1 convention would give u³
            assert!((grad[i] - 4.0 * u[i].powi(3)).abs() < 1e-8);
        }
        check_consistency(&identity, &u);
        let full = plugin_modified_gpe(&[vec![1.0, 0.5, 0.0], vec![0.5, 2.0, 0.25], vec![0.0, 0.25, 1.0]]).unwrap();
        assert!(!full.is_diagonal());
        check_consistency(&full, &u);
        assert!(plugin_modified_gpe(&[vec![1.0, -0.5], vec![-0.5, 1.0]]).is_err());
        assert!(plugin_modified_gpe(&[vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
    }
}
