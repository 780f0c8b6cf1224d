//! Jacobian and bordered Newton solves.
//!
//! The bordered system
//!
//! ```text
//! [ J   -u ] [Δu]   [-r]
//! [ -uᵀ  0 ] [δ ] = [ 0]
//! ```
//!
//! is reduced to two solves with the same Jacobian, `J y1 = u` and
//! `J y2 = r`, followed by `δ = uᵀy2 / uᵀy1` and `Δu = δ y1 - y2`.
//! One-dimensional finite-difference Jacobians are factored directly; all
//! other grid operators go through PCG with the Fourier preconditioner
//! `(cI - Δ)⁻¹`, running both solves in lockstep.

mod pcg;
mod tridiag;

pub use tridiag::TridiagonalFactor;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{FourierTransform, Grid, OperatorStructure};
use crate::model::{dot, Block, CoupledProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Direct factorization when the operator allows it, PCG otherwise.
    Auto,
    DirectTridiag,
    Pcg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolverConfig {
    pub backend: Backend,
    pub pcg_tol: f64,
    pub pcg_maxit: usize,
    /// Preconditioner shift `c`; chosen from the interaction strength when unset.
    pub precond_shift: Option<f64>,
}

impl Default for LinearSolverConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            pcg_tol: 1e-8,
            pcg_maxit: 500,
            precond_shift: None,
        }
    }
}

/// Interaction strength above which the strong-coupling shift is used.
pub const STRONG_INTERACTION: f64 = 50.0;

impl LinearSolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pcg_tol > 0.0 && self.pcg_tol < 1.0) {
            return Err(Error::InvalidSpec(format!("pcg_tol must lie in (0, 1), got {}", self.pcg_tol)));
        }
        if self.pcg_maxit == 0 {
            return Err(Error::InvalidSpec("pcg_maxit must be positive".into()));
        }
        if let Some(c) = self.precond_shift {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidSpec(format!("precond_shift must be positive, got {c}")));
            }
        }
        Ok(())
    }

    /// `c = 30` for strong interactions, `c = 3` otherwise, unless set.
    pub fn shift_for(&self, interaction_scale: f64) -> f64 {
        self.precond_shift
            .unwrap_or(if interaction_scale > STRONG_INTERACTION { 30.0 } else { 3.0 })
    }

    /// Copy with the preconditioner shift fixed.
    pub fn resolved(&self, interaction_scale: f64) -> Self {
        Self {
            precond_shift: Some(self.shift_for(interaction_scale)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorderedSolution {
    pub delta_u: Vec<f64>,
    pub delta: f64,
    /// `uᵀJ⁻¹u`, positive whenever `J` is positive definite.
    pub border: f64,
    pub linear_iterations: usize,
}

/// Solves `J(u, λ) y = b` for each right-hand side in `rhs`.
///
/// Returns the solutions and the number of PCG iterations (0 for direct
/// solves).
pub fn solve_block_jacobian(
    block: &Block<'_>,
    u: &[f64],
    lambda: f64,
    rhs: &[&[f64]],
    cfg: &LinearSolverConfig,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let op = block.op;
    let diagonal = block.nonlinearity.is_diagonal();
    let direct_tridiag = diagonal && op.tridiagonal().is_some();
    match cfg.backend {
        Backend::DirectTridiag if !direct_tridiag => Err(Error::InvalidSpec(
            "direct tridiagonal backend needs a 1D finite-difference operator".into(),
        )),
        Backend::DirectTridiag | Backend::Auto if direct_tridiag => {
            let (mut diag, off) = op.tridiagonal().expect("checked");
            for (d, w) in diag.iter_mut().zip(block.jacobian_diag(u, lambda)) {
                *d += w;
            }
            let factor = TridiagonalFactor::new(&diag, off)?;
            Ok((rhs.iter().map(|b| factor.solve(b)).collect(), 0))
        }
        Backend::Auto if op.structure() == OperatorStructure::Dense => {
            Ok((dense_solve(block, u, lambda, rhs)?, 0))
        }
        _ => pcg_solve(block, u, lambda, rhs, cfg),
    }
}

fn dense_solve(block: &Block<'_>, u: &[f64], lambda: f64, rhs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
    let n = block.size();
    let mut e = vec![0.0; n];
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        e[j] = 1.0;
        cols.push(block.apply_jacobian(u, lambda, &e));
        e[j] = 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (cols[j][i] + cols[i][j]));
    let chol = Cholesky::new(m.clone()).ok_or_else(|| Error::IndefiniteJacobian {
        curvature: m.symmetric_eigenvalues().min(),
    })?;
    Ok(rhs
        .iter()
        .map(|b| chol.solve(&DVector::from_column_slice(b)).as_slice().to_vec())
        .collect())
}

/// `(cI - Δ)⁻¹` on the periodic grid of an operator.
struct FourierPreconditioner<'a> {
    transform: &'a FourierTransform,
    inverse_symbol: Vec<f64>,
}

impl<'a> FourierPreconditioner<'a> {
    fn new(transform: &'a FourierTransform, lengths: &[f64], c: f64) -> Self {
        let inverse_symbol = transform.laplacian_symbol(lengths).into_iter().map(|k2| 1.0 / (c + k2)).collect();
        Self {
            transform,
            inverse_symbol,
        }
    }

    fn apply_batch(&self, xs: &[&[f64]]) -> Vec<Vec<f64>> {
        let n = self.transform.len();
        match xs {
            [a, b] => {
                let (mut o1, mut o2) = (vec![0.0; n], vec![0.0; n]);
                self.transform.apply_multiplier_pair(a, b, &self.inverse_symbol, &mut o1, &mut o2);
                vec![o1, o2]
            }
            _ => xs
                .iter()
                .map(|x| {
                    let mut o = vec![0.0; n];
                    self.transform.apply_multiplier(x, &self.inverse_symbol, &mut o);
                    o
                })
                .collect(),
        }
    }
}

fn pcg_solve(
    block: &Block<'_>,
    u: &[f64],
    lambda: f64,
    rhs: &[&[f64]],
    cfg: &LinearSolverConfig,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let op = block.op;
    let n = op.size();
    let pointwise = block.nonlinearity.is_diagonal().then(|| block.jacobian_diag(u, lambda));
    let apply = |xs: &[&[f64]]| -> Vec<Vec<f64>> {
        let mut outs = vec![vec![0.0; n]; xs.len()];
        match (xs, outs.as_mut_slice()) {
            ([a, b], [o1, o2]) => op.apply_pair(a, b, o1, o2),
            _ => {
                for (x, o) in xs.iter().zip(outs.iter_mut()) {
                    op.apply(x, o);
                }
            }
        }
        for (x, o) in xs.iter().zip(outs.iter_mut()) {
            match &pointwise {
                Some(w) => {
                    for i in 0..n {
                        o[i] += w[i] * x[i];
                    }
                }
                None => block.add_jacobian_pointwise(u, lambda, x, o),
            }
        }
        outs
    };
    let c = cfg.precond_shift.unwrap_or(3.0);
    match (op.fourier(), op.periodic_extent()) {
        (Some(transform), Some((_, lengths))) => {
            let pre = FourierPreconditioner::new(transform, &lengths, c);
            pcg::pcg_batch(apply, |xs| pre.apply_batch(xs), rhs, cfg.pcg_tol, cfg.pcg_maxit)
        }
        _ => {
            let mut jd = op.diagonal();
            let mut hd = vec![0.0; n];
            block.nonlinearity.curvature_diag(u, &mut hd);
            for i in 0..n {
                jd[i] += hd[i] + block.coupling[i] - lambda;
            }
            let jacobi = |xs: &[&[f64]]| -> Vec<Vec<f64>> {
                xs.iter()
                    .map(|x| x.iter().zip(&jd).map(|(a, d)| if *d > 0.0 { a / d } else { *a }).collect())
                    .collect()
            };
            pcg::pcg_batch(apply, jacobi, rhs, cfg.pcg_tol, cfg.pcg_maxit)
        }
    }
}

/// Bordered Newton solve for one block given its residual `r = 𝒜(u)u - λu`.
pub fn solve_block_bordered(
    block: &Block<'_>,
    u: &[f64],
    lambda: f64,
    r: &[f64],
    cfg: &LinearSolverConfig,
) -> Result<BorderedSolution> {
    let (ys, linear_iterations) = solve_block_jacobian(block, u, lambda, &[u, r], cfg)?;
    let border = dot(u, &ys[0]);
    if !(border > 0.0) {
        return Err(Error::DegenerateBorder { value: border });
    }
    let delta = dot(u, &ys[1]) / border;
    let delta_u = ys[0].iter().zip(&ys[1]).map(|(y1, y2)| delta * y1 - y2).collect();
    Ok(BorderedSolution {
        delta_u,
        delta,
        border,
        linear_iterations,
    })
}

/// Solves `J_v(u, λ) y = b`.
pub fn solve_jacobian(
    p: &CoupledProblem,
    u: &[f64],
    v: &[f64],
    lambda: f64,
    b: &[f64],
    cfg: &LinearSolverConfig,
) -> Result<Vec<f64>> {
    let c = p.coupling_field(v);
    let (mut ys, _) = solve_block_jacobian(&p.block_u(&c), u, lambda, &[b], cfg)?;
    Ok(ys.remove(0))
}

/// Newton correction `(Δu, δ)` of the `u`-component.
pub fn solve_bordered(
    p: &CoupledProblem,
    u: &[f64],
    v: &[f64],
    lambda: f64,
    cfg: &LinearSolverConfig,
) -> Result<BorderedSolution> {
    let c = p.coupling_field(v);
    let block = p.block_u(&c);
    let r = block.residual(u, lambda);
    solve_block_bordered(&block, u, lambda, &r, cfg)
}

/// Applies `(cI - Δ)⁻¹` on the periodic box spanned by the grid nodes.
pub fn precondition(b: &[f64], grid: &Grid, c: f64) -> Vec<f64> {
    let transform = FourierTransform::new(&grid.shape());
    let pre = FourierPreconditioner::new(&transform, &grid.periodic_lengths(), c);
    pre.apply_batch(&[b]).remove(0)
}
