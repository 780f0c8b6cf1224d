//! Full single-block solves used by alternating minimization.

use super::step::{half_step, m_matrix_path};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::linsolve::{solve_block_bordered, LinearSolverConfig};
use crate::model::{min_ratio_of, norm, Block, CoupledProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolve {
    pub u: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub linear_iterations: usize,
}

/// Newton–Noda iteration for one block with the others frozen.
///
/// Each step uses the Noda shift `λ = min(𝒜(u)u / u)` and halves `θ` until
/// `𝒜(û)û - λû > 0`, so the shifts increase monotonically towards the
/// Perron eigenvalue. Stops once `‖𝒜(u)u - (uᵀ𝒜(u)u)u‖ ≤ inner_nni_tol`.
pub fn nni_block(block: &Block<'_>, u0: &[f64], cfg: &SolverConfig, lin: &LinearSolverConfig) -> Result<InnerSolve> {
    let mut u = u0.to_vec();
    let mut linear_iterations = 0;
    for iteration in 0..=cfg.inner_max_iter {
        let eval = block.eval(&u);
        let residual = eval.projected_residual_sq(&u).sqrt();
        if residual <= cfg.inner_nni_tol {
            return Ok(InnerSolve {
                u,
                lambda: eval.rayleigh,
                iterations: iteration,
                linear_iterations,
            });
        }
        if iteration == cfg.inner_max_iter {
            return Err(Error::NoConvergence { iterations: iteration, residual });
        }
        let lambda = min_ratio_of(&eval.au, &u)?;
        let r: Vec<f64> = eval.au.iter().zip(&u).map(|(a, x)| a - lambda * x).collect();
        let sol = solve_block_bordered(block, &u, lambda, &r, lin)?;
        linear_iterations += sol.linear_iterations;
        let mut theta = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let w: Vec<f64> = u.iter().zip(&sol.delta_u).map(|(a, d)| a + theta * d).collect();
            let nw = norm(&w);
            let next: Vec<f64> = w.iter().map(|x| x / nw).collect();
            let h = block.residual(&next, lambda);
            if next.iter().all(|&x| x > 0.0) && h.iter().all(|&x| x > 0.0) {
                accepted = Some(next);
                break;
            }
            theta *= 0.5;
        }
        u = accepted.ok_or(Error::LineSearchStall {
            halvings: cfg.max_halvings,
        })?;
    }
    unreachable!("loop returns on its last iteration")
}

/// Repeated energy-descent half-steps until the projected residual drops
/// below `inner_nni_tol`; used where the Noda positivity test does not apply.
pub fn descent_block(block: &Block<'_>, u0: &[f64], cfg: &SolverConfig, lin: &LinearSolverConfig) -> Result<InnerSolve> {
    let mut u = u0.to_vec();
    let mut linear_iterations = 0;
    for iteration in 0..=cfg.inner_max_iter {
        let eval = block.eval(&u);
        let residual = eval.projected_residual_sq(&u).sqrt();
        if residual <= cfg.inner_nni_tol {
            return Ok(InnerSolve {
                u,
                lambda: eval.rayleigh,
                iterations: iteration,
                linear_iterations,
            });
        }
        if iteration == cfg.inner_max_iter {
            return Err(Error::NoConvergence { iterations: iteration, residual });
        }
        let info = half_step(block, &mut u, cfg, lin)?;
        linear_iterations += info.linear_iterations;
        if info.skipped {
            return Ok(InnerSolve {
                lambda: block.rayleigh(&u),
                u,
                iterations: iteration + 1,
                linear_iterations,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Full subproblem solve: Newton–Noda on M-matrix blocks, descent steps
/// otherwise.
pub(crate) fn inner_solve(block: &Block<'_>, u0: &[f64], cfg: &SolverConfig, lin: &LinearSolverConfig) -> Result<InnerSolve> {
    if m_matrix_path(block) && u0.iter().all(|&x| x > 0.0) {
        nni_block(block, u0, cfg, lin)
    } else {
        descent_block(block, u0, cfg, lin)
    }
}

/// Solves the `u`-subproblem of `p` with `v` frozen, starting from `u0`.
pub fn nni(p: &CoupledProblem, v: &[f64], u0: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, f64)> {
    let lin = cfg.linear.resolved(p.interaction_scale());
    let c = p.coupling_field(v);
    let sol = nni_block(&p.block_u(&c), u0, cfg, &lin)?;
    Ok((sol.u, sol.lambda))
}
