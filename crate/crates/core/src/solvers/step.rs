//! One-step modified Newton–Noda update of a single block.

use super::lanczos::lanczos_min_eig;
use super::{SolverConfig, Tau2};
use crate::error::{Error, Result};
use crate::linsolve::{solve_block_bordered, LinearSolverConfig};
use crate::model::{dot, min_ratio_of, norm, Block, BlockEval};

/// Lanczos steps used to estimate `λ_min(J(u, 0))` for the automatic upper shift.
pub const LANCZOS_STEPS: usize = 10;
/// Fraction of the estimated `λ_min(J(u, 0))` used as automatic upper shift.
pub const AUTO_TAU2_FRACTION: f64 = 0.95;
/// Steps shorter than this are treated as zero.
pub const NEGLIGIBLE_STEP: f64 = 1e-14;

/// Diagnostics of one half-step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HalfStep {
    pub shift: f64,
    pub delta: f64,
    pub theta: f64,
    pub halvings: usize,
    /// `|uᵀΔu|`.
    pub tangency: f64,
    pub step_norm: f64,
    /// Energy change of the accepted step (negative).
    pub decrease: f64,
    pub min_entry: f64,
    /// True when `Δu` vanished and the block was left unchanged.
    pub skipped: bool,
    /// Shift reductions after an indefinite Jacobian.
    pub retries: usize,
    pub linear_iterations: usize,
}

/// True when the block admits the positivity-preserving shift `min_ratio`.
pub fn m_matrix_path(block: &Block<'_>) -> bool {
    block.op.is_m_matrix() && block.nonlinearity.is_diagonal()
}

/// Upper end of the shift window for this block.
pub fn effective_tau2(block: &Block<'_>, u: &[f64], cfg: &SolverConfig) -> f64 {
    match cfg.tau2 {
        Tau2::Fixed(t) => t,
        Tau2::Auto => {
            let estimate = lanczos_min_eig(|x| block.apply_jacobian(u, 0.0, x), u, LANCZOS_STEPS);
            estimate - (1.0 - AUTO_TAU2_FRACTION) * estimate.abs()
        }
    }
}

/// Shift for the Newton–Noda step.
///
/// On M-matrix blocks `λ = max(τ1, min_ratio)` (falling back to `τ1` when
/// `u` is not strictly positive), capped by an explicit `τ2`. Otherwise the
/// Rayleigh quotient is clamped into `[τ1, τ2]`.
pub fn select_block_shift(block: &Block<'_>, u: &[f64], eval: &BlockEval, cfg: &SolverConfig) -> f64 {
    if m_matrix_path(block) {
        let lambda = match min_ratio_of(&eval.au, u) {
            Ok(m) => cfg.tau1.max(m),
            Err(_) => cfg.tau1,
        };
        match cfg.tau2 {
            Tau2::Fixed(t) => lambda.min(t),
            Tau2::Auto => lambda,
        }
    } else {
        let tau2 = effective_tau2(block, u, cfg);
        eval.rayleigh.min(tau2).max(cfg.tau1)
    }
}

/// `f(û) - f(u)` for `û = (u + θΔu)/‖u + θΔu‖`, evaluated without
/// cancellation between the two energies.
///
/// `u` is taken to be exactly unit: its rounding-level norm defect would
/// otherwise swamp the decrease of very short steps.
///
/// `au` and `ad` are `Au` and `AΔu` for the block's linear operator.
pub(crate) fn energy_change(
    block: &Block<'_>,
    u: &[f64],
    delta_u: &[f64],
    au: &[f64],
    ad: &[f64],
    theta: f64,
) -> (f64, Vec<f64>) {
    let n = u.len();
    let s = 2.0 * theta * dot(u, delta_u) + theta * theta * dot(delta_u, delta_u);
    let nw = (1.0 + s).sqrt();
    let nwm1 = s / (nw + 1.0);
    let mut e = vec![0.0; n];
    let mut ae = vec![0.0; n];
    let mut next = vec![0.0; n];
    for i in 0..n {
        e[i] = (theta * delta_u[i] - nwm1 * u[i]) / nw;
        ae[i] = (theta * ad[i] - nwm1 * au[i]) / nw;
        next[i] = (u[i] + theta * delta_u[i]) / nw;
    }
    let mut quad = 0.0;
    for i in 0..n {
        quad += e[i] * (2.0 * au[i] + ae[i]) + block.coupling[i] * e[i] * (2.0 * u[i] + e[i]);
    }
    (2.0 * block.nonlinearity.value_change(u, &e) + quad, next)
}

/// `d(θ)` for a single step length.
pub fn step_energy_change(block: &Block<'_>, u: &[f64], delta_u: &[f64], theta: f64) -> f64 {
    let (au, ad) = linear_images(block, u, delta_u);
    energy_change(block, u, delta_u, &au, &ad, theta).0
}

fn linear_images(block: &Block<'_>, u: &[f64], delta_u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let (mut au, mut ad) = (vec![0.0; n], vec![0.0; n]);
    block.op.apply_pair(u, delta_u, &mut au, &mut ad);
    (au, ad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearch {
    pub theta: f64,
    pub u_next: Vec<f64>,
    pub halvings: usize,
    pub decrease: f64,
}

/// Halves `θ` from 1 until the block energy strictly decreases.
pub fn block_line_search(block: &Block<'_>, u: &[f64], delta_u: &[f64], max_halvings: usize) -> Result<LineSearch> {
    let step = norm(delta_u);
    let tangency = dot(u, delta_u).abs();
    if tangency > 1e-6 * step.max(1.0) {
        return Err(Error::InvalidSpec(format!(
            "line search needs a tangent step, got |u·Δu| = {tangency:e}"
        )));
    }
    let (au, ad) = linear_images(block, u, delta_u);
    let mut theta = 1.0;
    for halvings in 0..=max_halvings {
        let (d, next) = energy_change(block, u, delta_u, &au, &ad, theta);
        if d < 0.0 {
            return Ok(LineSearch {
                theta,
                u_next: next,
                halvings,
                decrease: d,
            });
        }
        theta *= 0.5;
    }
    Err(Error::LineSearchStall { halvings: max_halvings })
}

/// Shift selection, bordered solve and line search for one block; `u` is
/// updated in place.
pub(crate) fn half_step(
    block: &Block<'_>,
    u: &mut Vec<f64>,
    cfg: &SolverConfig,
    lin: &LinearSolverConfig,
) -> Result<HalfStep> {
    let eval = block.eval(u);
    let tau1 = cfg.tau1;
    let mut lambda = select_block_shift(block, u, &eval, cfg);
    let mut retries = 0;
    let sol = loop {
        let r: Vec<f64> = eval.au.iter().zip(u.iter()).map(|(a, x)| a - lambda * x).collect();
        match solve_block_bordered(block, u, lambda, &r, lin) {
            Ok(sol) => break sol,
            Err(Error::IndefiniteJacobian { .. } | Error::DegenerateBorder { .. })
                if retries < cfg.shift_retries && lambda > tau1 =>
            {
                lambda = tau1 + 0.5 * (lambda - tau1);
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let step_norm = norm(&sol.delta_u);
    let mut info = HalfStep {
        shift: lambda,
        delta: sol.delta,
        tangency: dot(u, &sol.delta_u).abs(),
        step_norm,
        retries,
        linear_iterations: sol.linear_iterations,
        ..HalfStep::default()
    };
    if step_norm <= NEGLIGIBLE_STEP {
        info.skipped = true;
        info.min_entry = u.iter().cloned().fold(f64::INFINITY, f64::min);
        return Ok(info);
    }
    let ls = block_line_search(block, u, &sol.delta_u, cfg.max_halvings)?;
    info.theta = ls.theta;
    info.halvings = ls.halvings;
    info.decrease = ls.decrease;
    info.min_entry = ls.u_next.iter().cloned().fold(f64::INFINITY, f64::min);
    if m_matrix_path(block) && !(info.min_entry > 0.0) {
        let index = ls.u_next.iter().position(|&x| !(x > 0.0)).unwrap_or(0);
        return Err(Error::NonpositiveIterate {
            index,
            value: ls.u_next[index],
        });
    }
    *u = ls.u_next;
    Ok(info)
}
