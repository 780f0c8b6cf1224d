//! Discrete coupled objective, its per-block operators and residuals.
//!
//! The two-component objective is
//!
//! ```text
//! f(u, v) = β11/2 Σ u⁴ + uᵀA1u + β22/2 Σ v⁴ + vᵀA2v + β12 Σ u²v²
//! ```
//!
//! on the product of unit spheres. Freezing all but one component leaves a
//! single-block problem `2h̃(u) + uᵀAu + Σ c u²`, described by [`Block`]; the
//! solvers only ever work with blocks, so the multi-block extension and the
//! two-component case share one code path.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Grid, SymmetricOperator};

/// Smallest magnitude accepted as a strictly positive entry by [`Block::min_ratio`].
pub const POSITIVITY_FLOOR: f64 = 1e-300;

/// Pointwise nonlinearity `h̃` of one block.
///
/// `ratio` returns `ρ` with `∇h̃(u) = ρ(u) ∘ u`.
pub trait Nonlinearity: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn value(&self, u: &[f64]) -> f64;

    fn ratio(&self, u: &[f64], out: &mut [f64]);

    /// Diagonal of the Hessian `∇²h̃(u)`.
    fn curvature_diag(&self, u: &[f64], out: &mut [f64]);

    /// False when the Hessian has off-diagonal entries.
    fn is_diagonal(&self) -> bool {
        true
    }

    /// `out = ∇²h̃(u) x`.
    fn hessian_apply(&self, u: &[f64], x: &[f64], out: &mut [f64]) {
        self.curvature_diag(u, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o *= xi;
        }
    }

    /// `h̃(u + e) - h̃(u)`; implementations should keep this accurate when
    /// `e` is small.
    fn value_change(&self, u: &[f64], e: &[f64]) -> f64 {
        let moved: Vec<f64> = u.iter().zip(e).map(|(a, b)| a + b).collect();
        self.value(&moved) - self.value(u)
    }
}

/// `h̃(u) = β/4 Σ u⁴`, the Gross–Pitaevskii self-interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartic {
    pub beta: f64,
}

impl Nonlinearity for Quartic {
    fn name(&self) -> &str {
        "quartic"
    }

    fn value(&self, u: &[f64]) -> f64 {
        0.25 * self.beta * u.iter().map(|x| x * x * x * x).sum::<f64>()
    }

    fn ratio(&self, u: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(u) {
            *o = self.beta * x * x;
        }
    }

    fn curvature_diag(&self, u: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(u) {
            *o = 3.0 * self.beta * x * x;
        }
    }

    fn value_change(&self, u: &[f64], e: &[f64]) -> f64 {
        // (u + e)⁴ - u⁴ = e(2u + e)((u + e)² + u²)
        0.25 * self.beta
            * u.iter()
                .zip(e)
                .map(|(a, d)| {
                    let b = a + d;
                    d * (2.0 * a + d) * (b * b + a * a)
                })
                .sum::<f64>()
    }
}

/// One component with all others frozen: `f_j(u) = 2h̃(u) + uᵀAu + Σ c u²`.
///
/// Then `𝒜(u) = diag(ρ(u) + c) + A` and the Jacobian of the residual
/// `𝒜(u)u - λu` is `∇²h̃(u) + A + diag(c) - λI`.
#[derive(Debug, Clone, Copy)]
pub struct Block<'a> {
    pub op: &'a SymmetricOperator,
    pub nonlinearity: &'a dyn Nonlinearity,
    pub coupling: &'a [f64],
}

/// `𝒜(u)u` with its Rayleigh quotient.
#[derive(Debug, Clone)]
pub struct BlockEval {
    pub au: Vec<f64>,
    pub rayleigh: f64,
}

impl BlockEval {
    /// `‖𝒜(u)u - (uᵀ𝒜(u)u)u‖²`.
    pub fn projected_residual_sq(&self, u: &[f64]) -> f64 {
        self.au.iter().zip(u).map(|(a, x)| (a - self.rayleigh * x).powi(2)).sum()
    }
}

impl<'a> Block<'a> {
    pub fn new(op: &'a SymmetricOperator, nonlinearity: &'a dyn Nonlinearity, coupling: &'a [f64]) -> Self {
        assert_eq!(op.size(), coupling.len());
        Self {
            op,
            nonlinearity,
            coupling,
        }
    }

    pub fn size(&self) -> usize {
        self.op.size()
    }

    pub fn half_energy(&self, u: &[f64]) -> f64 {
        let au = self.op.apply_vec(u);
        2.0 * self.nonlinearity.value(u)
            + dot(u, &au)
            + u.iter().zip(self.coupling).map(|(x, c)| c * x * x).sum::<f64>()
    }

    /// Pointwise part `ρ(u) + c` of `𝒜(u)`.
    pub fn coupled_diag(&self, u: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; u.len()];
        self.nonlinearity.ratio(u, &mut d);
        for (di, c) in d.iter_mut().zip(self.coupling) {
            *di += c;
        }
        d
    }

    /// `𝒜(u) x`.
    pub fn apply_coupled(&self, u: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = self.op.apply_vec(x);
        for ((o, d), xi) in out.iter_mut().zip(self.coupled_diag(u)).zip(x) {
            *o += d * xi;
        }
        out
    }

    pub fn eval(&self, u: &[f64]) -> BlockEval {
        let au = self.apply_coupled(u, u);
        let rayleigh = dot(u, &au);
        BlockEval { au, rayleigh }
    }

    pub fn residual(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let mut r = self.apply_coupled(u, u);
        for (ri, x) in r.iter_mut().zip(u) {
            *ri -= lambda * x;
        }
        r
    }

    /// Pointwise part of the Jacobian for diagonal nonlinearities:
    /// `diag(∇²h̃(u)) + c - λ`.
    pub fn jacobian_diag(&self, u: &[f64], lambda: f64) -> Vec<f64> {
        let mut d = vec![0.0; u.len()];
        self.nonlinearity.curvature_diag(u, &mut d);
        for (di, c) in d.iter_mut().zip(self.coupling) {
            *di += c - lambda;
        }
        d
    }

    /// `J(u, λ) x`.
    pub fn apply_jacobian(&self, u: &[f64], lambda: f64, x: &[f64]) -> Vec<f64> {
        let mut out = self.op.apply_vec(x);
        self.add_jacobian_pointwise(u, lambda, x, &mut out);
        out
    }

    /// `out += (∇²h̃(u) + diag(c) - λI) x`.
    pub(crate) fn add_jacobian_pointwise(&self, u: &[f64], lambda: f64, x: &[f64], out: &mut [f64]) {
        let mut h = vec![0.0; x.len()];
        self.nonlinearity.hessian_apply(u, x, &mut h);
        for i in 0..x.len() {
            out[i] += h[i] + (self.coupling[i] - lambda) * x[i];
        }
    }

    pub fn rayleigh(&self, u: &[f64]) -> f64 {
        self.eval(u).rayleigh
    }

    /// `min_i (𝒜(u)u)_i / u_i`.
    pub fn min_ratio(&self, u: &[f64]) -> Result<f64> {
        min_ratio_of(&self.eval(u).au, u)
    }
}

/// Componentwise minimum of `au / u`; fails unless `u` is strictly positive.
pub fn min_ratio_of(au: &[f64], u: &[f64]) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (index, (a, &x)) in au.iter().zip(u).enumerate() {
        if !(x >= POSITIVITY_FLOOR) {
            return Err(Error::NonpositiveIterate { index, value: x });
        }
        best = best.min(a / x);
    }
    Ok(best)
}

/// Data of the two-component objective.
#[derive(Debug, Clone)]
pub struct CoupledProblem {
    a1: SymmetricOperator,
    a2: SymmetricOperator,
    q1: Quartic,
    q2: Quartic,
    beta12: f64,
    rescale: [f64; 2],
    interaction_scale: f64,
}

impl CoupledProblem {
    /// Requires `β11, β22 > 0`.
    pub fn new(a1: SymmetricOperator, a2: SymmetricOperator, beta11: f64, beta22: f64, beta12: f64) -> Result<Self> {
        if !(beta11 > 0.0 && beta22 > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "self-interactions must be positive, got beta11 = {beta11}, beta22 = {beta22}"
            )));
        }
        Self::new_unchecked(a1, a2, beta11, beta22, beta12)
    }

    /// Like [`CoupledProblem::new`] but admits zero or negative interactions
    /// (linear and decoupled limits).
    pub fn new_unchecked(
        a1: SymmetricOperator,
        a2: SymmetricOperator,
        beta11: f64,
        beta22: f64,
        beta12: f64,
    ) -> Result<Self> {
        if a1.size() != a2.size() {
            return Err(Error::InvalidSpec(format!(
                "operators differ in size ({} vs {})",
                a1.size(),
                a2.size()
            )));
        }
        if ![beta11, beta22, beta12].iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidSpec("interaction coefficients must be finite".into()));
        }
        let interaction_scale = beta11.abs().max(beta22.abs()).max(beta12.abs());
        Ok(Self {
            a1,
            a2,
            q1: Quartic { beta: beta11 },
            q2: Quartic { beta: beta22 },
            beta12,
            rescale: [1.0, 1.0],
            interaction_scale,
        })
    }

    /// Amplitude factors mapping `(u, v)` back to wave functions.
    pub fn with_rescale(mut self, rescale: [f64; 2]) -> Self {
        self.rescale = rescale;
        self
    }

    /// Size of the interactions in physical units, used to pick the
    /// preconditioner shift. Defaults to the largest coefficient.
    pub fn with_interaction_scale(mut self, scale: f64) -> Self {
        self.interaction_scale = scale;
        self
    }

    pub fn a1(&self) -> &SymmetricOperator {
        &self.a1
    }

    pub fn a2(&self) -> &SymmetricOperator {
        &self.a2
    }

    pub fn beta11(&self) -> f64 {
        self.q1.beta
    }

    pub fn beta22(&self) -> f64 {
        self.q2.beta
    }

    pub fn beta12(&self) -> f64 {
        self.beta12
    }

    pub fn size(&self) -> usize {
        self.a1.size()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.a1.grid()
    }

    pub fn rescale(&self) -> [f64; 2] {
        self.rescale
    }

    pub fn interaction_scale(&self) -> f64 {
        self.interaction_scale
    }

    pub(crate) fn quartics(&self) -> [&Quartic; 2] {
        [&self.q1, &self.q2]
    }

    /// `β12 w²`, the coupling seen by one component when the other is `w`.
    pub fn coupling_field(&self, other: &[f64]) -> Vec<f64> {
        other.iter().map(|x| self.beta12 * x * x).collect()
    }

    /// Block for `u` with `v` frozen; `coupling` must be `coupling_field(v)`.
    pub fn block_u<'a>(&'a self, coupling: &'a [f64]) -> Block<'a> {
        Block::new(&self.a1, &self.q1, coupling)
    }

    /// Block for `v` with `u` frozen; `coupling` must be `coupling_field(u)`.
    pub fn block_v<'a>(&'a self, coupling: &'a [f64]) -> Block<'a> {
        Block::new(&self.a2, &self.q2, coupling)
    }
}

/// Current iterate of an alternating solver.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub blocks: Vec<Vec<f64>>,
    pub shifts: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
}

impl IterateState {
    pub fn u(&self) -> &[f64] {
        &self.blocks[0]
    }

    pub fn v(&self) -> &[f64] {
        &self.blocks[1]
    }

    pub fn lambda(&self) -> f64 {
        self.shifts[0]
    }

    pub fn mu(&self) -> f64 {
        self.shifts[1]
    }
}

pub fn energy(p: &CoupledProblem, u: &[f64], v: &[f64]) -> f64 {
    let zero = vec![0.0; u.len()];
    let cross: f64 = u.iter().zip(v).map(|(a, b)| a * a * b * b).sum();
    p.block_u(&zero).half_energy(u) + p.block_v(&zero).half_energy(v) + p.beta12 * cross
}

/// `f_v(u)`: the objective with `v` frozen, dropping `v`-only terms.
pub fn half_energy(p: &CoupledProblem, u: &[f64], v: &[f64]) -> f64 {
    let c = p.coupling_field(v);
    p.block_u(&c).half_energy(u)
}

/// `𝒜_v(u) x`.
pub fn apply_coupled(p: &CoupledProblem, u: &[f64], v: &[f64], x: &[f64]) -> Vec<f64> {
    let c = p.coupling_field(v);
    p.block_u(&c).apply_coupled(u, x)
}

/// `r_v(u, λ) = 𝒜_v(u)u - λu`.
pub fn residual(p: &CoupledProblem, u: &[f64], v: &[f64], lambda: f64) -> Vec<f64> {
    let c = p.coupling_field(v);
    p.block_u(&c).residual(u, lambda)
}

/// `J_v(u, λ) x` with `J = 3β11 diag(u²) + A1 + β12 diag(v²) - λI`.
pub fn apply_jacobian(p: &CoupledProblem, u: &[f64], v: &[f64], lambda: f64, x: &[f64]) -> Vec<f64> {
    let c = p.coupling_field(v);
    p.block_u(&c).apply_jacobian(u, lambda, x)
}

pub fn rayleigh(p: &CoupledProblem, u: &[f64], v: &[f64]) -> f64 {
    let c = p.coupling_field(v);
    p.block_u(&c).rayleigh(u)
}

pub fn min_ratio(p: &CoupledProblem, u: &[f64], v: &[f64]) -> Result<f64> {
    let c = p.coupling_field(v);
    p.block_u(&c).min_ratio(u)
}

/// Combined projected residual of both components.
pub fn grad_norm(p: &CoupledProblem, u: &[f64], v: &[f64]) -> f64 {
    let cu = p.coupling_field(v);
    let cv = p.coupling_field(u);
    let gu = p.block_u(&cu).eval(u).projected_residual_sq(u);
    let gv = p.block_v(&cv).eval(v).projected_residual_sq(v);
    (gu + gv).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `x / ‖x‖`.
pub fn normalized(x: &[f64]) -> Vec<f64> {
    let n = norm(x);
    x.iter().map(|a| a / n).collect()
}
