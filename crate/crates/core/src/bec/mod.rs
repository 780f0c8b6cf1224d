//! Physical condensate specifications and their discrete problems.
//!
//! A spin-1/2 condensate with mass fraction `α` in the first component is
//! discretized with unit vectors `u = √(h^d/α) φ1`, `v = √(h^d/(1-α)) φ2`,
//! which turns the truncated energy into the discrete objective with
//!
//! ```text
//! A1 = α A,  A2 = (1-α) A,
//! β̃11 = β11 α²/h^d,  β̃22 = β22 (1-α)²/h^d,  β̃12 = β12 α(1-α)/h^d.
//! ```
//!
//! Spin-1 (antiferromagnetic) and spin-2 condensates without Zeeman terms
//! reduce to this form.

mod plugins;

pub use plugins::{plugin_modified_gpe, plugin_quartic, plugin_saturable, ModifiedGpe, Saturable};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, PotentialSpec, Scheme, SymmetricOperator};
use crate::model::{CoupledProblem, IterateState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    SpinHalf {
        beta11: f64,
        beta22: f64,
        beta12: f64,
        alpha: f64,
    },
    Spin1 {
        beta0: f64,
        beta1: f64,
        magnetization: f64,
    },
    Spin2 {
        beta0: f64,
        beta1: f64,
        beta2: f64,
        magnetization: f64,
    },
}

/// Effective two-component parameters in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoComponent {
    pub beta11: f64,
    pub beta22: f64,
    pub beta12: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct BecSpec {
    pub family: Family,
    pub domain: Domain,
    pub counts: Vec<usize>,
    pub scheme: Scheme,
    pub potential: PotentialSpec,
    /// Linear and quadratic Zeeman coefficients `(p, q)`; must vanish for
    /// the spin reductions.
    pub zeeman: (f64, f64),
}

/// `(β0, β1, M) ↦ (β0+β1, β0+β1, β0-β1, (1+M)/2)`.
pub fn reduce_spin1(beta0: f64, beta1: f64, magnetization: f64) -> Result<TwoComponent> {
    if !(beta1 > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "spin-1 reduction needs beta1 > 0 (antiferromagnetic), got {beta1}"
        )));
    }
    if !(beta0 > beta1) {
        return Err(Error::InvalidSpec(format!(
            "spin-1 reduction needs beta0 > beta1 so that beta12 > 0, got beta0 = {beta0}, beta1 = {beta1}"
        )));
    }
    if !(magnetization > -1.0 && magnetization < 1.0) {
        return Err(Error::InvalidSpec(format!("spin-1 magnetization must lie in (-1, 1), got {magnetization}")));
    }
    Ok(TwoComponent {
        beta11: beta0 + beta1,
        beta22: beta0 + beta1,
        beta12: beta0 - beta1,
        alpha: (1.0 + magnetization) / 2.0,
    })
}

/// `(β0, β1, β2, M) ↦ (β0+4β1, β0+4β1, β0-4β1+2β2/5, (2+M)/4)`.
pub fn reduce_spin2(beta0: f64, beta1: f64, beta2: f64, magnetization: f64) -> Result<TwoComponent> {
    if !(beta2 < 0.0) {
        return Err(Error::InvalidSpec(format!("spin-2 reduction needs beta2 < 0, got {beta2}")));
    }
    if !(beta1 > beta2 / 20.0) {
        return Err(Error::InvalidSpec(format!(
            "spin-2 reduction needs beta1 > beta2/20, got beta1 = {beta1}, beta2 = {beta2}"
        )));
    }
    if !(magnetization > -2.0 && magnetization < 2.0) {
        return Err(Error::InvalidSpec(format!("spin-2 magnetization must lie in (-2, 2), got {magnetization}")));
    }
    let reduced = TwoComponent {
        beta11: beta0 + 4.0 * beta1,
        beta22: beta0 + 4.0 * beta1,
        beta12: beta0 - 4.0 * beta1 + 0.4 * beta2,
        alpha: (2.0 + magnetization) / 4.0,
    };
    if !(reduced.beta12 > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "spin-2 reduction gives beta12 = {} <= 0",
            reduced.beta12
        )));
    }
    if !(reduced.beta11 > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "spin-2 reduction gives beta11 = {} <= 0",
            reduced.beta11
        )));
    }
    Ok(reduced)
}

impl BecSpec {
    /// Two-component parameters, applying the spin reductions.
    pub fn two_component(&self) -> Result<TwoComponent> {
        let reduced = match self.family {
            Family::SpinHalf {
                beta11,
                beta22,
                beta12,
                alpha,
            } => {
                if !(beta11 > 0.0 && beta22 > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "beta11 and beta22 must be positive, got {beta11} and {beta22}"
                    )));
                }
                if !(beta12 >= 0.0 && beta12.is_finite()) {
                    return Err(Error::InvalidSpec(format!("beta12 must be nonnegative, got {beta12}")));
                }
                TwoComponent {
                    beta11,
                    beta22,
                    beta12,
                    alpha,
                }
            }
            Family::Spin1 {
                beta0,
                beta1,
                magnetization,
            } => {
                self.require_no_zeeman()?;
                reduce_spin1(beta0, beta1, magnetization)?
            }
            Family::Spin2 {
                beta0,
                beta1,
                beta2,
                magnetization,
            } => {
                self.require_no_zeeman()?;
                reduce_spin2(beta0, beta1, beta2, magnetization)?
            }
        };
        if !(reduced.alpha > 0.0 && reduced.alpha < 1.0) {
            return Err(Error::InvalidSpec(format!("alpha must lie in (0, 1), got {}", reduced.alpha)));
        }
        if ![reduced.beta11, reduced.beta22].iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidSpec("interaction coefficients must be finite".into()));
        }
        Ok(reduced)
    }

    fn require_no_zeeman(&self) -> Result<()> {
        if self.zeeman != (0.0, 0.0) {
            return Err(Error::InvalidSpec(format!(
                "spin reductions need p = q = 0, got p = {}, q = {}",
                self.zeeman.0, self.zeeman.1
            )));
        }
        Ok(())
    }
}

/// Discrete two-component problem of a condensate spec. Spin-1 and spin-2
/// specs are reduced first.
pub fn build_spin_half(spec: &BecSpec) -> Result<CoupledProblem> {
    let params = spec.two_component()?;
    let grid = Grid::new(spec.domain.clone(), &spec.counts, spec.scheme)?;
    let op = match spec.scheme {
        Scheme::FiniteDifference => SymmetricOperator::finite_difference(&grid, &spec.potential)?,
        Scheme::Spectral => SymmetricOperator::spectral(&grid, &spec.potential)?,
    };
    let hd = grid.cell_volume();
    let a = params.alpha;
    let b = 1.0 - a;
    let problem = CoupledProblem::new(
        op.scaled(a)?,
        op.scaled(b)?,
        params.beta11 * a * a / hd,
        params.beta22 * b * b / hd,
        params.beta12 * a * b / hd,
    )?;
    let scale = params.beta11.max(params.beta22).max(params.beta12);
    Ok(problem
        .with_rescale([(a / hd).sqrt(), (b / hd).sqrt()])
        .with_interaction_scale(scale))
}

/// `(φ1, φ2)` on the grid nodes from a discrete state.
pub fn recover_wavefunctions(p: &CoupledProblem, state: &IterateState) -> (Vec<f64>, Vec<f64>) {
    let [s1, s2] = p.rescale();
    (
        state.u().iter().map(|x| s1 * x).collect(),
        state.v().iter().map(|x| s2 * x).collect(),
    )
}
