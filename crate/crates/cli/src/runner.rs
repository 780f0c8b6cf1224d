//! Builds problems from a configuration and runs the sweep.

use std::sync::Arc;

use bec_core::bec::{build_spin_half, plugin_quartic, BecSpec, Family};
use bec_core::grid::{Domain, Lattice, LatticeShape, PotentialSpec, Scheme, SymmetricOperator};
use bec_core::model::CoupledProblem;
use bec_core::solvers::{alm, anni, multiblock_anni, BlockSpec, InitialGuess, SolveReport, SolverConfig, Tau2};
use bec_core::{Error, Result};
use rayon::prelude::*;

use crate::config::{FamilyName, InitName, Method, Params, RunConfig, SchemeName, ShapeName, Tau2Config};

/// A finished run together with the problem it solved.
pub struct Solved {
    pub problem: CoupledProblem,
    pub report: SolveReport,
}

pub struct Row {
    /// Values of the table's parameter columns.
    pub params: Vec<f64>,
    pub outcome: Result<Solved>,
}

impl Row {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(s) if s.report.converged)
    }
}

fn need(params: &Params, name: &str) -> Result<f64> {
    params
        .get(name)
        .ok_or_else(|| Error::InvalidSpec(format!("parameter `{name}` is not set")))
}

fn potential(cfg: &RunConfig, dims: usize) -> PotentialSpec {
    let pot = cfg.problem.potential.as_ref();
    let weights = pot
        .and_then(|p| p.harmonic.as_ref())
        .map_or(vec![1.0; dims], |h| h.expand(dims));
    match pot.and_then(|p| p.lattice.as_ref()) {
        Some(l) => PotentialSpec::harmonic_lattice(
            weights,
            Lattice {
                amplitude: l.amplitude,
                wavenumber: l.wavenumber,
                shape: match l.shape {
                    ShapeName::Sin => LatticeShape::Sin,
                    ShapeName::Cos => LatticeShape::Cos,
                },
            },
        ),
        None => PotentialSpec::harmonic(weights),
    }
}

/// The discrete problem for one parameter point.
pub fn build_problem(cfg: &RunConfig, params: &Params) -> Result<CoupledProblem> {
    let p = &cfg.problem;
    let scale = params.beta.unwrap_or(1.0);
    if p.family == FamilyName::Custom {
        let dense = |rows: &Option<Vec<Vec<f64>>>| SymmetricOperator::dense(rows.as_deref().unwrap_or_default());
        return CoupledProblem::new(
            dense(&p.a1)?,
            dense(&p.a2)?,
            scale * need(params, "beta11")?,
            scale * need(params, "beta22")?,
            scale * need(params, "beta12")?,
        );
    }
    let family = match p.family {
        FamilyName::SpinHalf => Family::SpinHalf {
            beta11: scale * need(params, "beta11")?,
            beta22: scale * need(params, "beta22")?,
            beta12: scale * need(params, "beta12")?,
            alpha: need(params, "alpha")?,
        },
        FamilyName::Spin1 => Family::Spin1 {
            beta0: need(params, "beta0")?,
            beta1: need(params, "beta1")?,
            magnetization: need(params, "magnetization")?,
        },
        FamilyName::Spin2 => Family::Spin2 {
            beta0: need(params, "beta0")?,
            beta1: need(params, "beta1")?,
            beta2: need(params, "beta2")?,
            magnetization: need(params, "magnetization")?,
        },
        FamilyName::Custom => unreachable!(),
    };
    let dims = cfg.dims();
    // presence checked by validation
    let domain = p.domain.as_ref().expect("validated domain");
    let spec = BecSpec {
        family,
        domain: Domain::new(domain.lower.expand(dims), domain.upper.expand(dims))?,
        counts: p.n.as_ref().expect("validated n").expand(dims),
        scheme: match p.scheme {
            SchemeName::Fd => Scheme::FiniteDifference,
            SchemeName::Spectral => Scheme::Spectral,
        },
        potential: potential(cfg, dims),
        zeeman: (0.0, 0.0),
    };
    build_spin_half(&spec)
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    let s = &cfg.solver;
    let d = SolverConfig::default();
    SolverConfig {
        tau1: s.tau1.unwrap_or(d.tau1),
        tau2: match s.tau2 {
            Some(Tau2Config::Fixed(t)) => Tau2::Fixed(t),
            _ => Tau2::Auto,
        },
        grad_tol: s.grad_tol.unwrap_or(d.grad_tol),
        energy_tol: s.energy_tol.unwrap_or(d.energy_tol),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        max_halvings: s.max_halvings.unwrap_or(d.max_halvings),
        inner_nni_tol: s.inner_tol.unwrap_or(d.inner_nni_tol),
        inner_max_iter: s.inner_max_iter.unwrap_or(d.inner_max_iter),
        init: match s.init {
            InitName::Ones => InitialGuess::Ones,
            InitName::Gaussian => InitialGuess::Gaussian {
                width: s.gaussian_width.unwrap_or(1.0),
            },
        },
        ..d
    }
}

/// Quartic two-block form of `p` for the multi-block solver.
pub fn quartic_blocks(p: &CoupledProblem) -> Result<Vec<BlockSpec>> {
    Ok(vec![
        BlockSpec {
            operator: p.a1().clone(),
            nonlinearity: Arc::new(plugin_quartic(p.beta11())?),
            coupling: vec![0.0, p.beta12()],
        },
        BlockSpec {
            operator: p.a2().clone(),
            nonlinearity: Arc::new(plugin_quartic(p.beta22())?),
            coupling: vec![p.beta12(), 0.0],
        },
    ])
}

pub fn run_point(cfg: &RunConfig, params: &Params) -> Result<Solved> {
    let problem = build_problem(cfg, params)?;
    let solver = solver_config(cfg);
    let report = match cfg.solver.method {
        Method::Anni => anni(&problem, &solver)?,
        Method::Alm => alm(&problem, &solver)?,
        Method::Multiblock => multiblock_anni(&quartic_blocks(&problem)?, &solver)?,
    };
    Ok(Solved { problem, report })
}

/// Runs every sweep point on up to `threads` workers (0: all cores). Rows
/// come back in sweep order.
pub fn run_sweep(cfg: &RunConfig, threads: usize) -> Vec<Row> {
    let columns = cfg.columns();
    let points = cfg.points();
    let work = || {
        points
            .par_iter()
            .map(|pt| Row {
                params: columns.iter().map(|c| pt.get(c).unwrap_or(f64::NAN)).collect(),
                outcome: run_point(cfg, pt),
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(work),
        Err(_) => work(),
    }
}
