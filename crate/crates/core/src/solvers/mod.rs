//! Alternating Newton–Noda iteration (ANNI), alternating minimization
//! (ALM) with Newton–Noda inner solves, and the multi-block extension.
//!
//! All three drivers share one loop over blocks. ANNI performs a single
//! damped Newton–Noda step per block and sweep; ALM solves every block
//! subproblem to `inner_nni_tol`.

mod lanczos;
mod nni;
mod step;

pub use lanczos::{lanczos_min_eig, tridiagonal_min_eig};
pub use nni::{descent_block, nni, nni_block, InnerSolve};
pub use step::{
    block_line_search, effective_tau2, m_matrix_path, select_block_shift, step_energy_change, HalfStep, LineSearch,
    AUTO_TAU2_FRACTION, LANCZOS_STEPS, NEGLIGIBLE_STEP,
};

use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::SymmetricOperator;
use crate::linsolve::LinearSolverConfig;
use crate::model::{normalized, Block, CoupledProblem, IterateState, Nonlinearity};

/// Upper end of the shift window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau2 {
    /// Just below the smallest eigenvalue of the unshifted Jacobian, estimated
    /// by a short Lanczos run per block and sweep.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Normalized vector of ones.
    Ones,
    /// Normalized `exp(-|x|² / (2 width²))` on the grid nodes.
    Gaussian { width: f64 },
    /// Explicit starting vectors, one per block; normalized on use.
    Given(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau1: f64,
    pub tau2: Tau2,
    pub grad_tol: f64,
    pub energy_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Shift reductions allowed after an indefinite Jacobian.
    pub shift_retries: usize,
    pub linear: LinearSolverConfig,
    pub inner_nni_tol: f64,
    pub inner_max_iter: usize,
    pub init: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau1: 0.0,
            tau2: Tau2::Auto,
            grad_tol: 1e-6,
            energy_tol: 1e-12,
            max_iter: 200,
            max_halvings: 60,
            shift_retries: 5,
            linear: LinearSolverConfig::default(),
            inner_nni_tol: 1e-8,
            inner_max_iter: 200,
            init: InitialGuess::Ones,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !self.tau1.is_finite() {
            return bad(format!("tau1 must be finite, got {}", self.tau1));
        }
        if let Tau2::Fixed(t) = self.tau2 {
            if !(t > self.tau1) {
                return bad(format!("tau2 = {t} must exceed tau1 = {}", self.tau1));
            }
        }
        for (name, value) in [
            ("grad_tol", self.grad_tol),
            ("energy_tol", self.energy_tol),
            ("inner_nni_tol", self.inner_nni_tol),
        ] {
            if !(value > 0.0) {
                return bad(format!("{name} must be positive, got {value}"));
            }
        }
        if self.max_iter == 0 || self.inner_max_iter == 0 {
            return bad("iteration caps must be at least 1".into());
        }
        if let InitialGuess::Gaussian { width } = self.init {
            if !(width > 0.0) {
                return bad(format!("gaussian width must be positive, got {width}"));
            }
        }
        self.linear.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradTol,
    EnergyTol,
    MaxIter,
}

impl Termination {
    pub fn code(&self) -> &'static str {
        match self {
            Termination::GradTol => "GRAD_TOL",
            Termination::EnergyTol => "ENERGY_TOL",
            Termination::MaxIter => "MAX_ITER",
        }
    }

    pub fn converged(&self) -> bool {
        !matches!(self, Termination::MaxIter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// One entry per block, in update order; empty for the initial state.
    pub steps: Vec<HalfStep>,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    /// Total inner iterations (ALM only).
    pub inner_iterations: usize,
    pub linear_iterations: usize,
    pub state: IterateState,
    pub history: Vec<HistoryEntry>,
    pub wall_time: f64,
    pub termination: Termination,
}

/// Stopping rule: projected residual, relative energy stall, iteration cap.
pub fn check_stop(
    state: &IterateState,
    prev: Option<&IterateState>,
    iteration: usize,
    cfg: &SolverConfig,
) -> Option<Termination> {
    if state.grad_norm <= cfg.grad_tol {
        return Some(Termination::GradTol);
    }
    if let Some(prev) = prev {
        if (state.energy - prev.energy).abs() / (prev.energy.abs() + 1.0) <= cfg.energy_tol {
            return Some(Termination::EnergyTol);
        }
    }
    (iteration >= cfg.max_iter).then_some(Termination::MaxIter)
}

/// One component of a multi-block problem.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub operator: SymmetricOperator,
    pub nonlinearity: Arc<dyn Nonlinearity>,
    /// Row `β_j·` of the coupling matrix; the diagonal entry is ignored.
    pub coupling: Vec<f64>,
}

/// Blocks with symmetrized pairwise couplings `(β_js + β_sj)/2`.
struct System<'a> {
    ops: Vec<&'a SymmetricOperator>,
    nls: Vec<&'a dyn Nonlinearity>,
    coupling: Vec<Vec<f64>>,
}

impl<'a> System<'a> {
    fn from_problem(p: &'a CoupledProblem) -> Self {
        let [q1, q2] = p.quartics();
        Self {
            ops: vec![p.a1(), p.a2()],
            nls: vec![q1, q2],
            coupling: vec![vec![0.0, p.beta12()], vec![p.beta12(), 0.0]],
        }
    }

    fn from_blocks(blocks: &'a [BlockSpec]) -> Result<Self> {
        let m = blocks.len();
        if m == 0 {
            return Err(Error::InvalidSpec("at least one block is required".into()));
        }
        let n = blocks[0].operator.size();
        for (j, b) in blocks.iter().enumerate() {
            if b.operator.size() != n {
                return Err(Error::InvalidSpec(format!("block {j} has size {}, expected {n}", b.operator.size())));
            }
            if b.coupling.len() != m {
                return Err(Error::InvalidSpec(format!(
                    "block {j} has {} coupling entries, expected {m}",
                    b.coupling.len()
                )));
            }
            if b.coupling.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidSpec(format!("block {j} has nonfinite couplings")));
            }
        }
        let coupling = (0..m)
            .map(|j| {
                (0..m)
                    .map(|s| if s == j { 0.0 } else { 0.5 * (blocks[j].coupling[s] + blocks[s].coupling[j]) })
                    .collect()
            })
            .collect();
        Ok(Self {
            ops: blocks.iter().map(|b| &b.operator).collect(),
            nls: blocks.iter().map(|b| b.nonlinearity.as_ref()).collect(),
            coupling,
        })
    }

    fn len(&self) -> usize {
        self.ops.len()
    }

    fn field(&self, j: usize, blocks: &[Vec<f64>]) -> Vec<f64> {
        let mut c = vec![0.0; blocks[j].len()];
        for (s, w) in blocks.iter().enumerate() {
            let b = self.coupling[j][s];
            if s != j && b != 0.0 {
                for (ci, x) in c.iter_mut().zip(w) {
                    *ci += b * x * x;
                }
            }
        }
        c
    }

    fn energy(&self, blocks: &[Vec<f64>]) -> f64 {
        let zero = vec![0.0; blocks[0].len()];
        let mut f = 0.0;
        for (j, u) in blocks.iter().enumerate() {
            f += Block::new(self.ops[j], self.nls[j], &zero).half_energy(u);
            for s in j + 1..blocks.len() {
                let b = self.coupling[j][s];
                if b != 0.0 {
                    f += b * u.iter().zip(&blocks[s]).map(|(x, y)| x * x * y * y).sum::<f64>();
                }
            }
        }
        f
    }

    fn grad_norm(&self, blocks: &[Vec<f64>]) -> f64 {
        (0..self.len())
            .map(|j| {
                let c = self.field(j, blocks);
                Block::new(self.ops[j], self.nls[j], &c).eval(&blocks[j]).projected_residual_sq(&blocks[j])
            })
            .sum::<f64>()
            .sqrt()
    }

    fn state(&self, blocks: &[Vec<f64>], shifts: &[f64]) -> IterateState {
        IterateState {
            blocks: blocks.to_vec(),
            shifts: shifts.to_vec(),
            energy: self.energy(blocks),
            grad_norm: self.grad_norm(blocks),
        }
    }

    fn initial(&self, cfg: &SolverConfig) -> Result<Vec<Vec<f64>>> {
        let m = self.len();
        let op = self.ops[0];
        let n = op.size();
        let base = match &cfg.init {
            InitialGuess::Ones => vec![1.0; n],
            InitialGuess::Gaussian { width } => match op.grid() {
                Some(grid) => grid
                    .nodes()
                    .map(|x| (-x.iter().map(|a| a * a).sum::<f64>() / (2.0 * width * width)).exp())
                    .collect(),
                None => vec![1.0; n],
            },
            InitialGuess::Given(blocks) => {
                if blocks.len() != m || blocks.iter().any(|b| b.len() != n) {
                    return Err(Error::InvalidSpec(format!("initial guess must be {m} vectors of length {n}")));
                }
                let mut out = Vec::with_capacity(m);
                for b in blocks {
                    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(Error::InvalidSpec("initial guess must be finite and nonzero".into()));
                    }
                    out.push(normalized(b));
                }
                return Ok(out);
            }
        };
        Ok(vec![normalized(&base); m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    OneStep,
    FullSolve,
}

fn run(sys: &System<'_>, cfg: &SolverConfig, lin: &LinearSolverConfig, mode: Mode) -> Result<SolveReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut blocks = sys.initial(cfg)?;
    let mut shifts: Vec<f64> = (0..sys.len())
        .map(|j| {
            let c = sys.field(j, &blocks);
            Block::new(sys.ops[j], sys.nls[j], &c).rayleigh(&blocks[j])
        })
        .collect();
    let mut state = sys.state(&blocks, &shifts);
    let mut history = vec![HistoryEntry {
        iteration: 0,
        energy: state.energy,
        grad_norm: state.grad_norm,
        steps: Vec::new(),
        inner_iterations: 0,
    }];
    let (mut inner_total, mut linear_total) = (0, 0);
    let mut termination = check_stop(&state, None, 0, cfg);
    let mut iteration = 0;
    while termination.is_none() {
        iteration += 1;
        let mut steps = Vec::with_capacity(sys.len());
        let mut inner = 0;
        for j in 0..sys.len() {
            let c = sys.field(j, &blocks);
            let block = Block::new(sys.ops[j], sys.nls[j], &c);
            let info = match mode {
                Mode::OneStep => {
                    let info = step::half_step(&block, &mut blocks[j], cfg, lin).map_err(|e| e.at(iteration, j))?;
                    shifts[j] = info.shift;
                    info
                }
                Mode::FullSolve => {
                    let sol = nni::inner_solve(&block, &blocks[j], cfg, lin).map_err(|e| e.at(iteration, j))?;
                    inner += sol.iterations;
                    shifts[j] = sol.lambda;
                    let before = block.half_energy(&blocks[j]);
                    let after = block.half_energy(&sol.u);
                    let step_norm = blocks[j].iter().zip(&sol.u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    blocks[j] = sol.u;
                    HalfStep {
                        shift: sol.lambda,
                        theta: 1.0,
                        step_norm,
                        decrease: after - before,
                        min_entry: blocks[j].iter().cloned().fold(f64::INFINITY, f64::min),
                        skipped: sol.iterations == 0,
                        linear_iterations: sol.linear_iterations,
                        ..HalfStep::default()
                    }
                }
            };
            linear_total += info.linear_iterations;
            steps.push(info);
        }
        inner_total += inner;
        let next = sys.state(&blocks, &shifts);
        history.push(HistoryEntry {
            iteration,
            energy: next.energy,
            grad_norm: next.grad_norm,
            steps,
            inner_iterations: inner,
        });
        termination = check_stop(&next, Some(&state), iteration, cfg);
        state = next;
    }
    let termination = termination.expect("loop exits with a decision");
    Ok(SolveReport {
        converged: termination.converged(),
        iterations: iteration,
        inner_iterations: inner_total,
        linear_iterations: linear_total,
        state,
        history,
        wall_time: start.elapsed().as_secs_f64(),
        termination,
    })
}

/// Alternating Newton–Noda iteration on the two-component problem.
pub fn anni(p: &CoupledProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let lin = cfg.linear.resolved(p.interaction_scale());
    run(&System::from_problem(p), cfg, &lin, Mode::OneStep)
}

/// Alternating minimization with full subproblem solves.
pub fn alm(p: &CoupledProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let lin = cfg.linear.resolved(p.interaction_scale());
    run(&System::from_problem(p), cfg, &lin, Mode::FullSolve)
}

/// Cyclic one-step Newton–Noda updates over an arbitrary number of blocks.
pub fn multiblock_anni(blocks: &[BlockSpec], cfg: &SolverConfig) -> Result<SolveReport> {
    let sys = System::from_blocks(blocks)?;
    let scale = sys.coupling.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let lin = cfg.linear.resolved(scale);
    run(&sys, cfg, &lin, Mode::OneStep)
}

/// Shift for the `u` half-step of `p` with `v` frozen.
pub fn select_shift(p: &CoupledProblem, u: &[f64], v: &[f64], cfg: &SolverConfig) -> f64 {
    let c = p.coupling_field(v);
    let block = p.block_u(&c);
    select_block_shift(&block, u, &block.eval(u), cfg)
}

/// Halving line search on `f_v` along the tangent step `delta_u`.
pub fn line_search(
    p: &CoupledProblem,
    u: &[f64],
    delta_u: &[f64],
    v: &[f64],
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    let c = p.coupling_field(v);
    let ls = block_line_search(&p.block_u(&c), u, delta_u, cfg.max_halvings)?;
    Ok((ls.theta, ls.u_next))
}
