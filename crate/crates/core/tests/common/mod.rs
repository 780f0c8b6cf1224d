//! Random small instances and the invariant checks run on them.

#![allow(dead_code)]

use bec_core::grid::{
    build_fd_operator, build_spectral_operator, Domain, Lattice, LatticeShape, PotentialSpec, SymmetricOperator,
};
use bec_core::linsolve::{solve_bordered, LinearSolverConfig};
use bec_core::model::{
    apply_coupled, apply_jacobian, grad_norm, half_energy, normalized, rayleigh, residual, CoupledProblem,
};
use bec_core::solvers::{anni, select_shift, InitialGuess, SolverConfig};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub problem: CoupledProblem,
    pub init: Vec<Vec<f64>>,
    pub finite_difference: bool,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_positive(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    normalized(&(0..n).map(|_| rng.gen_range(0.1..1.0)).collect::<Vec<_>>())
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    normalized(&(0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
}

fn random_potential(rng: &mut ChaCha8Rng) -> PotentialSpec {
    PotentialSpec::harmonic_lattice(
        vec![rng.gen_range(0.5..2.0)],
        Lattice {
            amplitude: rng.gen_range(0.0..10.0),
            wavenumber: rng.gen_range(0.5..2.0),
            shape: if rng.gen_bool(0.5) { LatticeShape::Sin } else { LatticeShape::Cos },
        },
    )
}

/// A 1D problem with `n ≤ 64` unknowns; even seeds are finite-difference,
/// odd seeds pseudo-spectral.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = rng(seed);
    let fd = seed.is_multiple_of(2);
    let l = rng.gen_range(3.0..8.0);
    let dom = Domain::cube(-l, l, 1).unwrap();
    let pot = random_potential(&mut rng);
    let op = if fd {
        build_fd_operator(dom, &[rng.gen_range(5..=65)], &pot).unwrap()
    } else {
        build_spectral_operator(dom, &[[8, 16, 32, 64][rng.gen_range(0..4)]], &pot).unwrap()
    };
    let alpha = rng.gen_range(0.1..0.9);
    let h = 2.0 * l / op.grid().unwrap().counts()[0] as f64;
    let beta = rng.gen_range(0.5..60.0);
    let problem = CoupledProblem::new(
        op.scaled(alpha).unwrap(),
        op.scaled(1.0 - alpha).unwrap(),
        beta * rng.gen_range(0.5..1.5) * alpha * alpha / h,
        beta * rng.gen_range(0.5..1.5) * (1.0 - alpha) * (1.0 - alpha) / h,
        beta * rng.gen_range(0.0..1.0) * alpha * (1.0 - alpha) / h,
    )
    .unwrap();
    let n = problem.size();
    let init = vec![random_positive(&mut rng, n), random_positive(&mut rng, n)];
    Instance {
        problem,
        init,
        finite_difference: fd,
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Energy descent, tangency, positive border correction and positivity
/// along an ANNI run. Reaching the tolerance within the cap is not required.
pub fn check_run(inst: &Instance) -> Result<(), String> {
    let cfg = SolverConfig {
        init: InitialGuess::Given(inst.init.clone()),
        ..SolverConfig::default()
    };
    let report = anni(&inst.problem, &cfg).map_err(|e| format!("solver failed: {e}"))?;
    for (k, entry) in report.history.iter().enumerate().skip(1) {
        let prev = report.history[k - 1].energy;
        ensure(entry.energy <= prev, || format!("energy rose at iteration {k}: {prev} -> {}", entry.energy))?;
        for step in entry.steps.iter().filter(|s| !s.skipped) {
            ensure(step.decrease < 0.0, || format!("non-descending step at iteration {k}"))?;
            ensure(step.tangency <= 1e-7, || format!("|u·Δu| = {:e} at iteration {k}", step.tangency))?;
            if inst.finite_difference {
                ensure(step.delta > 0.0, || format!("δ = {:e} at iteration {k}", step.delta))?;
                ensure(step.min_entry > 0.0, || format!("lost positivity at iteration {k}"))?;
            }
        }
    }
    if inst.finite_difference {
        ensure(report.state.blocks.iter().flatten().all(|&x| x > 0.0), || "final state not positive".into())?;
    }
    Ok(())
}

/// `J_v(u, λ) u = r_v(u, λ) + 2 β11 u³` at random points.
pub fn check_jacobian_identity(inst: &Instance, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed ^ 0x5eed);
    let p = &inst.problem;
    let n = p.size();
    for _ in 0..5 {
        let u = random_unit(&mut rng, n);
        let v = random_unit(&mut rng, n);
        let lambda = rng.gen_range(-5.0..5.0);
        let ju = apply_jacobian(p, &u, &v, lambda, &u);
        let r = residual(p, &u, &v, lambda);
        let scale = norm(&ju).max(1.0);
        for i in 0..n {
            let rhs = r[i] + 2.0 * p.beta11() * u[i].powi(3);
            ensure((ju[i] - rhs).abs() <= 1e-12 * scale, || {
                format!("Jacobian identity off by {:e}", (ju[i] - rhs).abs())
            })?;
        }
    }
    Ok(())
}

/// `2 𝒜_v(u) u` against a central difference of `f_v`.
pub fn check_gradient(inst: &Instance, seed: u64) -> Result<(), String> {
    let mut rng = rng(seed ^ 0x6a7d);
    let p = &inst.problem;
    let n = p.size();
    let u = random_unit(&mut rng, n);
    let v = random_unit(&mut rng, n);
    let grad: Vec<f64> = apply_coupled(p, &u, &v, &u).iter().map(|x| 2.0 * x).collect();
    let eps = 1e-6;
    let fd: Vec<f64> = (0..n)
        .map(|i| {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += eps;
            dn[i] -= eps;
            (half_energy(p, &up, &v) - half_energy(p, &dn, &v)) / (2.0 * eps)
        })
        .collect();
    let err: Vec<f64> = grad.iter().zip(&fd).map(|(a, b)| a - b).collect();
    let rel = norm(&err) / norm(&grad);
    ensure(rel <= 1e-6, || format!("gradient relative error {rel:e}"))
}

/// Decoupled linear case: eigenvectors of `A1`, `A2` have zero gradient norm.
pub fn check_linear_eigenpairs(inst: &Instance) -> Result<(), String> {
    let p = &inst.problem;
    let linear = CoupledProblem::new_unchecked(p.a1().clone(), p.a2().clone(), 0.0, 0.0, 0.0).unwrap();
    let eigvec = |op: &SymmetricOperator, k: usize| -> Vec<f64> {
        let rows = op.to_dense();
        let n = rows.len();
        let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
        eig.eigenvectors.column(k.min(n - 1)).iter().copied().collect()
    };
    for k in [0, 1, 3] {
        let u = eigvec(p.a1(), k);
        let v = eigvec(p.a2(), k + 1);
        let g = grad_norm(&linear, &u, &v);
        let scale = p.a1().to_dense().iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
        ensure(g <= 1e-12 * scale.max(1.0), || format!("grad_norm {g:e} at eigenpair {k}"))?;
    }
    Ok(())
}

/// Every property on one instance.
pub fn check_instance(seed: u64) -> Result<(), String> {
    let inst = random_instance(seed);
    check_jacobian_identity(&inst, seed)?;
    check_gradient(&inst, seed)?;
    check_linear_eigenpairs(&inst)?;
    check_shift_window(&inst)?;
    check_run(&inst)
}

/// The first shift lies in `[τ1, max(τ1, ρ(u))]` and, after the solver's
/// halving rule, yields a tangent bordered correction.
pub fn check_shift_window(inst: &Instance) -> Result<(), String> {
    let p = &inst.problem;
    let (u, v) = (&inst.init[0], &inst.init[1]);
    let cfg = SolverConfig::default();
    let mut lambda = select_shift(p, u, v, &cfg);
    let top = cfg.tau1.max(rayleigh(p, u, v));
    ensure(lambda >= cfg.tau1 && lambda <= top, || format!("shift {lambda} outside [{}, {top}]", cfg.tau1))?;
    let mut tries = 0;
    let sol = loop {
        match solve_bordered(p, u, v, lambda, &LinearSolverConfig::default()) {
            Ok(sol) => break sol,
            Err(_) if tries < cfg.shift_retries => {
                lambda = cfg.tau1 + 0.5 * (lambda - cfg.tau1);
                tries += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    };
    let t = dot(u, &sol.delta_u).abs();
    ensure(t <= 1e-7, || format!("|u·Δu| = {t:e} on the first step"))
}
