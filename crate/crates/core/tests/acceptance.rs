//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;
use std::time::Instant;

use bec_core::bec::{build_spin_half, plugin_quartic, BecSpec, Family};
use bec_core::grid::{build_fd_operator, Domain, Lattice, LatticeShape, PotentialSpec, Scheme, SymmetricOperator};
use bec_core::model::{energy, CoupledProblem};
use bec_core::solvers::{alm, anni, multiblock_anni, nni, BlockSpec, SolveReport, SolverConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: &str, outcome: &Outcome) {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("AC-{id} {tag}: {}", outcome.detail);
}

fn lattice_1d_problem(beta: f64, alpha: f64) -> CoupledProblem {
    let spec = BecSpec {
        family: Family::SpinHalf {
            beta11: 1.03 * beta,
            beta22: beta,
            beta12: 0.97 * beta,
            alpha,
        },
        domain: Domain::cube(-16.0, 16.0, 1).unwrap(),
        counts: vec![1024],
        scheme: Scheme::FiniteDifference,
        potential: PotentialSpec::harmonic_lattice(
            vec![1.0],
            Lattice {
                amplitude: 24.0,
                wavenumber: 1.0,
                shape: LatticeShape::Cos,
            },
        ),
        zeeman: (0.0, 0.0),
    };
    build_spin_half(&spec).unwrap()
}

fn lattice_spec(family: Family, half_width: f64, n: usize, dims: usize, amplitude: f64) -> BecSpec {
    BecSpec {
        family,
        domain: Domain::cube(-half_width, half_width, dims).unwrap(),
        counts: vec![n; dims],
        scheme: Scheme::Spectral,
        potential: PotentialSpec::harmonic_lattice(
            vec![1.0; dims],
            Lattice {
                amplitude,
                wavenumber: PI / 2.0,
                shape: LatticeShape::Sin,
            },
        ),
        zeeman: (0.0, 0.0),
    }
}

fn timed<F: FnOnce() -> bec_core::Result<SolveReport>>(f: F) -> (bec_core::Result<SolveReport>, f64) {
    let start = Instant::now();
    let r = f();
    (r, start.elapsed().as_secs_f64())
}

const ALPHAS: [f64; 4] = [0.2, 0.5, 0.8, 0.9];

fn lattice_1d_sweep(beta: f64, targets: [f64; 4], tol: f64, max_iter: usize, check_grad_and_time: bool) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (alpha, target) in ALPHAS.iter().zip(targets) {
        let p = lattice_1d_problem(beta, *alpha);
        let (r, secs) = timed(|| anni(&p, &SolverConfig::default()));
        match r {
            Ok(r) => {
                let mut ok = (r.state.energy - target).abs() <= tol && r.iterations <= max_iter;
                if check_grad_and_time {
                    ok &= r.state.grad_norm <= 1e-6 && secs <= 5.0;
                }
                pass &= ok;
                parts.push(format!(
                    "α={alpha}: f={:.4} (target {target}) nrmG={:.1e} iter={} {:.2}s",
                    r.state.energy, r.state.grad_norm, r.iterations, secs
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("α={alpha}: error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn alm_agreement() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for beta in [10.0, 100.0] {
        for alpha in ALPHAS {
            let p = lattice_1d_problem(beta, alpha);
            let cfg = SolverConfig::default();
            match (anni(&p, &cfg), alm(&p, &cfg)) {
                (Ok(a), Ok(b)) => {
                    let rel = (b.state.energy - a.state.energy).abs() / (a.state.energy.abs() + 1.0);
                    worst = worst.max(rel);
                }
                (a, b) => failures.push(format!(
                    "β={beta} α={alpha}: {:?} / {:?}",
                    a.err().map(|e| e.to_string()),
                    b.err().map(|e| e.to_string())
                )),
            }
        }
    }
    Outcome {
        pass: failures.is_empty() && worst <= 1e-6,
        detail: format!("max |f_ALM - f_ANNI|/(|f|+1) = {worst:.2e} over 8 lattice cases {}", failures.join("; ")),
    }
}

fn spectral_cases(cases: &[(Family, f64)], half_width: f64, tol: f64, time_cap: Option<f64>) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (family, target) in cases {
        let p = build_spin_half(&lattice_spec(*family, half_width, 256, 2, 10.0)).unwrap();
        let (r, secs) = timed(|| anni(&p, &SolverConfig::default()));
        let label = match family {
            Family::Spin1 { magnetization, .. } | Family::Spin2 { magnetization, .. } => format!("M={magnetization}"),
            Family::SpinHalf { alpha, .. } => format!("α={alpha}"),
        };
        match r {
            Ok(r) => {
                let ok = r.converged && (r.state.energy - target).abs() <= tol && time_cap.is_none_or(|c| secs <= c);
                pass &= ok;
                parts.push(format!(
                    "{label}: f={:.4} (target {target}) nrmG={:.1e} iter={} {:.1}s",
                    r.state.energy, r.state.grad_norm, r.iterations, secs
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: error {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

/// Point on the positive octant of the unit sphere.
fn octant(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// Best angles for one sphere with the other vector frozen.
fn scan(
    f: &dyn Fn(&[f64; 3]) -> f64,
    center: (f64, f64),
    half_width: f64,
    points: usize,
) -> ((f64, f64), f64) {
    let lo_t = (center.0 - half_width).max(0.0);
    let hi_t = (center.0 + half_width).min(FRAC_PI_2);
    let lo_p = (center.1 - half_width).max(0.0);
    let hi_p = (center.1 + half_width).min(FRAC_PI_2);
    let mut best = (center, f64::INFINITY);
    for i in 0..points {
        let t = lo_t + (hi_t - lo_t) * i as f64 / (points - 1) as f64;
        for j in 0..points {
            let ph = lo_p + (hi_p - lo_p) * j as f64 / (points - 1) as f64;
            let value = f(&octant(t, ph));
            if value < best.1 {
                best = ((t, ph), value);
            }
        }
    }
    best
}

fn brute_force() -> Outcome {
    let a = build_fd_operator(Domain::cube(0.0, 4.0, 1).unwrap(), &[4], &PotentialSpec::constant(1.0)).unwrap();
    let p = CoupledProblem::new(a.clone(), a, 1.0, 1.0, 0.5).unwrap();
    let f = |u: &[f64; 3], v: &[f64; 3]| energy(&p, u, v);

    // alternate full 2000² scans of each sphere until neither improves
    let mut au = (FRAC_PI_2 / 2.0, FRAC_PI_2 / 2.0);
    let mut av = au;
    let mut best = f64::INFINITY;
    for _ in 0..10 {
        let v = octant(av.0, av.1);
        let (nu, _) = scan(&|u| f(u, &v), au, FRAC_PI_2, 2000);
        let u = octant(nu.0, nu.1);
        let (nv, value) = scan(&|v| f(&u, v), av, FRAC_PI_2, 2000);
        au = nu;
        av = nv;
        if value >= best {
            best = best.min(value);
            break;
        }
        best = value;
    }
    // coordinate-descent refinement on shrinking windows
    let mut width = FRAC_PI_2 / 1999.0 * 4.0;
    for _ in 0..8 {
        for _ in 0..4 {
            let v = octant(av.0, av.1);
            au = scan(&|u| f(u, &v), au, width, 41).0;
            let u = octant(au.0, au.1);
            let (nv, value) = scan(&|v| f(&u, v), av, width, 41);
            av = nv;
            best = best.min(value);
        }
        width /= 8.0;
    }
    match anni(&p, &SolverConfig::default()) {
        Ok(r) => {
            let diff = (r.state.energy - best).abs();
            Outcome {
                pass: diff <= 1e-4,
                detail: format!("ANNI f={:.10} scan min={best:.10} |diff|={diff:.2e}", r.state.energy),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: format!("ANNI error {e}"),
        },
    }
}

fn property_suite() -> Outcome {
    let failures: Vec<String> = (0..50u64)
        .filter_map(|seed| common::check_instance(seed).err().map(|e| format!("seed {seed}: {e}")))
        .collect();
    Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "50/50 random instances (25 finite-difference, 25 spectral, n ≤ 64)".into()
        } else {
            format!("{} failures: {}", failures.len(), failures.join("; "))
        },
    }
}

fn quartic_block(op: &SymmetricOperator, beta: f64, coupling: Vec<f64>) -> BlockSpec {
    BlockSpec {
        operator: op.clone(),
        nonlinearity: Arc::new(plugin_quartic(beta).unwrap()),
        coupling,
    }
}

fn block_energy(op: &SymmetricOperator, beta: f64, u: &[f64]) -> f64 {
    let au = op.apply_vec(u);
    u.iter().zip(&au).map(|(x, a)| x * a + 0.5 * beta * x.powi(4)).sum()
}

fn multiblock() -> Outcome {
    let p = lattice_1d_problem(10.0, 0.5);
    let cfg = SolverConfig::default();
    let two = [
        quartic_block(p.a1(), p.beta11(), vec![0.0, p.beta12()]),
        quartic_block(p.a2(), p.beta22(), vec![p.beta12(), 0.0]),
    ];
    let (pair, pair_detail) = match (anni(&p, &cfg), multiblock_anni(&two, &cfg)) {
        (Ok(a), Ok(m)) => {
            let diff = (a.state.energy - m.state.energy).abs();
            (diff <= 1e-10, format!("m=2 |Δf|={diff:.1e}"))
        }
        _ => (false, "m=2 solver error".to_string()),
    };

    let ops: Vec<SymmetricOperator> = [(0.5, 0.0), (1.0, 5.0), (2.0, 20.0)]
        .iter()
        .map(|&(w, amp)| {
            build_fd_operator(
                Domain::cube(-6.0, 6.0, 1).unwrap(),
                &[96],
                &PotentialSpec::harmonic_lattice(
                    vec![w],
                    Lattice {
                        amplitude: amp,
                        wavenumber: 1.0,
                        shape: LatticeShape::Sin,
                    },
                ),
            )
            .unwrap()
        })
        .collect();
    let betas = [3.0, 10.0, 40.0];
    let three: Vec<BlockSpec> = (0..3).map(|j| quartic_block(&ops[j], betas[j], vec![0.0; 3])).collect();
    let tight = SolverConfig {
        grad_tol: 1e-10,
        energy_tol: 1e-16,
        ..SolverConfig::default()
    };
    let (zero, zero_detail) = match multiblock_anni(&three, &tight) {
        Ok(m) => {
            let mut worst = 0.0f64;
            let mut ok = true;
            for j in 0..3 {
                let single = CoupledProblem::new(ops[j].clone(), ops[j].clone(), betas[j], betas[j], 0.0).unwrap();
                let u0 = vec![1.0 / (ops[j].size() as f64).sqrt(); ops[j].size()];
                match nni(&single, &u0, &u0, &cfg) {
                    Ok((u, _)) => {
                        let diff = (block_energy(&ops[j], betas[j], &u)
                            - block_energy(&ops[j], betas[j], &m.state.blocks[j]))
                        .abs();
                        worst = worst.max(diff);
                    }
                    Err(_) => ok = false,
                }
            }
            (ok && worst <= 1e-8, format!("m=3 zero coupling max block |Δf|={worst:.1e}"))
        }
        Err(e) => (false, format!("m=3 error {e}")),
    };
    Outcome {
        pass: pair && zero,
        detail: format!("{pair_detail}; {zero_detail}"),
    }
}

fn smoke_3d() -> Outcome {
    let family = Family::Spin1 {
        beta0: 3.0,
        beta1: 1.0,
        magnetization: 0.0,
    };
    let p = build_spin_half(&lattice_spec(family, 2.0, 32, 3, 100.0)).unwrap();
    // the relative energy rule alone would stop this linearly converging
    // alternation just above the gradient target, so it is tightened here
    let cfg = SolverConfig {
        energy_tol: 1e-15,
        ..SolverConfig::default()
    };
    let (r, secs) = timed(|| anni(&p, &cfg));
    match r {
        Ok(r) => Outcome {
            pass: r.state.grad_norm <= 1e-6 && r.iterations <= 200,
            detail: format!(
                "f={:.6} nrmG={:.1e} iter={} term={} {:.1}s",
                r.state.energy,
                r.state.grad_norm,
                r.iterations,
                r.termination.code(),
                secs
            ),
        },
        Err(e) => Outcome {
            pass: false,
            detail: format!("error {e}"),
        },
    }
}

type Criterion = Box<dyn Fn() -> Outcome>;

fn main() {
    let spin1 = |m| Family::Spin1 {
        beta0: 3.0,
        beta1: 1.0,
        magnetization: m,
    };
    let spin2 = |m| Family::Spin2 {
        beta0: 5.0,
        beta1: 1.0,
        beta2: -1.0,
        magnetization: m,
    };
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1", Box::new(|| lattice_1d_sweep(10.0, [6.8651, 6.8670, 6.9029, 6.9224], 5e-4, 30, true))),
        ("2", Box::new(|| lattice_1d_sweep(100.0, [17.1842, 17.1901, 17.3046, 17.3717], 1e-3, 200, false))),
        ("3", Box::new(alm_agreement)),
        (
            "4",
            Box::new(move || {
                spectral_cases(&[(spin1(0.0), 7.5123), (spin1(0.5), 7.5547), (spin1(0.9), 7.6712)], 4.0, 5e-3, Some(60.0))
            }),
        ),
        ("5", Box::new(move || spectral_cases(&[(spin2(0.0), 7.8431), (spin2(1.5), 8.0695)], 8.0, 5e-3, None))),
        ("6", Box::new(brute_force)),
        ("7", Box::new(property_suite)),
        ("8", Box::new(multiblock)),
        ("9", Box::new(smoke_3d)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, check) in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let outcome = check();
        report(id, &outcome);
        failed += usize::from(!outcome.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
