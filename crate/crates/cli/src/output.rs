//! Summary tables, convergence histories and wavefunction dumps.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use bec_core::bec::recover_wavefunctions;

use crate::runner::{Row, Solved};

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn write(path: &Path, text: &str) -> Result<(), OutputError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| OutputError {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV summary: parameter columns, then `f,nrmG,iter,inner_iter,cpu_s,term`.
pub fn summary_csv(columns: &[&str], rows: &[Row]) -> String {
    let mut out = String::new();
    for c in columns {
        out.push_str(c);
        out.push(',');
    }
    out.push_str("f,nrmG,iter,inner_iter,cpu_s,term\n");
    for row in rows {
        for v in &row.params {
            let _ = write!(out, "{v},");
        }
        match &row.outcome {
            Ok(Solved { report, .. }) => {
                let _ = writeln!(
                    out,
                    "{:.10},{:.3e},{},{},{:.3},{}",
                    report.state.energy,
                    report.state.grad_norm,
                    report.iterations,
                    report.inner_iterations,
                    report.wall_time,
                    report.termination.code()
                );
            }
            Err(e) => {
                let _ = writeln!(out, ",,,,,{}", e.code());
            }
        }
    }
    out
}

/// Per-iteration energy and gradient norm of one run.
pub fn history_csv(solved: &Solved) -> String {
    let mut out = String::from("iter,f,nrmG,inner_iter,halvings,linear_iter\n");
    for h in &solved.report.history {
        let halvings: usize = h.steps.iter().map(|s| s.halvings).sum();
        let linear: usize = h.steps.iter().map(|s| s.linear_iterations).sum();
        let _ = writeln!(
            out,
            "{},{:.16e},{:.6e},{},{},{}",
            h.iteration, h.energy, h.grad_norm, h.inner_iterations, halvings, linear
        );
    }
    out
}

/// Node coordinates then `φ1 φ2`, one node per line in row-major order,
/// 17 significant digits. Problems without a grid get the node index.
pub fn dump_text(solved: &Solved) -> String {
    let (phi1, phi2) = recover_wavefunctions(&solved.problem, &solved.report.state);
    let mut out = String::new();
    for i in 0..phi1.len() {
        match solved.problem.grid() {
            Some(grid) => {
                for x in grid.node(i) {
                    let _ = write!(out, "{x:.16e} ");
                }
            }
            None => {
                let _ = write!(out, "{i} ");
            }
        }
        let _ = writeln!(out, "{:.16e} {:.16e}", phi1[i], phi2[i]);
    }
    out
}

pub fn dump_state(solved: &Solved, path: &Path) -> Result<(), OutputError> {
    write(path, &dump_text(solved))
}

/// Writes `summary.csv`, `history/run_NNN.csv` and, when asked,
/// `states/run_NNN.txt` under `dir`.
pub fn write_all(dir: &Path, columns: &[&str], rows: &[Row], dump_states: bool) -> Result<(), OutputError> {
    write(&dir.join("summary.csv"), &summary_csv(columns, rows))?;
    for (k, row) in rows.iter().enumerate() {
        if let Ok(solved) = &row.outcome {
            write(&dir.join("history").join(format!("run_{k:03}.csv")), &history_csv(solved))?;
            if dump_states {
                dump_state(solved, &dir.join("states").join(format!("run_{k:03}.txt")))?;
            }
        }
    }
    Ok(())
}
