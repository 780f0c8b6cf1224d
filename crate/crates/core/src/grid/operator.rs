use std::sync::OnceLock;

use super::fourier::FourierTransform;
use super::{sample_potential, Domain, Grid, PotentialSpec, Scheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorStructure {
    /// Finite-difference Kronecker sum; tridiagonal in 1D.
    TridiagonalBlocks,
    /// Diagonal in Fourier space plus a pointwise potential.
    FourierDiagonalPlusDiagonal,
    /// Explicit small symmetric matrix (custom problems).
    Dense,
}

#[derive(Debug, Clone)]
enum Kinetic {
    Stencil { shape: Vec<usize>, inv_h2: Vec<f64> },
    Fourier { symbol: Vec<f64> },
    Dense { matrix: Vec<f64> },
}

/// Discretized `scale * (-1/2 Δ + V)`, applied matrix-free.
///
/// Immutable after construction and shareable across threads.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    grid: Option<Grid>,
    size: usize,
    scale: f64,
    potential: Vec<f64>,
    kinetic: Kinetic,
    m_matrix: bool,
    fourier: OnceLock<FourierTransform>,
}

/// Finite-difference operator with homogeneous Dirichlet boundaries.
pub fn build_fd_operator(domain: Domain, counts: &[usize], pot: &PotentialSpec) -> Result<SymmetricOperator> {
    let grid = Grid::new(domain, counts, Scheme::FiniteDifference)?;
    SymmetricOperator::finite_difference(&grid, pot)
}

/// Fourier pseudo-spectral operator on a periodic grid.
pub fn build_spectral_operator(domain: Domain, counts: &[usize], pot: &PotentialSpec) -> Result<SymmetricOperator> {
    let grid = Grid::new(domain, counts, Scheme::Spectral)?;
    SymmetricOperator::spectral(&grid, pot)
}

impl SymmetricOperator {
    pub fn finite_difference(grid: &Grid, pot: &PotentialSpec) -> Result<Self> {
        if grid.scheme() != Scheme::FiniteDifference {
            return Err(Error::InvalidSpec("finite-difference operator needs an FD grid".into()));
        }
        let potential = sample_potential(pot, grid)?;
        let inv_h2: Vec<f64> = grid.spacings().iter().map(|h| 1.0 / (h * h)).collect();
        let kinetic_diag: f64 = inv_h2.iter().sum();
        let m_matrix = potential.iter().all(|v| kinetic_diag + v > 0.0);
        Ok(Self {
            size: grid.len(),
            grid: Some(grid.clone()),
            scale: 1.0,
            potential,
            kinetic: Kinetic::Stencil {
                shape: grid.shape(),
                inv_h2,
            },
            m_matrix,
            fourier: OnceLock::new(),
        })
    }

    pub fn spectral(grid: &Grid, pot: &PotentialSpec) -> Result<Self> {
        if grid.scheme() != Scheme::Spectral {
            return Err(Error::InvalidSpec("spectral operator needs a spectral grid".into()));
        }
        let potential = sample_potential(pot, grid)?;
        let transform = FourierTransform::new(&grid.shape());
        let lengths: Vec<f64> = (0..grid.dims()).map(|a| grid.domain().length(a)).collect();
        let symbol = transform.laplacian_symbol(&lengths).into_iter().map(|k2| 0.5 * k2).collect();
        let fourier = OnceLock::new();
        let _ = fourier.set(transform);
        Ok(Self {
            size: grid.len(),
            grid: Some(grid.clone()),
            scale: 1.0,
            potential,
            kinetic: Kinetic::Fourier { symbol },
            m_matrix: false,
            fourier,
        })
    }

    /// Explicit symmetric matrix given row by row.
    pub fn dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpec("dense operator must be a nonempty square matrix".into()));
        }
        let mut matrix = Vec::with_capacity(n * n);
        for row in rows {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSpec("dense operator has nonfinite entries".into()));
            }
            matrix.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidSpec(format!("dense operator not symmetric at ({i}, {j})")));
                }
            }
        }
        let m_matrix = (0..n).all(|i| {
            matrix[i * n + i] > 0.0 && (0..n).all(|j| i == j || matrix[i * n + j] <= 0.0)
        });
        Ok(Self {
            grid: None,
            size: n,
            scale: 1.0,
            potential: vec![0.0; n],
            kinetic: Kinetic::Dense { matrix },
            m_matrix,
            fourier: OnceLock::new(),
        })
    }

    /// The same operator multiplied by a positive factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidSpec(format!("operator scale must be positive, got {factor}")));
        }
        let mut out = self.clone();
        out.scale *= factor;
        Ok(out)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled potential samples.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn structure(&self) -> OperatorStructure {
        match self.kinetic {
            Kinetic::Stencil { .. } => OperatorStructure::TridiagonalBlocks,
            Kinetic::Fourier { .. } => OperatorStructure::FourierDiagonalPlusDiagonal,
            Kinetic::Dense { .. } => OperatorStructure::Dense,
        }
    }

    /// Irreducible M-matrix certificate from the sign pattern.
    pub fn is_m_matrix(&self) -> bool {
        self.m_matrix
    }

    /// True when the Jacobian can be factored directly (1D stencil or dense).
    pub fn supports_direct_solve(&self) -> bool {
        match &self.kinetic {
            Kinetic::Stencil { shape, .. } => shape.len() == 1,
            Kinetic::Fourier { .. } => false,
            Kinetic::Dense { .. } => true,
        }
    }

    /// Half the Fourier symbol `1/2 |k|²` (unscaled), spectral operators only.
    pub fn kinetic_symbol(&self) -> Option<&[f64]> {
        match &self.kinetic {
            Kinetic::Fourier { symbol } => Some(symbol),
            _ => None,
        }
    }

    /// `(diagonal, off-diagonal)` of a 1D finite-difference operator.
    pub fn tridiagonal(&self) -> Option<(Vec<f64>, f64)> {
        match &self.kinetic {
            Kinetic::Stencil { shape, inv_h2 } if shape.len() == 1 => {
                let d = inv_h2[0];
                let diag = self.potential.iter().map(|v| self.scale * (d + v)).collect();
                Some((diag, -0.5 * self.scale * d))
            }
            _ => None,
        }
    }

    /// Row-major dense matrix of a [`OperatorStructure::Dense`] operator.
    pub fn dense_matrix(&self) -> Option<Vec<f64>> {
        match &self.kinetic {
            Kinetic::Dense { matrix } => Some(matrix.iter().map(|a| self.scale * a).collect()),
            _ => None,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let kin: Vec<f64> = match &self.kinetic {
            Kinetic::Stencil { inv_h2, .. } => vec![inv_h2.iter().sum(); self.size],
            Kinetic::Fourier { symbol } => {
                vec![symbol.iter().sum::<f64>() / self.size as f64; self.size]
            }
            Kinetic::Dense { matrix } => (0..self.size).map(|i| matrix[i * self.size + i]).collect(),
        };
        kin.iter().zip(&self.potential).map(|(k, v)| self.scale * (k + v)).collect()
    }

    /// Shape and per-axis lengths of the periodic grid used for FFT-based
    /// preconditioning.
    pub fn periodic_extent(&self) -> Option<(Vec<usize>, Vec<f64>)> {
        let grid = self.grid.as_ref()?;
        Some((grid.shape(), grid.periodic_lengths()))
    }

    pub fn fourier(&self) -> Option<&FourierTransform> {
        let (shape, _) = self.periodic_extent()?;
        Some(self.fourier.get_or_init(|| FourierTransform::new(&shape)))
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.size);
        assert_eq!(out.len(), self.size);
        match &self.kinetic {
            Kinetic::Stencil { shape, inv_h2 } => stencil_apply(shape, inv_h2, x, out),
            Kinetic::Fourier { symbol } => {
                self.fourier().expect("spectral grid").apply_multiplier(x, symbol, out)
            }
            Kinetic::Dense { matrix } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &matrix[i * self.size..(i + 1) * self.size];
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
        for ((o, v), xi) in out.iter_mut().zip(&self.potential).zip(x) {
            *o = self.scale * (*o + v * xi);
        }
    }

    /// Applies the operator to two vectors at once; spectral operators share
    /// one complex transform between them.
    pub fn apply_pair(&self, x1: &[f64], x2: &[f64], out1: &mut [f64], out2: &mut [f64]) {
        match &self.kinetic {
            Kinetic::Fourier { symbol } => {
                self.fourier().expect("spectral grid").apply_multiplier_pair(x1, x2, symbol, out1, out2);
                for i in 0..self.size {
                    let v = self.potential[i];
                    out1[i] = self.scale * (out1[i] + v * x1[i]);
                    out2[i] = self.scale * (out2[i] + v * x2[i]);
                }
            }
            _ => {
                self.apply(x1, out1);
                self.apply(x2, out2);
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        self.apply(x, &mut out);
        out
    }

    /// Dense assembly by applying the operator to every unit vector.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.size;
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            cols.push(self.apply_vec(&e));
            e[j] = 0.0;
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
    }
}

fn stencil_apply(shape: &[usize], inv_h2: &[f64], x: &[f64], out: &mut [f64]) {
    let diag: f64 = inv_h2.iter().sum();
    for (o, xi) in out.iter_mut().zip(x) {
        *o = diag * xi;
    }
    let dims = shape.len();
    for axis in 0..dims {
        let m = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let off = -0.5 * inv_h2[axis];
        for (i, o) in out.iter_mut().enumerate() {
            let j = (i / stride) % m;
            let mut acc = 0.0;
            if j > 0 {
                acc += x[i - stride];
            }
            if j + 1 < m {
                acc += x[i + stride];
            }
            *o += off * acc;
        }
    }
}
