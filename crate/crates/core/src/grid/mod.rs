//! Computational grids on truncated domains and the discretized
//! single-particle operator `-1/2 Δ + V`.
//!
//! Two schemes are supported:
//!
//! * finite differences with homogeneous Dirichlet boundaries, storing the
//!   `n - 1` interior nodes per axis;
//! * Fourier pseudo-spectral collocation with periodic boundaries, storing
//!   `n` nodes per axis (right endpoint excluded).
//!
//! Nodes are always enumerated in row-major tensor order (last axis fastest).

mod fourier;
mod operator;

pub use fourier::FourierTransform;
pub use operator::{build_fd_operator, build_spectral_operator, OperatorStructure, SymmetricOperator};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    FiniteDifference,
    Spectral,
}

/// Axis-aligned box `[lower, upper]` in dimensionless trap units.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() > 3 {
            return Err(Error::InvalidSpec(format!(
                "domain must have 1, 2 or 3 axes, got {}",
                lower.len()
            )));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidSpec(format!(
                "domain bounds disagree on dimension ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpec(format!(
                    "domain axis {axis} needs finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lower, upper]^dims`.
    pub fn cube(lower: f64, upper: f64, dims: usize) -> Result<Self> {
        Self::new(vec![lower; dims], vec![upper; dims])
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }
}

/// Tensor grid over a [`Domain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: Domain,
    counts: Vec<usize>,
    spacings: Vec<f64>,
    scheme: Scheme,
    axes: Vec<Vec<f64>>,
}

impl Grid {
    /// `counts[i]` is the number of mesh intervals `n` on axis `i`, so that
    /// `h = (upper - lower) / n`.
    pub fn new(domain: Domain, counts: &[usize], scheme: Scheme) -> Result<Self> {
        if counts.len() != domain.dims() {
            return Err(Error::InvalidSpec(format!(
                "expected {} per-axis counts, got {}",
                domain.dims(),
                counts.len()
            )));
        }
        for (axis, &n) in counts.iter().enumerate() {
            match scheme {
                Scheme::FiniteDifference if n < 3 => {
                    return Err(Error::InvalidSpec(format!(
                        "finite differences need n >= 3 on axis {axis}, got {n}"
                    )))
                }
                Scheme::Spectral if n < 2 || !n.is_power_of_two() => {
                    return Err(Error::InvalidSpec(format!(
                        "spectral grids need a power of two n on axis {axis}, got {n}"
                    )))
                }
                _ => {}
            }
        }
        let spacings: Vec<f64> = counts
            .iter()
            .enumerate()
            .map(|(a, &n)| domain.length(a) / n as f64)
            .collect();
        let axes = counts
            .iter()
            .enumerate()
            .map(|(a, &n)| {
                let lo = domain.lower()[a];
                let h = spacings[a];
                match scheme {
                    Scheme::FiniteDifference => (1..n).map(|j| lo + j as f64 * h).collect(),
                    Scheme::Spectral => (0..n).map(|j| lo + j as f64 * h).collect(),
                }
            })
            .collect();
        Ok(Self {
            domain,
            counts: counts.to_vec(),
            spacings,
            scheme,
            axes,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dims(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Stored unknowns per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Total number of unknowns.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node coordinates along one axis.
    pub fn axis(&self, axis: usize) -> &[f64] {
        &self.axes[axis]
    }

    /// Per-axis lengths of the periodic box spanned by the stored nodes. For
    /// finite differences this is the periodic extension of the interior.
    pub fn periodic_lengths(&self) -> Vec<f64> {
        self.axes.iter().zip(&self.spacings).map(|(a, h)| a.len() as f64 * h).collect()
    }

    /// `h^d`, the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.spacings.iter().product()
    }

    /// Coordinates of the node with flat (row-major) index `index`.
    pub fn node(&self, index: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.dims()];
        let mut rest = index;
        for axis in (0..self.dims()).rev() {
            let len = self.axes[axis].len();
            coords[axis] = self.axes[axis][rest % len];
            rest /= len;
        }
        coords
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeShape {
    Sin,
    Cos,
}

/// Optical-lattice term `amplitude * Σ_axes shape²(wavenumber * x_axis)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub shape: LatticeShape,
}

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// External trapping potential.
#[derive(Clone)]
pub enum PotentialSpec {
    /// `V(x) = 1/2 Σ w_i x_i² + lattice(x)`.
    HarmonicLattice {
        harmonic: Vec<f64>,
        lattice: Option<Lattice>,
    },
    Custom(PointFn),
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::HarmonicLattice { harmonic, lattice } => f
                .debug_struct("HarmonicLattice")
                .field("harmonic", harmonic)
                .field("lattice", lattice)
                .finish(),
            PotentialSpec::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PotentialSpec {
    pub fn harmonic(weights: Vec<f64>) -> Self {
        PotentialSpec::HarmonicLattice {
            harmonic: weights,
            lattice: None,
        }
    }

    pub fn harmonic_lattice(weights: Vec<f64>, lattice: Lattice) -> Self {
        PotentialSpec::HarmonicLattice {
            harmonic: weights,
            lattice: Some(lattice),
        }
    }

    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        PotentialSpec::Custom(Arc::new(f))
    }

    pub fn constant(value: f64) -> Self {
        Self::custom(move |_| value)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PotentialSpec::HarmonicLattice { harmonic, lattice } => {
                let trap: f64 = harmonic.iter().zip(x).map(|(w, xi)| 0.5 * w * xi * xi).sum();
                let periodic = lattice.map_or(0.0, |l| {
                    l.amplitude
                        * x.iter()
                            .map(|xi| {
                                let s = match l.shape {
                                    LatticeShape::Sin => (l.wavenumber * xi).sin(),
                                    LatticeShape::Cos => (l.wavenumber * xi).cos(),
                                };
                                s * s
                            })
                            .sum::<f64>()
                });
                trap + periodic
            }
            PotentialSpec::Custom(f) => f(x),
        }
    }

    fn validate(&self, dims: usize) -> Result<()> {
        if let PotentialSpec::HarmonicLattice { harmonic, .. } = self {
            if harmonic.len() != dims {
                return Err(Error::InvalidSpec(format!(
                    "potential has {} harmonic weights for a {dims}-d grid",
                    harmonic.len()
                )));
            }
            if harmonic.iter().any(|w| !(*w >= 0.0)) {
                return Err(Error::InvalidSpec("harmonic weights must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Potential values at every grid node, row-major.
pub fn sample_potential(pot: &PotentialSpec, grid: &Grid) -> Result<Vec<f64>> {
    pot.validate(grid.dims())?;
    grid.nodes()
        .enumerate()
        .map(|(node, x)| {
            let value = pot.eval(&x);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonfinitePotential { node, value })
            }
        })
        .collect()
}
