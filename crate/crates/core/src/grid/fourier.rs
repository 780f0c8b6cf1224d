use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Multidimensional FFT over row-major data of a fixed shape.
///
/// Only real fields are transformed through this type, always followed by
/// multiplication with a real symbol that is even in the wavenumber. Such a
/// multiplier maps real vectors to real vectors, so two real vectors can be
/// pushed through one complex transform as `x + i y`.
#[derive(Clone)]
pub struct FourierTransform {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierTransform").field("shape", &self.shape).finish()
    }
}

impl FourierTransform {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self {
            shape: shape.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex<f64>]) {
        self.transform(data, &self.forward);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&self, data: &mut [Complex<f64>]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex<f64>], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len());
        let dims = self.shape.len();
        for axis in 0..dims {
            let n = self.shape[axis];
            if n == 1 {
                continue;
            }
            let plan = &plans[axis];
            let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
            let stride: usize = self.shape[axis + 1..].iter().product();
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer: usize = self.shape[..axis].iter().product();
            let block = n * stride;
            let mut lines = vec![Complex::default(); block];
            for o in 0..outer {
                let chunk = &mut data[o * block..(o + 1) * block];
                // gather: line s holds chunk[j * stride + s] for j in 0..n
                for j in 0..n {
                    let row = &chunk[j * stride..(j + 1) * stride];
                    for (s, value) in row.iter().enumerate() {
                        lines[s * n + j] = *value;
                    }
                }
                plan.process_with_scratch(&mut lines, &mut scratch);
                for j in 0..n {
                    let row = &mut chunk[j * stride..(j + 1) * stride];
                    for (s, value) in row.iter_mut().enumerate() {
                        *value = lines[s * n + j];
                    }
                }
            }
        }
    }

    /// `out = F⁻¹(symbol ∘ F x)` for a real vector `x`.
    pub fn apply_multiplier(&self, x: &[f64], symbol: &[f64], out: &mut [f64]) {
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.multiply_in_place(&mut buf, symbol);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    /// Applies the same real even multiplier to two real vectors with a
    /// single complex transform pair.
    pub fn apply_multiplier_pair(
        &self,
        x1: &[f64],
        x2: &[f64],
        symbol: &[f64],
        out1: &mut [f64],
        out2: &mut [f64],
    ) {
        let mut buf: Vec<Complex<f64>> = x1.iter().zip(x2).map(|(&a, &b)| Complex::new(a, b)).collect();
        self.multiply_in_place(&mut buf, symbol);
        for ((o1, o2), b) in out1.iter_mut().zip(out2.iter_mut()).zip(&buf) {
            *o1 = b.re;
            *o2 = b.im;
        }
    }

    fn multiply_in_place(&self, buf: &mut [Complex<f64>], symbol: &[f64]) {
        let scale = 1.0 / self.len() as f64;
        self.forward(buf);
        for (b, s) in buf.iter_mut().zip(symbol) {
            *b *= s * scale;
        }
        self.inverse(buf);
    }

    /// `|k|²` in transform order, with integer frequencies in `[-n/2, n/2)`
    /// scaled by `2π / length` on each axis.
    pub fn laplacian_symbol(&self, lengths: &[f64]) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self
            .shape
            .iter()
            .zip(lengths)
            .map(|(&n, &len)| wavenumbers(n, len).into_iter().map(|k| k * k).collect())
            .collect();
        let mut symbol = vec![0.0; self.len()];
        for (index, value) in symbol.iter_mut().enumerate() {
            let mut rest = index;
            for axis in (0..self.shape.len()).rev() {
                let n = self.shape[axis];
                *value += per_axis[axis][rest % n];
                rest /= n;
            }
        }
        symbol
    }
}

/// Angular wavenumbers of an `n`-point periodic grid of the given length,
/// in FFT output order.
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    let base = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
            base * m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumber_order() {
        let k = wavenumbers(8, 2.0 * PI);
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn forward_inverse_roundtrip_3d() {
        let t = FourierTransform::new(&[4, 3, 5]);
        let orig: Vec<Complex<f64>> = (0..60).map(|i| Complex::new(i as f64 * 0.1, (i % 7) as f64)).collect();
        let mut data = orig.clone();
        t.forward(&mut data);
        t.inverse(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a / 60.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_direct_dft_2d() {
        let shape = [4usize, 6];
        let t = FourierTransform::new(&shape);
        let x: Vec<Complex<f64>> = (0..24).map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut fast = x.clone();
        t.forward(&mut fast);
        for k0 in 0..4 {
            for k1 in 0..6 {
                let mut acc = Complex::new(0.0, 0.0);
                for j0 in 0..4 {
                    for j1 in 0..6 {
                        let phase = -2.0 * PI * ((k0 * j0) as f64 / 4.0 + (k1 * j1) as f64 / 6.0);
                        acc += x[j0 * 6 + j1] * Complex::from_polar(1.0, phase);
                    }
                }
                assert!((acc - fast[k0 * 6 + k1]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pair_matches_single() {
        let t = FourierTransform::new(&[8, 8]);
        let sym = t.laplacian_symbol(&[3.0, 5.0]);
        let x1: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let x2: Vec<f64> = (0..64).map(|i| (i as f64 * 0.11).cos()).collect();
        let (mut a1, mut a2, mut b1, mut b2) = (vec![0.0; 64], vec![0.0; 64], vec![0.0; 64], vec![0.0; 64]);
        t.apply_multiplier(&x1, &sym, &mut a1);
        t.apply_multiplier(&x2, &sym, &mut a2);
        t.apply_multiplier_pair(&x1, &x2, &sym, &mut b1, &mut b2);
        for i in 0..64 {
            assert!((a1[i] - b1[i]).abs() < 1e-11);
            assert!((a2[i] - b2[i]).abs() < 1e-11);
        }
    }
}
