//! Two-dimensional FFTs on square periodic grids (row-major, `j * m + i`).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft2 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn side(&self) -> usize {
        self.m
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m);
        // rows
        fft.process(data);
        // columns, via a transposed copy
        let mut col = vec![Complex64::default(); m * m];
        for j in 0..m {
            for i in 0..m {
                col[i * m + j] = data[j * m + i];
            }
        }
        fft.process(&mut col);
        for j in 0..m {
            for i in 0..m {
                data[j * m + i] = col[i * m + j];
            }
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/m^2` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let s = 1.0 / (self.m * self.m) as f64;
        for z in data.iter_mut() {
            *z *= s;
        }
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data);
        data
    }

    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data);
        data.into_iter().map(|z| z.re).collect()
    }
}

/// Signed frequency of FFT bin `k` on a grid of size `m`, in `(-m/2, m/2]`.
pub fn frequency(k: usize, m: usize) -> i64 {
    if 2 * k > m {
        k as i64 - m as i64
    } else {
        k as i64
    }
}

/// Frequency used for first derivatives: the Nyquist bin is zeroed so the
/// spectral derivative stays real and skew-adjoint.
pub fn derivative_frequency(k: usize, m: usize) -> f64 {
    if m.is_multiple_of(2) && 2 * k == m {
        0.0
    } else {
        frequency(k, m) as f64
    }
}
