//! Fourier machinery on a periodic grid: transforms, derivative multipliers,
//! 2/3-rule dealiasing and band-limited interpolation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::domain::Grid1D;

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    origin: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("n", &self.n)
            .field("origin", &self.origin)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid1D) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let scale = 2.0 * PI / grid.period();
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * scale
            })
            .collect();
        Spectral {
            n,
            origin: -grid.half_length(),
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular wavenumbers in FFT order; the Nyquist entry is positive.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Modes kept by the 2/3 rule.
    pub fn keeps_mode(&self, j: usize) -> bool {
        let m = if j <= self.n / 2 { j } else { self.n - j };
        3 * m < self.n
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalised, real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.inverse.process(&mut coeffs);
        let scale = 1.0 / self.n as f64;
        coeffs.into_iter().map(|c| c.re * scale).collect()
    }

    /// Fourier multiplier `(i kappa)^order`, zero at Nyquist for odd orders.
    pub fn derivative_multiplier(&self, j: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && self.is_nyquist(j) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[j]).powu(order)
    }

    pub fn derivative(&self, values: &[f64], order: u32) -> Vec<f64> {
        let mut c = self.forward(values);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj *= self.derivative_multiplier(j, order);
        }
        self.inverse(c)
    }

    /// Evaluates the trigonometric interpolant of `coeffs` (from [`Spectral::forward`]) at `x`.
    pub fn interpolate(&self, coeffs: &[Complex64], x: f64) -> f64 {
        let y = x - self.origin;
        let half = self.n / 2;
        let mut sum = coeffs[0].re;
        for (j, c) in coeffs.iter().enumerate().take(half).skip(1) {
            let phase = Complex64::from_polar(1.0, self.wavenumbers[j] * y);
            sum += 2.0 * (c * phase).re;
        }
        sum += coeffs[half].re * (self.wavenumbers[half] * y).cos();
        sum / self.n as f64
    }
}
