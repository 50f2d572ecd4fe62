//! Fourier plumbing on an equispaced periodic grid.
//!
//! Coefficients are normalized so that `u(x_j) = Σ_m û(m) e^{i ξ_m x_j}` with
//! `ξ_m = 2πm/L`; index `j` of a coefficient vector holds mode `m = j` for
//! `j ≤ n/2` and `m = j − n` above.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Relative noise floor used when differentiating sampled smooth data.
/// Coefficients below `CHOP_REL · max|û|` are treated as round-off.
pub const CHOP_REL: f64 = 1e-14;

#[derive(Clone)]
pub struct FourierGrid {
    n: usize,
    length: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl FourierGrid {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            length,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| j as f64 * self.dx()).collect()
    }

    /// Signed mode number stored at index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Storage index of signed mode `m` (|m| ≤ n/2).
    pub fn index(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    /// Wavenumbers for odd-order derivatives: the Nyquist mode is zeroed so
    /// that real data stays real.
    pub fn odd_wavenumbers(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                if self.n % 2 == 0 && j == self.n / 2 {
                    0.0
                } else {
                    self.wavenumber(j)
                }
            })
            .collect()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn forward_complex(&self, data: &mut [Complex64]) {
        self.fwd.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    pub fn inverse_complex(&self, data: &mut [Complex64]) {
        self.inv.process(data);
    }

    pub fn forward(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_complex(&mut buf);
        buf
    }

    /// Synthesis; the imaginary part is dropped.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse_complex(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// `order`-th derivative of a real coefficient set.
    pub fn differentiate_coeffs(&self, coeffs: &[Complex64], order: u32) -> Vec<Complex64> {
        let xi = if order % 2 == 1 {
            self.odd_wavenumbers()
        } else {
            self.wavenumbers()
        };
        coeffs
            .iter()
            .zip(xi)
            .map(|(c, x)| c * Complex64::new(0.0, x).powu(order))
            .collect()
    }

    /// Spectral derivative of sampled smooth data with the round-off floor
    /// removed before differentiation.
    pub fn derivative(&self, samples: &[f64], order: u32) -> Vec<f64> {
        let mut coeffs = self.forward(samples);
        chop(&mut coeffs, CHOP_REL);
        self.inverse(&self.differentiate_coeffs(&coeffs, order))
    }

    /// Uniform trapezoid rule, spectrally accurate for smooth periodic data.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples.iter().sum::<f64>() * self.dx()
    }

    /// `⟨f, g⟩ = ∫ f g dx` over one period.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.dx()
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }
}

/// Zero every coefficient whose magnitude is below `rel · max|c|`.
pub fn chop(coeffs: &mut [Complex64], rel: f64) {
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let floor = rel * max;
    for c in coeffs.iter_mut() {
        if c.norm() < floor {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
