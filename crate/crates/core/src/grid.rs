//! Uniform periodic grids on [0, 2pi)^d, d = 1 or 2.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Periodic grid with N points per dimension (N a power of two, N >= 8).
#[derive(Clone)]
pub struct PeriodicGrid {
    d: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("d", &self.d)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n
    }
}

impl PeriodicGrid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(Error::InvalidArgument(format!("dimension {d} not supported")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size {n} must be a power of two >= 8"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(PeriodicGrid {
            d,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    /// Total number of samples N^d.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing h = 2pi / N.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Physical coordinate of flat index `idx` (row-major, x slowest).
    pub fn coord(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        match self.d {
            1 => vec![idx as f64 * h],
            _ => vec![(idx / self.n) as f64 * h, (idx % self.n) as f64 * h],
        }
    }

    /// Signed integer frequency for a storage index along one axis.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Integer frequency vector of flat spectral index `idx`.
    pub fn mode(&self, idx: usize) -> Vec<i64> {
        match self.d {
            1 => vec![self.wavenumber(idx)],
            _ => vec![self.wavenumber(idx / self.n), self.wavenumber(idx % self.n)],
        }
    }

    /// |k| of flat spectral index `idx`.
    pub fn mode_norm(&self, idx: usize) -> f64 {
        match self.d {
            1 => self.wavenumber(idx).abs() as f64,
            _ => {
                let k1 = self.wavenumber(idx / self.n) as f64;
                let k2 = self.wavenumber(idx % self.n) as f64;
                (k1 * k1 + k2 * k2).sqrt()
            }
        }
    }

    /// Flat spectral index of an integer frequency vector.
    pub fn index_of_mode(&self, k: &[i64]) -> usize {
        let n = self.n as i64;
        let wrap = |ki: i64| ((ki % n) + n) % n;
        match self.d {
            1 => wrap(k[0]) as usize,
            _ => (wrap(k[0]) * n + wrap(k[1])) as usize,
        }
    }

    /// Forward DFT with 1/N^d normalization: a pure mode cos(kx) carries
    /// coefficient 1/2 at +-k.
    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_all(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf
    }

    /// Inverse transform; imaginary residue of conjugate-symmetric data is dropped.
    pub fn inverse_transform(&self, spectral: &[Complex64]) -> Vec<f64> {
        assert_eq!(spectral.len(), self.len());
        let mut buf = spectral.to_vec();
        self.fft_all(&mut buf, false);
        buf.iter().map(|c| c.re).collect()
    }

    /// Inverse transform keeping the complex samples.
    pub fn inverse_transform_complex(&self, spectral: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spectral.to_vec();
        self.fft_all(&mut buf, false);
        buf
    }

    fn fft_all(&self, buf: &mut [Complex64], forward: bool) {
        let plan = if forward { &self.forward } else { &self.inverse };
        match self.d {
            1 => plan.process(buf),
            _ => {
                let n = self.n;
                // rows (fast axis contiguous)
                for row in buf.chunks_exact_mut(n) {
                    plan.process(row);
                }
                // columns via transpose
                transpose_square(buf, n);
                for row in buf.chunks_exact_mut(n) {
                    plan.process(row);
                }
                transpose_square(buf, n);
            }
        }
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
