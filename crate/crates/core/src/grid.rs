//! Periodic box truncation of `R^N` and the discrete Fourier machinery on it.
//!
//! Fields are stored row-major: in two dimensions the flat index is
//! `i * n + j` with `i` the first axis. Forward transforms are unnormalized,
//! the inverse carries the `1 / n^N` factor, so mode 0 of a forward transform
//! is the plain sum of the samples.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{positive, Error, Result};

/// Default box half-length for one-dimensional runs.
pub const DEFAULT_HALF_LENGTH: f64 = 64.0;
/// Default number of points for one-dimensional runs.
pub const DEFAULT_POINTS: usize = 4096;
/// Fraction of points, per axis and per side, that forms the localization guard band.
pub const EDGE_FRACTION: f64 = 0.05;

#[derive(Clone)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    half_length: f64,
    axis_wavenumbers: Vec<f64>,
    xi_sq: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("points_per_dim", &self.n)
            .field("half_length", &self.half_length)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.half_length == other.half_length
    }
}

impl SpectralGrid {
    pub fn new(dim: usize, points_per_dim: usize, half_length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points_per_dim < 4 || !points_per_dim.is_power_of_two() {
            return Err(Error::InvalidParameter {
                name: "points_per_dim",
                constraint: format!("must be a power of two >= 4, got {points_per_dim}"),
            });
        }
        let half_length = positive("half_length", half_length)?;
        let n = points_per_dim;
        let base = 2.0 * PI / (2.0 * half_length);
        let axis_wavenumbers: Vec<f64> = (0..n).map(|j| base * signed_index(j, n) as f64).collect();
        let xi_sq = match dim {
            1 => axis_wavenumbers.iter().map(|k| k * k).collect(),
            _ => {
                let mut out = Vec::with_capacity(n * n);
                for ki in &axis_wavenumbers {
                    for kj in &axis_wavenumbers {
                        out.push(ki * ki + kj * kj);
                    }
                }
                out
            }
        };
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            half_length,
            axis_wavenumbers,
            xi_sq,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// The default one-dimensional grid: 4096 points on `[-64, 64)`.
    pub fn default_1d() -> Self {
        Self::new(1, DEFAULT_POINTS, DEFAULT_HALF_LENGTH).expect("valid default grid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn points_per_dim(&self) -> usize {
        self.n
    }
    pub fn half_length(&self) -> f64 {
        self.half_length
    }
    /// Total number of samples (equal to the number of modes).
    pub fn len(&self) -> usize {
        self.xi_sq.len()
    }
    pub fn is_empty(&self) -> bool {
        self.xi_sq.is_empty()
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }
    /// Volume of one grid cell, `dx^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    /// Largest wavenumber magnitude along one axis.
    pub fn nyquist_radius(&self) -> f64 {
        PI / self.spacing()
    }

    /// `|xi|^2` per mode, in storage order.
    pub fn xi_sq(&self) -> &[f64] {
        &self.xi_sq
    }

    /// Wavenumbers of one axis, in FFT order.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.axis_wavenumbers
    }

    /// Integer mode indices of a flat mode position.
    pub fn mode_indices(&self, mode: usize) -> [i64; 2] {
        match self.dim {
            1 => [signed_index(mode, self.n), 0],
            _ => [signed_index(mode / self.n, self.n), signed_index(mode % self.n, self.n)],
        }
    }

    /// Wave vector of a flat mode position (second entry is 0 when `N = 1`).
    pub fn wavevector(&self, mode: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.axis_wavenumbers[mode], 0.0],
            _ => [
                self.axis_wavenumbers[mode / self.n],
                self.axis_wavenumbers[mode % self.n],
            ],
        }
    }

    /// Flat position of the mode with the given integer indices.
    pub fn mode_position(&self, indices: [i64; 2]) -> usize {
        let wrap = |k: i64| k.rem_euclid(self.n as i64) as usize;
        match self.dim {
            1 => wrap(indices[0]),
            _ => wrap(indices[0]) * self.n + wrap(indices[1]),
        }
    }

    /// Coordinates of one axis, `-half_length + i dx`.
    pub fn axis_coordinates(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.n).map(|i| -self.half_length + i as f64 * dx).collect()
    }

    /// Position of a flat sample index.
    pub fn point(&self, index: usize) -> [f64; 2] {
        let dx = self.spacing();
        let coord = |i: usize| -self.half_length + i as f64 * dx;
        match self.dim {
            1 => [coord(index), 0.0],
            _ => [coord(index / self.n), coord(index % self.n)],
        }
    }

    /// Squared distance to the origin of every sample.
    pub fn radius_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let p = self.point(i);
                p[0] * p[0] + p[1] * p[1]
            })
            .collect()
    }

    /// Samples a function of position.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "expected {} samples, got {len}",
                self.len()
            )))
        }
    }

    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        let mut buf: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform(&mut buf, &*self.forward);
        Ok(buf)
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(spectrum.len())?;
        let mut buf = spectrum.to_vec();
        self.transform(&mut buf, &*self.inverse);
        let scale = 1.0 / self.len() as f64;
        Ok(buf.into_iter().map(|z| z.re * scale).collect())
    }

    fn transform(&self, buf: &mut [Complex64], plan: &dyn Fft<f64>) {
        let n = self.n;
        match self.dim {
            1 => plan.process(buf),
            _ => {
                // rows are contiguous
                plan.process(buf);
                let mut column = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        column[i] = buf[i * n + j];
                    }
                    plan.process(&mut column);
                    for i in 0..n {
                        buf[i * n + j] = column[i];
                    }
                }
            }
        }
    }

    /// Discrete integral `sum f dx^N`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() * self.cell_volume()
    }

    /// Whether a flat sample index lies in the outer guard band.
    pub fn is_edge(&self, index: usize) -> bool {
        let band = ((EDGE_FRACTION * self.n as f64).ceil() as usize).max(1);
        let on_edge = |i: usize| i < band || i >= self.n - band;
        match self.dim {
            1 => on_edge(index),
            _ => on_edge(index / self.n) || on_edge(index % self.n),
        }
    }

    /// Largest magnitude in the guard band divided by the global peak
    /// (0 for an identically zero field).
    pub fn edge_ratio(&self, field: &[f64]) -> f64 {
        let peak = sup_norm(field);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = field
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_edge(*i))
            .fold(0.0f64, |m, (_, x)| m.max(x.abs()));
        edge / peak
    }

    /// Mask selecting the modes kept by the 2/3 truncation rule.
    pub fn two_thirds_mask(&self) -> Vec<bool> {
        let cutoff = self.n as i64 / 3;
        (0..self.len())
            .map(|m| {
                let k = self.mode_indices(m);
                k[0].abs() <= cutoff && k[1].abs() <= cutoff
            })
            .collect()
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

pub fn sup_norm(field: &[f64]) -> f64 {
    field.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Samples `(u, v)` of a field pair on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldPair {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::GridMismatch(format!(
                "u has {} samples, v has {}",
                u.len(),
                v.len()
            )));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "data0",
                constraint: "entries must be finite".into(),
            });
        }
        Ok(Self { u, v })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            u: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn sup_u(&self) -> f64 {
        sup_norm(&self.u)
    }

    pub fn sup_v(&self) -> f64 {
        sup_norm(&self.v)
    }

    pub fn min_entry(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// Admissible initial data: entrywise non-negative and not both zero.
    pub fn is_admissible(&self) -> bool {
        self.min_entry() >= 0.0 && (self.sup_u() > 0.0 || self.sup_v() > 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            u: self.u.iter().map(|x| x * factor).collect(),
            v: self.v.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn to_spectrum(&self, grid: &SpectralGrid) -> Result<SpectrumPair> {
        Ok(SpectrumPair {
            u_hat: grid.forward(&self.u)?,
            v_hat: grid.forward(&self.v)?,
        })
    }
}

/// Discrete Fourier coefficients of a field pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPair {
    pub u_hat: Vec<Complex64>,
    pub v_hat: Vec<Complex64>,
}

impl SpectrumPair {
    pub fn zeros(len: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            u_hat: vec![z; len],
            v_hat: vec![z; len],
        }
    }

    pub fn len(&self) -> usize {
        self.u_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_hat.is_empty()
    }

    pub fn to_fields(&self, grid: &SpectralGrid) -> Result<FieldPair> {
        Ok(FieldPair {
            u: grid.inverse(&self.u_hat)?,
            v: grid.inverse(&self.v_hat)?,
        })
    }

    /// Largest deviation from `c(-k) = conj(c(k))` relative to the largest
    /// coefficient.
    pub fn conjugate_asymmetry(&self, grid: &SpectralGrid) -> f64 {
        let scale = self
            .u_hat
            .iter()
            .chain(&self.v_hat)
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for m in 0..self.len() {
            let k = grid.mode_indices(m);
            let partner = grid.mode_position([-k[0], -k[1]]);
            for arr in [&self.u_hat, &self.v_hat] {
                worst = worst.max((arr[m] - arr[partner].conj()).norm());
            }
        }
        worst / scale
    }
}
