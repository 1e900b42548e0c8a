//! Fourier-side algebra of the linear exchanger.
//!
//! At a wave vector `xi` the linear system reduces to `y' = A y` with
//! `A = [[-c|xi|^2 - mu, nu], [mu, -d|xi|^2 - nu]]`. Everything here is a
//! closed-form function of `|xi|^2`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, SpectrumPair};
use crate::params::ExchangerParams;

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// The matrix `A(xi)` itself.
pub fn generator(xi_sq: f64, params: &ExchangerParams) -> Mat2 {
    [
        [-params.c() * xi_sq - params.mu(), params.nu()],
        [params.mu(), -params.d() * xi_sq - params.nu()],
    ]
}

/// Symbol values at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSymbol {
    pub xi_sq: f64,
    pub r: f64,
    /// `sqrt(s)`, kept instead of `s` because every formula wants the root.
    pub sqrt_s: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl ModeSymbol {
    pub fn new(xi_sq: f64, params: &ExchangerParams) -> Self {
        let (c, d, mu, nu) = (params.c(), params.d(), params.mu(), params.nu());
        let r = 0.5 * (c - d) * xi_sq + 0.5 * (mu - nu);
        let sqrt_s = r.hypot((mu * nu).sqrt());
        let half_trace = 0.5 * (c + d) * xi_sq + 0.5 * (mu + nu);
        let det = c * d * xi_sq * xi_sq + (c * nu + d * mu) * xi_sq;
        let lambda_minus = -(half_trace + sqrt_s);
        // lambda_plus * lambda_minus = det, and this quotient has no cancellation.
        let lambda_plus = -det / (half_trace + sqrt_s);
        Self {
            xi_sq,
            r,
            sqrt_s,
            lambda_plus,
            lambda_minus,
        }
    }

    pub fn at_radius(radius: f64, params: &ExchangerParams) -> Self {
        Self::new(radius * radius, params)
    }

    pub fn s(&self) -> f64 {
        self.sqrt_s * self.sqrt_s
    }

    /// The dispersal symbol `L`, equal to `lambda_plus`.
    pub fn l(&self) -> f64 {
        self.lambda_plus
    }

    /// `(1 - r/sqrt(s), 1 + r/sqrt(s))` without cancellation.
    fn one_minus_plus(&self, params: &ExchangerParams) -> (f64, f64) {
        let mn = params.mu() * params.nu();
        let rho = self.r / self.sqrt_s;
        if self.r >= 0.0 {
            (mn / (self.sqrt_s * (self.sqrt_s + self.r)), 1.0 + rho)
        } else {
            (1.0 - rho, mn / (self.sqrt_s * (self.sqrt_s - self.r)))
        }
    }

    /// `(persistent, evanescent)` spectral projectors of `A(xi)`.
    pub fn projectors(&self, params: &ExchangerParams) -> (Mat2, Mat2) {
        let (minus, plus) = self.one_minus_plus(params);
        let off_u = params.nu() / (2.0 * self.sqrt_s);
        let off_v = params.mu() / (2.0 * self.sqrt_s);
        (
            [[0.5 * minus, off_u], [off_v, 0.5 * plus]],
            [[0.5 * plus, -off_u], [-off_v, 0.5 * minus]],
        )
    }

    /// `exp(t A(xi))`.
    pub fn propagator(&self, t: f64, params: &ExchangerParams) -> Mat2 {
        let (minus, plus) = self.one_minus_plus(params);
        let ep = (t * self.lambda_plus).exp();
        let em = (t * self.lambda_minus).exp();
        // ep - em with lambda_plus - lambda_minus = 2 sqrt(s)
        let diff = -ep * (-2.0 * t * self.sqrt_s).exp_m1();
        let k = diff / (2.0 * self.sqrt_s);
        [
            [0.5 * (minus * ep + plus * em), params.nu() * k],
            [params.mu() * k, 0.5 * (plus * ep + minus * em)],
        ]
    }
}

/// Per-mode symbols on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    modes: Vec<ModeSymbol>,
}

pub fn build_symbols(grid: &SpectralGrid, params: &ExchangerParams) -> SymbolTable {
    SymbolTable {
        modes: grid.xi_sq().iter().map(|&k| ModeSymbol::new(k, params)).collect(),
    }
}

impl SymbolTable {
    pub fn len(&self) -> usize {
        self.modes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
    pub fn mode(&self, index: usize) -> &ModeSymbol {
        &self.modes[index]
    }
    pub fn modes(&self) -> &[ModeSymbol] {
        &self.modes
    }
    pub fn r(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.r).collect()
    }
    pub fn s(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.s()).collect()
    }
    pub fn l(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.l()).collect()
    }
    pub fn lambda_plus(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda_plus).collect()
    }
    pub fn lambda_minus(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda_minus).collect()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "symbol table has {} modes, spectrum has {len}",
                self.len()
            )))
        }
    }
}

pub fn propagator(t: f64, mode_index: usize, symbols: &SymbolTable, params: &ExchangerParams) -> Mat2 {
    symbols.mode(mode_index).propagator(t, params)
}

pub fn split_projectors(mode_index: usize, symbols: &SymbolTable, params: &ExchangerParams) -> (Mat2, Mat2) {
    symbols.mode(mode_index).projectors(params)
}

/// `((c nu + d mu)/(mu + nu), min(c, d))`: the limits of `-L/|xi|^2` at low
/// and high frequency.
pub fn dispersal_asymptotics(params: &ExchangerParams) -> (f64, f64) {
    let (c, d, mu, nu) = (params.c(), params.d(), params.mu(), params.nu());
    ((c * nu + d * mu) / (mu + nu), c.min(d))
}

fn apply_mat(m: &Mat2, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * u + m[0][1] * v, m[1][0] * u + m[1][1] * v)
}

fn map_modes<F: Fn(usize) -> Mat2>(spectrum: &SpectrumPair, f: F) -> SpectrumPair {
    let (u_hat, v_hat) = (0..spectrum.len())
        .map(|i| apply_mat(&f(i), spectrum.u_hat[i], spectrum.v_hat[i]))
        .unzip();
    SpectrumPair { u_hat, v_hat }
}

/// The persistent part of the data, `P(xi) (u_hat, v_hat)` mode by mode.
pub fn persistent_data(spectrum0: &SpectrumPair, symbols: &SymbolTable, params: &ExchangerParams) -> Result<SpectrumPair> {
    symbols.check(spectrum0.len())?;
    Ok(map_modes(spectrum0, |i| symbols.mode(i).projectors(params).0))
}

/// The evanescent part of the data, `(I - P(xi)) (u_hat, v_hat)`.
pub fn evanescent_data(spectrum0: &SpectrumPair, symbols: &SymbolTable, params: &ExchangerParams) -> Result<SpectrumPair> {
    symbols.check(spectrum0.len())?;
    Ok(map_modes(spectrum0, |i| symbols.mode(i).projectors(params).1))
}

/// Multiplies every mode by `L(xi)`.
pub fn apply_dispersal(spectrum: &[Complex64], symbols: &SymbolTable) -> Result<Vec<Complex64>> {
    symbols.check(spectrum.len())?;
    Ok(spectrum
        .iter()
        .zip(symbols.modes())
        .map(|(z, m)| z * m.l())
        .collect())
}

/// Multiplies every mode by `exp(t * rate(mode))`.
pub fn scale_modes<F: Fn(&ModeSymbol) -> f64>(
    spectrum: &SpectrumPair,
    symbols: &SymbolTable,
    t: f64,
    rate: F,
) -> Result<SpectrumPair> {
    symbols.check(spectrum.len())?;
    let factors: Vec<f64> = symbols.modes().iter().map(|m| (t * rate(m)).exp()).collect();
    Ok(SpectrumPair {
        u_hat: spectrum.u_hat.iter().zip(&factors).map(|(z, f)| z * f).collect(),
        v_hat: spectrum.v_hat.iter().zip(&factors).map(|(z, f)| z * f).collect(),
    })
}

/// Propagator matrices for one fixed time, ready to apply repeatedly.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    t: f64,
    mats: Vec<Mat2>,
}

impl PropagatorTable {
    pub fn new(t: f64, symbols: &SymbolTable, params: &ExchangerParams) -> Self {
        Self {
            t,
            mats: symbols.modes().iter().map(|m| m.propagator(t, params)).collect(),
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn apply(&self, spectrum: &SpectrumPair) -> SpectrumPair {
        debug_assert_eq!(spectrum.len(), self.mats.len());
        map_modes(spectrum, |i| self.mats[i])
    }

    /// In-place variant on bare coefficient slices.
    pub fn apply_in_place(&self, u_hat: &mut [Complex64], v_hat: &mut [Complex64]) {
        for ((m, u), v) in self.mats.iter().zip(u_hat.iter_mut()).zip(v_hat.iter_mut()) {
            let (a, b) = apply_mat(m, *u, *v);
            *u = a;
            *v = b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Taylor series with scaling and squaring.
    fn expm_oracle(a: Mat2, t: f64) -> Mat2 {
        let norm = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())) * t;
        let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
        let scale = t / 2f64.powi(squarings as i32);
        let b = [[a[0][0] * scale, a[0][1] * scale], [a[1][0] * scale, a[1][1] * scale]];
        let mut sum = IDENTITY;
        let mut term = IDENTITY;
        for k in 1..30 {
            term = mat_mul(&term, &b);
            for row in term.iter_mut() {
                for x in row.iter_mut() {
                    *x /= k as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..squarings {
            sum = mat_mul(&sum, &sum);
        }
        sum
    }

    #[test]
    fn unit_rates_at_unit_frequency() {
        let m = ModeSymbol::new(1.0, &ExchangerParams::unit());
        assert_eq!(m.r, 0.0);
        assert!(close(m.s(), 1.0, 1e-15));
        assert!(close(m.l(), -1.0, 1e-15));
        assert!(close(m.lambda_minus, -3.0, 1e-15));
    }

    #[test]
    fn unequal_rates_at_unit_frequency() {
        let p = ExchangerParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
        let m = ModeSymbol::new(1.0, &p);
        assert!(close(m.r, -1.0, 1e-15));
        assert!(close(m.s(), 3.0, 1e-14));
        assert!(close(m.lambda_plus, -3.0 + 3f64.sqrt(), 1e-14));
        assert!(close(m.lambda_minus, -3.0 - 3f64.sqrt(), 1e-14));
    }

    #[test]
    fn dispersal_vanishes_at_origin() {
        for p in [
            ExchangerParams::new(0.3, 7.0, 2.0, 0.01).unwrap(),
            ExchangerParams::new(5.0, 1.0, 1e-3, 40.0).unwrap(),
        ] {
            assert_eq!(ModeSymbol::new(0.0, &p).l(), 0.0);
        }
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        let p = ExchangerParams::new(1.0, 2.0, 3.0, 4.0).unwrap();
        assert_eq!(ModeSymbol::new(2.5, &p).propagator(0.0, &p), IDENTITY);
    }

    #[test]
    fn propagator_unit_rates_at_origin() {
        let p = ExchangerParams::unit();
        let e = ModeSymbol::new(0.0, &p).propagator(2f64.ln() / 2.0, &p);
        let want = [[0.75, 0.25], [0.25, 0.75]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(e[i][j], want[i][j], 1e-15));
            }
        }
    }

    #[test]
    fn propagator_matches_series_oracle() {
        let cases = [
            (1.0, 2.0, 1.0, 2.0, 1.0, 0.7),
            (0.1, 3.0, 0.5, 0.05, 4.0, 9.0),
            (2.0, 2.0, 1.0, 1.0, 0.0, 10.0),
            (1.0, 1.0 + 1e-9, 1.0, 1.0, 1e-6, 1e-3),
        ];
        for (c, d, mu, nu, xi_sq, t) in cases {
            let p = ExchangerParams::new(c, d, mu, nu).unwrap();
            let got = ModeSymbol::new(xi_sq, &p).propagator(t, &p);
            let want = expm_oracle(generator(xi_sq, &p), t);
            for i in 0..2 {
                for j in 0..2 {
                    assert!(close(got[i][j], want[i][j], 1e-12), "{got:?} vs {want:?}");
                }
            }
        }
    }

    #[test]
    fn projectors_balanced_case() {
        let p = ExchangerParams::new(2.0, 2.0, 3.0, 3.0).unwrap();
        let (pers, ev) = ModeSymbol::new(4.0, &p).projectors(&p);
        assert_eq!(pers, [[0.5, 0.5], [0.5, 0.5]]);
        assert_eq!(ev, [[0.5, -0.5], [-0.5, 0.5]]);
    }

    #[test]
    fn asymptotic_coefficients() {
        let p = ExchangerParams::new(1.0, 2.0, 1.0, 2.0).unwrap();
        let (low, high) = dispersal_asymptotics(&p);
        assert!(close(low, 4.0 / 3.0, 1e-15));
        assert_eq!(high, 1.0);
        let m = ModeSymbol::at_radius(1e-3, &p);
        assert!(close(-m.l() / m.xi_sq, low, 1e-2 * low));
        let m = ModeSymbol::at_radius(1e3, &p);
        assert!(close(-m.l() / m.xi_sq, high, 1e-2 * high));
    }

    #[test]
    fn persistent_data_of_lone_u_at_origin() {
        let grid = SpectralGrid::new(1, 8, 1.0).unwrap();
        let p = ExchangerParams::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let syms = build_symbols(&grid, &p);
        let mut spec = SpectrumPair::zeros(8);
        spec.u_hat[0] = Complex64::new(3.0, 0.0);
        let pers = persistent_data(&spec, &syms, &p).unwrap();
        assert!(close(pers.u_hat[0].re, 2.0, 1e-14));
        assert!(close(pers.v_hat[0].re, 1.0, 1e-14));
    }

    #[test]
    fn dispersal_of_constant_is_zero() {
        let grid = SpectralGrid::new(1, 8, 1.0).unwrap();
        let p = ExchangerParams::new(1.0, 3.0, 1.0, 2.0).unwrap();
        let syms = build_symbols(&grid, &p);
        let mut f = vec![Complex64::new(0.0, 0.0); 8];
        f[0] = Complex64::new(5.0, 0.0);
        assert!(apply_dispersal(&f, &syms).unwrap().iter().all(|z| z.norm() == 0.0));
        assert!(apply_dispersal(&f[..4], &syms).is_err());
    }
}
