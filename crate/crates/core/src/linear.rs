//! Exact-in-time evolution of the linear exchanger and the decay fits built
//! on it.

use crate::error::{Error, Result};
use crate::grid::{sup_norm, FieldPair, SpectralGrid, SpectrumPair};
use crate::params::ExchangerParams;
use crate::spectral::{build_symbols, evanescent_data, persistent_data, scale_modes, PropagatorTable, SymbolTable};

/// Samples below this are treated as lost to roundoff.
pub const UNDERFLOW_FLOOR: f64 = 1e-14;
/// Edge-to-peak ratio above which a field is considered to have wrapped.
pub const LOCALIZATION_TOL: f64 = 1e-8;
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub total: FieldPair,
    pub persistent: FieldPair,
    pub evanescent: FieldPair,
    pub time: f64,
}

/// Linear evolution from fixed data; transforms and symbols are computed
/// once and reused for every requested time.
#[derive(Debug, Clone)]
pub struct LinearEvolver {
    grid: SpectralGrid,
    params: ExchangerParams,
    symbols: SymbolTable,
    spectrum0: SpectrumPair,
    persistent0: SpectrumPair,
    evanescent0: SpectrumPair,
}

impl LinearEvolver {
    pub fn new(data0: &FieldPair, grid: &SpectralGrid, params: &ExchangerParams) -> Result<Self> {
        let spectrum0 = data0.to_spectrum(grid)?;
        let symbols = build_symbols(grid, params);
        let persistent0 = persistent_data(&spectrum0, &symbols, params)?;
        let evanescent0 = evanescent_data(&spectrum0, &symbols, params)?;
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            symbols,
            spectrum0,
            persistent0,
            evanescent0,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name: "t",
                constraint: format!("must be finite and >= 0, got {t}"),
            })
        }
    }

    pub fn total_spectrum(&self, t: f64) -> Result<SpectrumPair> {
        Self::check_time(t)?;
        Ok(PropagatorTable::new(t, &self.symbols, &self.params).apply(&self.spectrum0))
    }

    pub fn total(&self, t: f64) -> Result<FieldPair> {
        self.total_spectrum(t)?.to_fields(&self.grid)
    }

    pub fn persistent(&self, t: f64) -> Result<FieldPair> {
        Self::check_time(t)?;
        scale_modes(&self.persistent0, &self.symbols, t, |m| m.lambda_plus)?.to_fields(&self.grid)
    }

    pub fn evanescent(&self, t: f64) -> Result<FieldPair> {
        Self::check_time(t)?;
        scale_modes(&self.evanescent0, &self.symbols, t, |m| m.lambda_minus)?.to_fields(&self.grid)
    }

    pub fn solve(&self, t: f64) -> Result<LinearSolution> {
        Ok(LinearSolution {
            total: self.total(t)?,
            persistent: self.persistent(t)?,
            evanescent: self.evanescent(t)?,
            time: t,
        })
    }

    /// One trace row per requested time.
    pub fn trace(&self, times: &[f64]) -> Result<Vec<LinearTraceRow>> {
        times
            .iter()
            .map(|&t| {
                let total = self.total(t)?;
                let ev = self.evanescent(t)?;
                Ok(LinearTraceRow {
                    t,
                    sup_u: total.sup_u(),
                    sup_v: total.sup_v(),
                    mass_u: self.grid.integrate(&total.u),
                    mass_v: self.grid.integrate(&total.v),
                    evanescent_sup: ev.sup_u().max(ev.sup_v()),
                    edge_ratio: self.grid.edge_ratio(&total.u).max(self.grid.edge_ratio(&total.v)),
                })
            })
            .collect()
    }
}

pub fn solve_linear(data0: &FieldPair, t: f64, grid: &SpectralGrid, params: &ExchangerParams) -> Result<LinearSolution> {
    LinearEvolver::new(data0, grid, params)?.solve(t)
}

/// Closed-form solution when `c = d` and `mu = nu`: each component is a
/// heat-kernel smoothing of a time-weighted mix of the two data.
pub fn equal_rates_solution(
    data0: &FieldPair,
    t: f64,
    grid: &SpectralGrid,
    params: &ExchangerParams,
) -> Result<FieldPair> {
    if params.c() != params.d() || params.mu() != params.nu() {
        return Err(Error::InvalidParameter {
            name: "params",
            constraint: "closed form needs c = d and mu = nu".into(),
        });
    }
    let spec = data0.to_spectrum(grid)?;
    let decay = (-2.0 * params.mu() * t).exp();
    let (keep, swap) = (0.5 * (1.0 + decay), 0.5 * (1.0 - decay));
    let heat: Vec<f64> = grid.xi_sq().iter().map(|k| (-params.c() * t * k).exp()).collect();
    let mix = |a: &[num_complex::Complex64], b: &[num_complex::Complex64]| -> Vec<num_complex::Complex64> {
        a.iter()
            .zip(b)
            .zip(&heat)
            .map(|((x, y), h)| (keep * x + swap * y) * h)
            .collect()
    };
    Ok(FieldPair {
        u: grid.inverse(&mix(&spec.u_hat, &spec.v_hat))?,
        v: grid.inverse(&mix(&spec.v_hat, &spec.u_hat))?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTraceRow {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub mass_u: f64,
    pub mass_v: f64,
    pub evanescent_sup: f64,
    /// Largest edge-to-peak ratio of the two components.
    pub edge_ratio: f64,
}

/// One point of a sup-norm decay series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupSample {
    pub t: f64,
    pub sup: f64,
    pub edge_ratio: f64,
}

impl LinearTraceRow {
    pub fn sup_sample_u(&self) -> SupSample {
        SupSample {
            t: self.t,
            sup: self.sup_u,
            edge_ratio: self.edge_ratio,
        }
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn check_window(t_window: (f64, f64), min_start: f64) -> Result<()> {
    let (t1, t2) = t_window;
    if t1.is_finite() && t2.is_finite() && t1 >= min_start && t1 < t2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t_window",
            constraint: format!("need {min_start} <= t1 < t2, got ({t1}, {t2})"),
        })
    }
}

/// `samples` equally spaced times covering `[t1, t2]`.
pub fn window_times(t_window: (f64, f64), samples: usize) -> Vec<f64> {
    let (t1, t2) = t_window;
    (0..samples)
        .map(|i| t1 + (t2 - t1) * i as f64 / (samples - 1) as f64)
        .collect()
}

/// Fitted exponential decay rate of the sup-norm of the evanescent part over
/// the window (a positive number for decay).
pub fn evanescent_decay_rate(
    data0: &FieldPair,
    grid: &SpectralGrid,
    params: &ExchangerParams,
    t_window: (f64, f64),
) -> Result<f64> {
    check_window(t_window, 1.0)?;
    let evolver = LinearEvolver::new(data0, grid, params)?;
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for t in window_times(t_window, 2 * MIN_FIT_SAMPLES) {
        let ev = evolver.evanescent(t)?;
        let sup = sup_norm(&ev.u).max(sup_norm(&ev.v));
        if sup >= UNDERFLOW_FLOOR {
            ts.push(t);
            logs.push(sup.ln());
        }
    }
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Underflow { floor: UNDERFLOW_FLOOR });
    }
    Ok(-least_squares_slope(&ts, &logs))
}

/// Slope of `log sup` against `log(1 + t)` for the samples inside the window.
pub fn sup_norm_decay_fit(trace: &[SupSample], t_window: (f64, f64)) -> Result<f64> {
    check_window(t_window, 0.0)?;
    let inside: Vec<&SupSample> = trace
        .iter()
        .filter(|s| s.t >= t_window.0 && s.t <= t_window.1)
        .collect();
    if let Some(bad) = inside.iter().find(|s| s.edge_ratio > LOCALIZATION_TOL) {
        return Err(Error::BoxContaminated {
            t: bad.t,
            ratio: bad.edge_ratio,
        });
    }
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_FIT_SAMPLES,
            found: inside.len(),
        });
    }
    if let Some(bad) = inside.iter().find(|s| !s.sup.is_finite() || s.sup <= 0.0) {
        return Err(Error::Underflow { floor: bad.sup });
    }
    let x: Vec<f64> = inside.iter().map(|s| (1.0 + s.t).ln()).collect();
    let y: Vec<f64> = inside.iter().map(|s| s.sup.ln()).collect();
    Ok(least_squares_slope(&x, &y))
}
