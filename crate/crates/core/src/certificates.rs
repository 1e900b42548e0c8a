//! Explicit decay constants, small-data thresholds and super-solution
//! envelopes for the global existence regime.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataSpec;
use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
use crate::params::{ExchangerParams, Kappa, ReactionParams};
use crate::semilinear::{simulate, Outcome, SimulationConfig};
use crate::spectral::{dispersal_asymptotics, ModeSymbol};

/// Radial mesh size of the low-frequency scan.
pub const SCAN_RADII: usize = 10_000;

/// Nyquist radius of the default one-dimensional grid.
pub fn default_scan_radius() -> f64 {
    PI * DEFAULT_POINTS as f64 / (2.0 * DEFAULT_HALF_LENGTH)
}

/// Where the low-frequency inequality `L <= -(low/2)|xi|^2` stops holding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "radius", rename_all = "snake_case")]
pub enum Cutoff {
    Radius(f64),
    /// The inequality holds up to the scan radius.
    AllFrequencies,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsBundle {
    pub dim: usize,
    pub k: f64,
    pub k_prime: f64,
    pub a: Cutoff,
    pub eta_gap: f64,
    pub ell: f64,
    pub ell_prime: f64,
    pub scan_radius: f64,
}

impl ConstantsBundle {
    /// A bundle carrying only `ell` and `ell_prime`, for evaluating
    /// thresholds and envelopes at chosen constants.
    pub fn with_ell(dim: usize, ell: f64, ell_prime: f64) -> Self {
        Self {
            dim,
            k: f64::NAN,
            k_prime: f64::NAN,
            a: Cutoff::AllFrequencies,
            eta_gap: f64::NAN,
            ell,
            ell_prime,
            scan_radius: f64::NAN,
        }
    }
}

/// `sup_{t >= 1} t^(N/2) e^(-beta t)`.
pub fn tail_fold(beta: f64, dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    let t_star = half / beta;
    if t_star >= 1.0 {
        t_star.powf(half) * (-half).exp()
    } else {
        (-beta).exp()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// First radius where the low-frequency inequality fails, refined by bisection.
pub fn low_frequency_cutoff(params: &ExchangerParams, scan_radius: f64) -> Cutoff {
    let half_low = 0.5 * dispersal_asymptotics(params).0;
    let holds = |rho: f64| ModeSymbol::at_radius(rho, params).l() <= -half_low * rho * rho;
    let step = scan_radius / SCAN_RADII as f64;
    let Some(i) = (1..=SCAN_RADII).find(|&i| !holds(i as f64 * step)) else {
        return Cutoff::AllFrequencies;
    };
    let (mut lo, mut hi) = ((i - 1) as f64 * step, i as f64 * step);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Cutoff::Radius(lo)
}

/// All constants with the low-frequency scan running to the default grid's
/// Nyquist radius.
pub fn decay_constants(params: &ExchangerParams, dim: usize) -> Result<ConstantsBundle> {
    decay_constants_to(params, dim, default_scan_radius())
}

pub fn decay_constants_to(params: &ExchangerParams, dim: usize, scan_radius: f64) -> Result<ConstantsBundle> {
    check_dim(dim)?;
    crate::error::positive("scan_radius", scan_radius)?;
    let (c, d, mu, nu) = (params.c(), params.d(), params.mu(), params.nu());
    let n = dim as f64;
    let gauss = (2.0 * PI * (c + d)).powf(n / 2.0);
    let amp_u = (nu / (4.0 * mu)).sqrt().max(1.0);
    let amp_v = (mu / (4.0 * nu)).sqrt().max(1.0);
    let k = amp_u / gauss;
    let k_prime = amp_v / gauss;
    let a = low_frequency_cutoff(params, scan_radius);
    let gap_radius = match a {
        Cutoff::Radius(r) => r,
        Cutoff::AllFrequencies => scan_radius,
    };
    let eta_gap = -ModeSymbol::at_radius(gap_radius, params).l();

    let beta = params.evanescent_rate();
    let low = dispersal_asymptotics(params).0;
    let box_factor = (2.0 * PI).powf(-n);
    let persistent = (2.0 * PI / low).powf(n / 2.0).max(tail_fold(eta_gap, dim));
    let assemble = |k: f64, amp: f64| {
        let tilde = k * tail_fold(beta, dim) + box_factor * amp * persistent;
        2f64.powf(n / 2.0) * box_factor.max(tilde)
    };
    Ok(ConstantsBundle {
        dim,
        k,
        k_prime,
        a,
        eta_gap,
        ell: assemble(k, amp_u),
        ell_prime: assemble(k_prime, amp_v),
        scan_radius,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassFunctional {
    pub m: f64,
    pub u0_l1: f64,
    pub v0_l1: f64,
    pub u0_hat_l1: f64,
    pub v0_hat_l1: f64,
}

/// `||u0||_1 + ||v0||_1 + ||u0_hat||_1 + ||v0_hat||_1` in closed form for
/// Gaussian data.
pub fn mass_functional(spec: &DataSpec, dim: usize) -> Result<MassFunctional> {
    check_dim(dim)?;
    let DataSpec::Gaussian { u, v } = spec else {
        return Err(Error::UnsupportedDataFamily(
            "the mass functional is closed-form only for Gaussian data",
        ));
    };
    let n = dim as i32;
    let space = |a: f64, w: f64| a * (w * (2.0 * PI).sqrt()).powi(n);
    let freq = |a: f64| a * (2.0 * PI).powi(n);
    let parts = [
        space(u.amplitude, u.width),
        space(v.amplitude, v.width),
        freq(u.amplitude),
        freq(v.amplitude),
    ];
    Ok(MassFunctional {
        m: parts.iter().sum(),
        u0_l1: parts[0],
        v0_l1: parts[1],
        u0_hat_l1: parts[2],
        v0_hat_l1: parts[3],
    })
}

/// Exponent, coefficient and power of `m` that define the envelope:
/// `G(t) = 1 - coeff m^m_power (1 - (1+t)^(-(N low/2 - 1)))` and
/// `F = G^(-1/exponent)`.
struct EnvelopeShape {
    exponent: f64,
    low: f64,
    weight: f64,
    n: f64,
}

impl EnvelopeShape {
    fn new(reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<Self> {
        check_dim(constants.dim)?;
        let n = constants.dim as f64;
        let (p, q) = (reaction.p(), reaction.q());
        let shape = match reaction.kappa() {
            Kappa::Zero => Self {
                exponent: p,
                low: p,
                weight: constants.ell.powf(p),
                n,
            },
            Kappa::One => Self {
                exponent: p.max(q),
                low: p.min(q),
                weight: constants.ell.powf(p).max(constants.ell_prime.powf(q)),
                n,
            },
        };
        if n * shape.low - 2.0 <= 0.0 {
            return Err(Error::RegimeViolation(format!(
                "need N * {} > 2 for global existence, got N = {}, exponent {}",
                if reaction.kappa() == Kappa::Zero { "p" } else { "min(p, q)" },
                constants.dim,
                shape.low
            )));
        }
        Ok(shape)
    }

    fn gap(&self) -> f64 {
        self.n * self.low - 2.0
    }

    /// `2 exponent weight / (N low - 2)`.
    fn coeff(&self) -> f64 {
        2.0 * self.exponent * self.weight / self.gap()
    }

    fn g(&self, t: f64, m: f64) -> f64 {
        1.0 - self.coeff() * m.powf(self.low) * (1.0 - (1.0 + t).powf(-(self.n * self.low / 2.0 - 1.0)))
    }

    fn inf_g(&self, m: f64) -> f64 {
        1.0 - self.coeff() * m.powf(self.low)
    }
}

/// Small-data threshold below which the envelope stays finite for all time.
pub fn m_zero(reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<f64> {
    let shape = EnvelopeShape::new(reaction, constants)?;
    let root = (1.0 / shape.coeff()).powf(1.0 / shape.low);
    Ok(match reaction.kappa() {
        Kappa::Zero => root,
        Kappa::One => root.min(1.0),
    })
}

fn certified(m: f64, reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<EnvelopeShape> {
    let shape = EnvelopeShape::new(reaction, constants)?;
    let m0 = m_zero(reaction, constants)?;
    if !(m >= 0.0 && m < m0) {
        return Err(Error::CertificateUnavailable { m, m0 });
    }
    Ok(shape)
}

/// The envelope `F(t)`, with `F(0) = 1`.
pub fn envelope_f(t: f64, m: f64, reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<f64> {
    let shape = certified(m, reaction, constants)?;
    Ok(shape.g(t, m).powf(-1.0 / shape.exponent))
}

/// `sup_t F(t)`, reached as `t -> infinity`.
pub fn envelope_sup(m: f64, reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<f64> {
    let shape = certified(m, reaction, constants)?;
    Ok(shape.inf_g(m).powf(-1.0 / shape.exponent))
}

/// `(M, M')` with `sup|u(t)| <= M/(1+t)^(N/2)` and `sup|v(t)| <= M'/(1+t)^(N/2)`.
pub fn global_bounds(m: f64, reaction: &ReactionParams, constants: &ConstantsBundle) -> Result<(f64, f64)> {
    let shape = certified(m, reaction, constants)?;
    let denom = shape.gap() - 2.0 * shape.exponent * shape.weight * m.powf(shape.low);
    let bound = |ell: f64| (shape.gap() * (ell * m).powf(shape.exponent) / denom).powf(1.0 / shape.exponent);
    Ok((bound(constants.ell), bound(constants.ell_prime)))
}

/// Everything needed to certify one Gaussian datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub constants: ConstantsBundle,
    pub mass: MassFunctional,
    pub m0: f64,
    pub sup_envelope: f64,
    pub bound_u: f64,
    pub bound_v: f64,
}

pub fn certify(
    params: &ExchangerParams,
    reaction: &ReactionParams,
    spec: &DataSpec,
    dim: usize,
) -> Result<Certificate> {
    let constants = decay_constants(params, dim)?;
    let mass = mass_functional(spec, dim)?;
    let m0 = m_zero(reaction, &constants)?;
    let sup_envelope = envelope_sup(mass.m, reaction, &constants)?;
    let (bound_u, bound_v) = global_bounds(mass.m, reaction, &constants)?;
    Ok(Certificate {
        constants,
        mass,
        m0,
        sup_envelope,
        bound_u,
        bound_v,
    })
}

/// Fixed ingredients of a `(p, amplitude)` sweep. Each cell uses
/// `data.scaled(amplitude)` and `q = p` unless `q` is given.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub grid: SpectralGrid,
    pub exchanger: ExchangerParams,
    pub kappa: Kappa,
    pub q: Option<f64>,
    pub data: DataSpec,
    pub t_end: f64,
    pub dt: f64,
    pub dt_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub p: f64,
    pub amplitude: f64,
    /// Present for Gaussian data only.
    pub m: Option<f64>,
    /// Present in the supercritical regime only.
    pub m0: Option<f64>,
    pub outcome: Outcome,
}

/// Runs every `(p, amplitude)` cell, in parallel, and returns them in
/// row-major order (`p` outer).
pub fn phase_diagram(p_values: &[f64], amplitudes: &[f64], base: &SweepBase) -> Result<Vec<SweepCell>> {
    base.data.validate()?;
    let cells: Vec<(f64, f64)> = p_values
        .iter()
        .flat_map(|&p| amplitudes.iter().map(move |&a| (p, a)))
        .collect();
    let dim = base.grid.dim();
    let constants = decay_constants(&base.exchanger, dim)?;
    cells
        .par_iter()
        .map(|&(p, amplitude)| {
            let reaction = ReactionParams::new(p, base.q.unwrap_or(p), base.kappa)?;
            let spec = base.data.scaled(amplitude);
            let m = mass_functional(&spec, dim).ok().map(|mf| mf.m);
            let m0 = m_zero(&reaction, &constants).ok();
            let config = SimulationConfig::new(base.grid.clone(), base.exchanger, reaction, spec.sample(&base.grid), base.t_end)
                .with_dt(base.dt, base.dt_max);
            let outcome = simulate(&config)?.outcome;
            Ok(SweepCell {
                p,
                amplitude,
                m,
                m0,
                outcome,
            })
        })
        .collect()
}
