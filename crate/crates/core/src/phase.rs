//! Phase-plane blow-up machinery: Gaussian blur functionals, the comparison
//! ODE they dominate, its invariant region and the search for a blur width
//! that places the blurred data inside that region.
//!
//! The ODE is
//!
//! ```text
//! U' = -(mu + c lambda) U + nu V + U^(1+p)
//! V' = mu U - (nu + d lambda) V
//! ```
//!
//! with `lambda = 2 N eps` for the blur kernel `(eps/pi)^(N/2) exp(-eps |x|^2)`.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::grid::SpectralGrid;
use crate::params::ExchangerParams;

/// Blow-up threshold for the ODE.
pub const ODE_BLOWUP: f64 = 1e8;
/// Radius of the ball around the origin counted as convergence.
pub const ORIGIN_BALL: f64 = 1e-6;
/// Smallest blur width tried by `find_lambda`.
pub const EPSILON_FLOOR: f64 = 1e-12;
/// Tolerance of the inward-pointing test.
pub const INWARD_TOL: f64 = 1e-10;
/// Tolerance on the sign of `det(M_alpha)` along the segment.
pub const DET_TOL: f64 = 1e-12;
const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-12;
const GL_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlurSpec {
    pub dim: usize,
    pub epsilon: f64,
    pub lambda: f64,
    pub amplitude_eta: f64,
    pub radius_r: f64,
}

impl BlurSpec {
    pub fn new(dim: usize, epsilon: f64, amplitude_eta: f64, radius_r: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            epsilon: positive("epsilon", epsilon)?,
            lambda: 2.0 * dim as f64 * epsilon,
            amplitude_eta: positive("amplitude_eta", amplitude_eta)?,
            radius_r: positive("radius_r", radius_r)?,
        })
    }
}

/// Mass of the unit Gaussian `(eps/pi) exp(-eps |z|^2)` inside the disc of
/// radius `r`, by adaptive radial Gauss-Legendre quadrature.
pub fn disc_mass(epsilon: f64, r: f64) -> f64 {
    let gl = GaussLegendre::new(GL_POINTS).expect("valid quadrature order");
    let f = |rho: f64| 2.0 * epsilon * rho * (-epsilon * rho * rho).exp();
    fn refine(gl: &GaussLegendre, f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let (left, right) = (gl.integrate(a, mid, f), gl.integrate(mid, b, f));
        if (left + right - whole).abs() <= 1e-10 * 1e-2 || depth == 0 {
            left + right
        } else {
            refine(gl, f, a, mid, left, depth - 1) + refine(gl, f, mid, b, right, depth - 1)
        }
    }
    let whole = gl.integrate(0.0, r, f);
    refine(&gl, &f, 0.0, r, whole, 20)
}

/// `(U0, V0)`: the shaped data `eta 1_B(0,R)` and `(mu/2nu) eta 1_B(0,R)`
/// tested against the blur kernel.
pub fn blurred_data(blur: &BlurSpec, params: &ExchangerParams) -> (f64, f64) {
    let inside = match blur.dim {
        1 => libm::erf(blur.radius_r * blur.epsilon.sqrt()),
        _ => disc_mass(blur.epsilon, blur.radius_r),
    };
    let u0 = blur.amplitude_eta * inside;
    (u0, params.mu() / (2.0 * params.nu()) * u0)
}

/// The blur kernel sampled on a grid.
pub fn blur_kernel(grid: &SpectralGrid, epsilon: f64) -> Vec<f64> {
    let norm = (epsilon / PI).powf(grid.dim() as f64 / 2.0);
    grid.radius_sq().iter().map(|r| norm * (-epsilon * r).exp()).collect()
}

/// Discrete `sum kernel * f * dx^N`.
pub fn blur_functional(field: &[f64], kernel: &[f64], grid: &SpectralGrid) -> f64 {
    field.iter().zip(kernel).map(|(f, k)| f * k).sum::<f64>() * grid.cell_volume()
}

pub fn vector_field(u: f64, v: f64, lambda: f64, params: &ExchangerParams, p: f64) -> (f64, f64) {
    let (c, d, mu, nu) = (params.c(), params.d(), params.mu(), params.nu());
    (
        -(mu + c * lambda) * u + nu * v + u.max(0.0).powf(1.0 + p),
        mu * u - (nu + d * lambda) * v,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseGeometry {
    pub lambda: f64,
    pub p: f64,
    pub chi: f64,
    pub e0: (f64, f64),
    pub e1: (f64, f64),
    /// Slope `mu / (nu + d lambda)` of the `V' = 0` isocline.
    pub v_slope: f64,
}

impl PhaseGeometry {
    pub fn new(lambda: f64, params: &ExchangerParams, p: f64) -> Self {
        let (c, d, mu, nu) = (params.c(), params.d(), params.mu(), params.nu());
        // mu + c lambda - mu nu/(nu + d lambda), rearranged to avoid cancellation
        let chi = (c * lambda + mu * d * lambda / (nu + d * lambda)).powf(1.0 / p);
        let v_slope = mu / (nu + d * lambda);
        Self {
            lambda,
            p,
            chi,
            e0: (mu.powf(1.0 / p), 0.0),
            e1: (chi, v_slope * chi),
            v_slope,
        }
    }

    /// `V` on the `U' = 0` isocline.
    pub fn isocline_u(&self, u: f64, params: &ExchangerParams) -> f64 {
        u * (params.mu() + params.c() * self.lambda - u.powf(self.p)) / params.nu()
    }

    /// `V` on the `V' = 0` isocline.
    pub fn isocline_v(&self, u: f64) -> f64 {
        self.v_slope * u
    }

    pub fn is_degenerate(&self) -> bool {
        self.chi.is_nan() || self.chi >= self.e0.0
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::GeometryDegenerate {
                chi: self.chi,
                root: self.e0.0,
            })
        } else {
            Ok(())
        }
    }

    /// `E0 + alpha (E1 - E0)`.
    pub fn segment_point(&self, alpha: f64) -> (f64, f64) {
        (
            self.e0.0 + alpha * (self.e1.0 - self.e0.0),
            alpha * self.e1.1,
        )
    }

    /// `V` on the line through `E0` and `E1`.
    fn segment_line(&self, u: f64) -> f64 {
        self.e1.1 * (u - self.e0.0) / (self.e1.0 - self.e0.0)
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        v > 0.0 && v < self.isocline_v(u) && v > self.segment_line(u)
    }
}

fn valid_geometry(lambda: f64, params: &ExchangerParams, p: f64) -> Result<PhaseGeometry> {
    let g = PhaseGeometry::new(lambda, params, p);
    g.require_valid()?;
    Ok(g)
}

/// Determinant of the matrix with columns (field at `E_alpha`, `E1 - E0`).
pub fn det_m_alpha(alpha: f64, lambda: f64, params: &ExchangerParams, p: f64) -> Result<f64> {
    let g = valid_geometry(lambda, params, p)?;
    let (u, v) = g.segment_point(alpha);
    let (fp, fq) = vector_field(u, v, lambda, params, p);
    Ok(fp * g.e1.1 - fq * (g.e1.0 - g.e0.0))
}

/// Closed-form derivative of `det_m_alpha` in `alpha`.
pub fn det_m_alpha_derivative(alpha: f64, lambda: f64, params: &ExchangerParams, p: f64) -> Result<f64> {
    let g = valid_geometry(lambda, params, p)?;
    let (c, mu, nu) = (params.c(), params.mu(), params.nu());
    let k = g.e1.1;
    let gap = g.e0.0 - g.chi;
    let u_alpha = g.segment_point(alpha).0;
    Ok(k * ((mu + c * lambda) * gap + nu * k - (1.0 + p) * gap * u_alpha.powf(p)) - mu * g.e0.0 * gap)
}

pub fn omega_contains(u: f64, v: f64, lambda: f64, params: &ExchangerParams, p: f64) -> Result<bool> {
    Ok(valid_geometry(lambda, params, p)?.contains(u, v))
}

/// `alpha` values `0, 1/(n-1), ..., 1`.
pub fn alpha_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Worst signed outward component of the field over samples of the three
/// boundary pieces: the `U` axis beyond `E0`, the `V' = 0` isocline beyond
/// `E1`, and the segment `[E0, E1]`. Non-positive means inward everywhere.
pub fn boundary_inward_check(lambda: f64, params: &ExchangerParams, p: f64, samples: usize) -> Result<f64> {
    let g = valid_geometry(lambda, params, p)?;
    let samples = samples.max(2);
    // geometric spread from just past the corner out to 10^6 times it
    let spread = |base: f64, i: usize| base * (1.0 + 10f64.powf(-6.0 + 12.0 * i as f64 / (samples - 1) as f64));
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let u = spread(g.e0.0, i);
        worst = worst.max(-vector_field(u, 0.0, lambda, params, p).1);
        let u = spread(g.chi, i);
        worst = worst.max(-vector_field(u, g.isocline_v(u), lambda, params, p).0);
    }
    for alpha in alpha_grid(samples) {
        worst = worst.max(-det_m_alpha(alpha, lambda, params, p)?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaChoice {
    pub epsilon: f64,
    pub lambda: f64,
    pub u0: f64,
    pub v0: f64,
}

/// Halves the blur width from 1 until the blurred shaped data lie in the
/// invariant region and the field points inward on its boundary.
pub fn find_lambda(
    amplitude_eta: f64,
    radius_r: f64,
    params: &ExchangerParams,
    p: f64,
    dim: usize,
) -> Result<LambdaChoice> {
    positive("p", p)?;
    if dim != 1 && dim != 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if p * dim as f64 >= 2.0 {
        return Err(Error::RegimeViolation(format!(
            "blow-up construction needs p < 2/N, got p = {p}, N = {dim}"
        )));
    }
    let mut epsilon = 1.0;
    while epsilon >= EPSILON_FLOOR {
        let blur = BlurSpec::new(dim, epsilon, amplitude_eta, radius_r)?;
        let g = PhaseGeometry::new(blur.lambda, params, p);
        if !g.is_degenerate() {
            let (u0, v0) = blurred_data(&blur, params);
            let segment_ok = alpha_grid(101)
                .iter()
                .all(|&a| det_m_alpha(a, blur.lambda, params, p).is_ok_and(|d| d >= -DET_TOL));
            if g.contains(u0, v0)
                && segment_ok
                && boundary_inward_check(blur.lambda, params, p, 101)? <= INWARD_TOL
            {
                return Ok(LambdaChoice {
                    epsilon,
                    lambda: blur.lambda,
                    u0,
                    v0,
                });
            }
        }
        epsilon *= 0.5;
    }
    Err(Error::SearchFailed { floor: EPSILON_FLOOR })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OdeOutcome {
    BlowUp { t_star: f64 },
    ConvergesToOrigin,
    Inconclusive,
}

impl OdeOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            OdeOutcome::BlowUp { .. } => "BLOW_UP",
            OdeOutcome::ConvergesToOrigin => "CONVERGES_TO_ORIGIN",
            OdeOutcome::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeRun {
    pub outcome: OdeOutcome,
    /// `(t, U, V)` at every accepted step, starting with the initial point.
    pub trajectory: Vec<(f64, f64, f64)>,
    /// `(t, U, V)` at the requested sample times that were reached.
    pub samples: Vec<(f64, f64, f64)>,
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dopri_step<F: Fn(f64, f64) -> (f64, f64)>(f: &F, y: (f64, f64), h: f64) -> ((f64, f64), f64) {
    let mut k = [(0.0, 0.0); 7];
    k[0] = f(y.0, y.1);
    for s in 1..7 {
        let (mut a, mut b) = (y.0, y.1);
        for (j, kj) in k.iter().enumerate().take(s) {
            a += h * A[s - 1][j] * kj.0;
            b += h * A[s - 1][j] * kj.1;
        }
        k[s] = f(a, b);
    }
    let (mut y5, mut y4) = (y, y);
    for s in 0..7 {
        y5.0 += h * B5[s] * k[s].0;
        y5.1 += h * B5[s] * k[s].1;
        y4.0 += h * B4[s] * k[s].0;
        y4.1 += h * B4[s] * k[s].1;
    }
    let sc = |a: f64, b: f64| ATOL + RTOL * a.abs().max(b.abs());
    let err = (((y5.0 - y4.0) / sc(y.0, y5.0)).powi(2) + ((y5.1 - y4.1) / sc(y.1, y5.1)).powi(2)).sqrt() / 2f64.sqrt();
    (y5, err)
}

/// Adaptive Dormand-Prince integration of the comparison ODE, landing
/// exactly on `sample_times` (which must be sorted).
pub fn integrate_ode_sampled(
    u0: f64,
    v0: f64,
    lambda: f64,
    params: &ExchangerParams,
    p: f64,
    t_max: f64,
    sample_times: &[f64],
) -> Result<OdeRun> {
    if !(u0 >= 0.0 && v0 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "u0/v0",
            constraint: "initial point must be non-negative".into(),
        });
    }
    positive("t_max", t_max)?;
    let f = |u: f64, v: f64| vector_field(u, v, lambda, params, p);
    let mut t = 0.0;
    let mut y = (u0, v0);
    let mut h = 1e-3f64.min(t_max);
    let mut trajectory = vec![(t, u0, v0)];
    let mut samples = Vec::new();
    let mut pending = sample_times.iter().copied().filter(|s| *s <= t_max).peekable();
    while pending.peek() == Some(&0.0) {
        samples.push((0.0, u0, v0));
        pending.next();
    }
    let in_ball = |y: (f64, f64)| y.0.hypot(y.1) < ORIGIN_BALL;
    if in_ball(y) {
        return Ok(OdeRun {
            outcome: OdeOutcome::ConvergesToOrigin,
            trajectory,
            samples,
        });
    }
    let outcome = loop {
        if t >= t_max {
            break OdeOutcome::Inconclusive;
        }
        let stop = pending.peek().copied().unwrap_or(t_max).min(t_max);
        let step = h.min(stop - t);
        let (next, err) = dopri_step(&f, y, step);
        let old = y.0.hypot(y.1);
        let new = next.0.hypot(next.1);
        let grew_fast = new > 1.1 * old + ATOL;
        if !next.0.is_finite() || !next.1.is_finite() || err > 1.0 || grew_fast {
            h = if grew_fast && err <= 1.0 { 0.5 * step } else { step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5) };
            if h < 1e-15 * (1.0 + t) {
                break if y.0 > 1.0 { OdeOutcome::BlowUp { t_star: t } } else { OdeOutcome::Inconclusive };
            }
            continue;
        }
        t = if step == stop - t { stop } else { t + step };
        y = next;
        trajectory.push((t, y.0, y.1));
        if pending.peek() == Some(&t) {
            samples.push((t, y.0, y.1));
            pending.next();
        }
        if y.0 >= ODE_BLOWUP {
            break OdeOutcome::BlowUp { t_star: t };
        }
        if in_ball(y) {
            break OdeOutcome::ConvergesToOrigin;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = step.max(h.min(step * 5.0)) * factor;
    };
    Ok(OdeRun {
        outcome,
        trajectory,
        samples,
    })
}

pub fn integrate_ode(u0: f64, v0: f64, lambda: f64, params: &ExchangerParams, p: f64, t_max: f64) -> Result<OdeRun> {
    integrate_ode_sampled(u0, v0, lambda, params, p, t_max, &[])
}

/// Uniform random points of the invariant region, drawn from the strip
/// `chi < U < u_max` by rejection.
pub fn sample_omega<R: Rng>(geometry: &PhaseGeometry, u_max: f64, count: usize, rng: &mut R) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(geometry.chi..u_max);
        let v = rng.gen_range(0.0..geometry.isocline_v(u).max(f64::MIN_POSITIVE));
        if geometry.contains(u, v) {
            out.push((u, v));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub starts: usize,
    /// Trajectories with an accepted step outside the region.
    pub exits: usize,
    /// Trajectories that reached the blow-up threshold.
    pub blowups: usize,
}

/// Integrates from each start and checks region membership at every
/// accepted step.
pub fn invariance_check(
    starts: &[(f64, f64)],
    lambda: f64,
    params: &ExchangerParams,
    p: f64,
    t_max: f64,
) -> Result<InvarianceReport> {
    let g = valid_geometry(lambda, params, p)?;
    let runs: Vec<OdeRun> = starts
        .par_iter()
        .map(|&(u, v)| integrate_ode(u, v, lambda, params, p, t_max))
        .collect::<Result<_>>()?;
    Ok(InvarianceReport {
        starts: starts.len(),
        exits: runs
            .iter()
            .filter(|r| r.trajectory.iter().any(|&(_, u, v)| !g.contains(u, v)))
            .count(),
        blowups: runs
            .iter()
            .filter(|r| matches!(r.outcome, OdeOutcome::BlowUp { .. }))
            .count(),
    })
}
