//! Initial data families.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::grid::{FieldPair, SpectralGrid};
use crate::params::ExchangerParams;

/// `amplitude * exp(-|x|^2 / (2 width^2))`, centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianBump {
    pub fn new(amplitude: f64, width: f64) -> Self {
        Self { amplitude, width }
    }

    pub fn value(&self, r_sq: f64) -> f64 {
        self.amplitude * (-r_sq / (2.0 * self.width * self.width)).exp()
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name,
                constraint: format!("amplitude must be finite and >= 0, got {}", self.amplitude),
            });
        }
        positive(name, self.width).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DataSpec {
    Gaussian { u: GaussianBump, v: GaussianBump },
    /// `u0 = eta 1_B(0,R)` and `v0 = v_ratio * eta 1_B(0,R)`.
    Shaped {
        amplitude_eta: f64,
        radius: f64,
        v_ratio: f64,
    },
}

impl DataSpec {
    /// Same-width Gaussian bumps.
    pub fn gaussian(amp_u: f64, amp_v: f64, width: f64) -> Self {
        DataSpec::Gaussian {
            u: GaussianBump::new(amp_u, width),
            v: GaussianBump::new(amp_v, width),
        }
    }

    /// The ball indicator pair with `v_ratio = mu / (2 nu)`.
    pub fn shaped(amplitude_eta: f64, radius: f64, params: &ExchangerParams) -> Self {
        DataSpec::Shaped {
            amplitude_eta,
            radius,
            v_ratio: params.mu() / (2.0 * params.nu()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DataSpec::Gaussian { u, v } => {
                u.validate("data.u")?;
                v.validate("data.v")
            }
            DataSpec::Shaped {
                amplitude_eta,
                radius,
                v_ratio,
            } => {
                positive("amplitude_eta", *amplitude_eta)?;
                positive("radius", *radius)?;
                positive("v_ratio", *v_ratio).map(|_| ())
            }
        }
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            DataSpec::Gaussian { u, v } => DataSpec::Gaussian {
                u: GaussianBump::new(u.amplitude * factor, u.width),
                v: GaussianBump::new(v.amplitude * factor, v.width),
            },
            DataSpec::Shaped {
                amplitude_eta,
                radius,
                v_ratio,
            } => DataSpec::Shaped {
                amplitude_eta: amplitude_eta * factor,
                radius,
                v_ratio,
            },
        }
    }

    pub fn sample(&self, grid: &SpectralGrid) -> FieldPair {
        match *self {
            DataSpec::Gaussian { u, v } => {
                let r_sq = grid.radius_sq();
                FieldPair {
                    u: r_sq.iter().map(|&r| u.value(r)).collect(),
                    v: r_sq.iter().map(|&r| v.value(r)).collect(),
                }
            }
            DataSpec::Shaped {
                amplitude_eta,
                radius,
                v_ratio,
            } => {
                let u: Vec<f64> = ball_fraction(grid, radius)
                    .into_iter()
                    .map(|f| f * amplitude_eta)
                    .collect();
                let v = u.iter().map(|x| x * v_ratio).collect();
                FieldPair { u, v }
            }
        }
    }
}

/// Fraction of each grid cell (centred on its sample point) covered by the
/// ball of the given radius. Exact in one dimension; in two dimensions cells
/// cut by the circle are averaged over a 16 x 16 sub-grid.
pub fn ball_fraction(grid: &SpectralGrid, radius: f64) -> Vec<f64> {
    let dx = grid.spacing();
    let overlap = |x: f64| ((x + 0.5 * dx).min(radius) - (x - 0.5 * dx).max(-radius)).max(0.0) / dx;
    if grid.dim() == 1 {
        return (0..grid.len()).map(|i| overlap(grid.point(i)[0])).collect();
    }
    const SUB: usize = 16;
    let reach = radius + dx;
    (0..grid.len())
        .map(|i| {
            let [x, y] = grid.point(i);
            let r = x.hypot(y);
            if r > reach {
                0.0
            } else if r + dx < radius {
                1.0
            } else {
                let offset = |k: usize| ((k as f64 + 0.5) / SUB as f64 - 0.5) * dx;
                let inside = (0..SUB * SUB)
                    .filter(|k| (x + offset(k / SUB)).hypot(y + offset(k % SUB)) <= radius)
                    .count();
                inside as f64 / (SUB * SUB) as f64
            }
        })
        .collect()
}
