use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Diffusion rates `c`, `d` and outgoing exchange rates `mu`, `nu` of the
/// heat exchanger. All four are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangerParams {
    c: f64,
    d: f64,
    mu: f64,
    nu: f64,
}

impl ExchangerParams {
    pub fn new(c: f64, d: f64, mu: f64, nu: f64) -> Result<Self> {
        Ok(Self {
            c: positive("c", c)?,
            d: positive("d", d)?,
            mu: positive("mu", mu)?,
            nu: positive("nu", nu)?,
        })
    }

    /// `c = d = mu = nu = 1`.
    pub fn unit() -> Self {
        Self {
            c: 1.0,
            d: 1.0,
            mu: 1.0,
            nu: 1.0,
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `(sqrt(mu) + sqrt(nu))^2 / 2`, the guaranteed decay rate of the
    /// evanescent part.
    pub fn evanescent_rate(&self) -> f64 {
        let s = self.mu.sqrt() + self.nu.sqrt();
        0.5 * s * s
    }
}

/// Which of the two reaction terms is switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kappa {
    /// Only `u^(1+p)` acts.
    Zero,
    /// Both `u^(1+p)` and `v^(1+q)` act.
    One,
}

impl Kappa {
    pub fn from_flag(flag: u8) -> Result<Self> {
        match flag {
            0 => Ok(Kappa::Zero),
            1 => Ok(Kappa::One),
            other => Err(Error::InvalidParameter {
                name: "kappa",
                constraint: format!("must be 0 or 1, got {other}"),
            }),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Kappa::Zero => 0.0,
            Kappa::One => 1.0,
        }
    }
}

/// Reaction exponents `p`, `q` and the switch `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionParams {
    p: f64,
    q: f64,
    kappa: Kappa,
}

impl ReactionParams {
    pub fn new(p: f64, q: f64, kappa: Kappa) -> Result<Self> {
        Ok(Self {
            p: positive("p", p)?,
            q: positive("q", q)?,
            kappa,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn with_kappa(self, kappa: Kappa) -> Self {
        Self { kappa, ..self }
    }

    /// Whether the exponents lie strictly above the Fujita threshold
    /// (`N p > 2`, and `N min(p, q) > 2` when `kappa = 1`).
    pub fn is_supercritical(&self, dim: usize) -> bool {
        let n = dim as f64;
        match self.kappa {
            Kappa::Zero => n * self.p > 2.0,
            Kappa::One => n * self.p.min(self.q) > 2.0,
        }
    }

    /// Whether at least one active exponent lies strictly below the Fujita
    /// threshold, which forces blow-up of every nontrivial solution.
    pub fn is_subcritical(&self, dim: usize) -> bool {
        let n = dim as f64;
        match self.kappa {
            Kappa::Zero => n * self.p < 2.0,
            Kappa::One => n * self.p.min(self.q) < 2.0,
        }
    }
}
