//! Spectral simulation and verification toolkit for the heat exchanger
//! reaction-diffusion system
//!
//! ```text
//! u_t = c Δu - μu + νv + u^(1+p)
//! v_t = d Δv + μu - νv + κ v^(1+q)
//! ```
//!
//! on a periodic box in one or two dimensions.

pub mod certificates;
pub mod cli;
pub mod data;
pub mod error;
pub mod grid;
pub mod linear;
pub mod output;
pub mod params;
pub mod phase;
pub mod semilinear;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{FieldPair, SpectralGrid, SpectrumPair};
pub use params::{ExchangerParams, Kappa, ReactionParams};
pub use spectral::{build_symbols, ModeSymbol, SymbolTable};
