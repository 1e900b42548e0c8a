//! With `c = d` and `mu = nu` the system uncouples; the spectral solver
//! matches the explicit heat-multiplier formula.

use heatex::data::DataSpec;
use heatex::grid::sup_norm;
use heatex::linear::{equal_rates_solution, solve_linear};
use heatex::{ExchangerParams, SpectralGrid};

fn main() -> heatex::Result<()> {
    let grid = SpectralGrid::default_1d();
    let params = ExchangerParams::new(0.7, 0.7, 1.3, 1.3)?;
    let data = DataSpec::gaussian(1.0, 0.2, 1.5).sample(&grid);
    for t in [0.1, 1.0, 10.0] {
        let spectral = solve_linear(&data, t, &grid, &params)?.total;
        let closed = equal_rates_solution(&data, t, &grid, &params)?;
        let err_u = spectral.u.iter().zip(&closed.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let err_v = spectral.v.iter().zip(&closed.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!(
            "t={t:<4} sup u={:.6} sup v={:.6} max error {:.2e}",
            sup_norm(&spectral.u),
            sup_norm(&spectral.v),
            err_u.max(err_v)
        );
    }
    Ok(())
}
