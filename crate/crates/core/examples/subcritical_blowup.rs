//! Shaped data with a subcritical exponent blow up; the blow-up time is
//! stable under grid refinement.

use heatex::data::DataSpec;
use heatex::semilinear::{simulate, SimulationConfig};
use heatex::{ExchangerParams, Kappa, ReactionParams, SpectralGrid};

fn main() -> heatex::Result<()> {
    let params = ExchangerParams::unit();
    let reaction = ReactionParams::new(1.0, 1.0, Kappa::Zero)?;
    let spec = DataSpec::shaped(0.5, 4.0, &params);
    for points in [4096, 8192] {
        let grid = SpectralGrid::new(1, points, 64.0)?;
        let config = SimulationConfig::new(grid.clone(), params, reaction, spec.sample(&grid), 400.0).with_dt(0.01, 0.05);
        let trace = simulate(&config)?;
        println!("{points} points: {} after {} steps", trace.outcome, trace.rows.len() - 1);
    }
    Ok(())
}
