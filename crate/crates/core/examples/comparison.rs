//! Dropping the `v` reaction term gives a pointwise lower solution.

use heatex::data::DataSpec;
use heatex::semilinear::{comparison_check, SimulationConfig};
use heatex::{ExchangerParams, Kappa, ReactionParams, SpectralGrid};

fn main() -> heatex::Result<()> {
    let grid = SpectralGrid::new(1, 2048, 64.0)?;
    let params = ExchangerParams::new(1.0, 0.5, 1.0, 2.0)?;
    let data = DataSpec::gaussian(0.8, 0.8, 1.0).sample(&grid);
    let times: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
    let config = |kappa| -> heatex::Result<SimulationConfig> {
        let reaction = ReactionParams::new(1.0, 1.0, kappa)?;
        Ok(SimulationConfig::new(grid.clone(), params, reaction, data.clone(), 5.0).with_snapshots(times.clone()))
    };
    let excess = comparison_check(&config(Kappa::Zero)?, &config(Kappa::One)?)?;
    println!("largest excess of the kappa = 0 run over the kappa = 1 run: {excess:.3e}");
    Ok(())
}
