//! A certified small-data run decays and stays under its envelope.

use heatex::certificates::certify;
use heatex::data::DataSpec;
use heatex::semilinear::{simulate, SimulationConfig};
use heatex::{ExchangerParams, Kappa, ReactionParams, SpectralGrid};

fn main() -> heatex::Result<()> {
    let params = ExchangerParams::unit();
    let reaction = ReactionParams::new(4.0, 4.0, Kappa::One)?;
    let spec = DataSpec::gaussian(0.05, 0.05, 1.0);
    let cert = certify(&params, &reaction, &spec, 1)?;
    let grid = SpectralGrid::default_1d();
    let config = SimulationConfig::new(grid.clone(), params, reaction, spec.sample(&grid), 40.0).with_dt(0.01, 0.1);
    let trace = simulate(&config)?;
    println!("outcome: {}", trace.outcome);
    let worst = trace
        .rows
        .iter()
        .map(|r| (r.sup_u * (1.0 + r.t).sqrt() / cert.bound_u).max(r.sup_v * (1.0 + r.t).sqrt() / cert.bound_v))
        .fold(0.0, f64::max);
    println!("largest sup-norm as a fraction of the envelope: {worst:.4}");
    Ok(())
}
