//! Linear evolution of Gaussian data: sup-norm decay exponent and
//! evanescent decay rate, against their predicted values.

use heatex::data::DataSpec;
use heatex::linear::{evanescent_decay_rate, sup_norm_decay_fit, window_times, LinearEvolver};
use heatex::{ExchangerParams, SpectralGrid};

fn main() -> heatex::Result<()> {
    let params = ExchangerParams::new(1.0, 2.0, 0.5, 1.5)?;
    for (dim, points, window) in [(1, 4096, (5.0, 30.0)), (2, 512, (4.0, 30.0))] {
        let grid = SpectralGrid::new(dim, points, 64.0)?;
        let data = DataSpec::gaussian(1.0, 0.5, 1.0).sample(&grid);
        let evolver = LinearEvolver::new(&data, &grid, &params)?;
        let trace = evolver.trace(&window_times((0.0, 30.0), 64))?;
        let sups: Vec<_> = trace.iter().map(|r| r.sup_sample_u()).collect();
        let exponent = -sup_norm_decay_fit(&sups, window)?;
        println!("N={dim}: sup |u| ~ t^-{exponent:.4} (expected {})", dim as f64 / 2.0);
        let first = trace.first().unwrap();
        let last = trace.last().unwrap();
        println!(
            "     mass u+v {:.12} -> {:.12}",
            first.mass_u + first.mass_v,
            last.mass_u + last.mass_v
        );
    }
    let grid = SpectralGrid::default_1d();
    let data = DataSpec::gaussian(1.0, 0.5, 1.0).sample(&grid);
    let rate = evanescent_decay_rate(&data, &grid, &params, (2.0, 6.0))?;
    println!(
        "evanescent part decays at rate {rate:.4}, bound (sqrt(mu)+sqrt(nu))^2/2 = {:.4}",
        params.evanescent_rate()
    );
    Ok(())
}
