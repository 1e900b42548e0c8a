//! Radial profiles of the dispersal symbol `L(xi)` for several rate
//! combinations, with the low- and high-frequency slopes they approach.

use heatex::spectral::dispersal_asymptotics;
use heatex::{ExchangerParams, ModeSymbol};

fn main() -> heatex::Result<()> {
    let combos = [
        (1.0, 1.0, 1.0, 1.0),
        (1.0, 2.0, 1.0, 2.0),
        (1.0, 10.0, 1.0, 1.0),
        (10.0, 1.0, 0.1, 1.0),
    ];
    for (c, d, mu, nu) in combos {
        let params = ExchangerParams::new(c, d, mu, nu)?;
        let (low, high) = dispersal_asymptotics(&params);
        println!("c={c} d={d} mu={mu} nu={nu}: -L/|xi|^2 runs from {low:.4} to {high:.4}");
        for xi in [0.0, 0.1, 0.3, 1.0, 3.0, 10.0] {
            let l = ModeSymbol::at_radius(xi, &params).l();
            let slope = if xi > 0.0 { -l / (xi * xi) } else { f64::NAN };
            println!("  |xi|={xi:<5} L={l:>14.6e}  -L/|xi|^2={slope:.4}");
        }
    }
    Ok(())
}
