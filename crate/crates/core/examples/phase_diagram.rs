//! Outcome grid over exponents and amplitudes, straddling the critical
//! exponent `p = 2`. Outcomes refer to the simulated horizon: very small
//! subcritical data keep decaying well past `t_end` before they blow up.

use heatex::certificates::{phase_diagram, SweepBase};
use heatex::data::DataSpec;
use heatex::{ExchangerParams, Kappa, SpectralGrid};

fn main() -> heatex::Result<()> {
    let exchanger = ExchangerParams::unit();
    let base = SweepBase {
        grid: SpectralGrid::new(1, 2048, 64.0)?,
        exchanger,
        kappa: Kappa::Zero,
        q: None,
        data: DataSpec::gaussian(1.0, 1.0, 1.0),
        t_end: 60.0,
        dt: 0.01,
        dt_max: 0.1,
    };
    let cells = phase_diagram(&[1.0, 4.0], &[0.05, 0.5, 2.0], &base)?;
    println!("{:>4} {:>9} {:>9} {:>9}  outcome", "p", "amplitude", "m", "m0");
    for cell in cells {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>4} {:>9} {:>9} {:>9}  {}",
            cell.p,
            cell.amplitude,
            show(cell.m),
            show(cell.m0),
            cell.outcome
        );
    }
    Ok(())
}
