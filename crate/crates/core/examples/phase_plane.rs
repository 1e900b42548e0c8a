//! Blur-width search and comparison ODE for the blow-up construction.

use heatex::phase::{alpha_grid, det_m_alpha, find_lambda, integrate_ode, invariance_check, sample_omega, PhaseGeometry};
use heatex::ExchangerParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> heatex::Result<()> {
    let params = ExchangerParams::unit();
    let p = 1.0;
    let choice = find_lambda(1.0, 1.0, &params, p, 1)?;
    println!(
        "epsilon = {}, lambda = {}, start (U, V) = ({:.6}, {:.6})",
        choice.epsilon, choice.lambda, choice.u0, choice.v0
    );
    let g = PhaseGeometry::new(choice.lambda, &params, p);
    println!("chi = {:.6}, E0 = {:?}, E1 = {:?}", g.chi, g.e0, g.e1);
    let min_det = alpha_grid(101)
        .into_iter()
        .map(|a| det_m_alpha(a, choice.lambda, &params, p))
        .collect::<heatex::Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    println!("min det on the segment: {min_det:.3e}");
    let run = integrate_ode(choice.u0, choice.v0, choice.lambda, &params, p, 100.0)?;
    println!("comparison ODE: {} ({} steps)", run.outcome.label(), run.trajectory.len());
    let starts = sample_omega(&g, 4.0, 50, &mut ChaCha8Rng::seed_from_u64(1));
    let report = invariance_check(&starts, choice.lambda, &params, p, 100.0)?;
    println!("{} random starts: {} exits, {} blow-ups", report.starts, report.exits, report.blowups);
    Ok(())
}
