//! Global-existence certificate for small Gaussian data in the
//! supercritical regime.

use heatex::certificates::{certify, decay_constants, m_zero};
use heatex::data::DataSpec;
use heatex::{Error, ExchangerParams, Kappa, ReactionParams};

fn main() -> heatex::Result<()> {
    let params = ExchangerParams::unit();
    let reaction = ReactionParams::new(4.0, 4.0, Kappa::One)?;
    let constants = decay_constants(&params, 1)?;
    println!("k = {:.6}, ell = {:.6}", constants.k, constants.ell);
    println!("m0 = {:.6}", m_zero(&reaction, &constants)?);
    for amplitude in [0.02, 0.05, 0.1] {
        let spec = DataSpec::gaussian(amplitude, amplitude, 1.0);
        match certify(&params, &reaction, &spec, 1) {
            Ok(cert) => println!(
                "amplitude {amplitude}: m = {:.4}, sup|u| <= {:.4}/(1+t)^(1/2), sup|v| <= {:.4}/(1+t)^(1/2)",
                cert.mass.m, cert.bound_u, cert.bound_v
            ),
            Err(Error::CertificateUnavailable { m, m0 }) => {
                println!("amplitude {amplitude}: m = {m:.4} is not below m0 = {m0:.4}")
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
