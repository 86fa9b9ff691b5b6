//! Symmetric ground state of the transverse-field Ising ring: anomalous
//! fluctuations in the ordered phase, normal ones in the paramagnet.
//!
//! ```text
//! cargo run --release --example ising_symmetric_ground
//! ```

use macroent::eigen::LanczosConfig;
use macroent::scaling::{classify, fit_exponent, sweep, Quantity, SweepConfig};
use macroent::stategen::ising_ground_with;
use macroent::{SiteOperator, StateFamily};

fn main() -> macroent::Result<()> {
    let ns = [8, 10, 12, 14];
    for h in [0.2, 0.6, 1.0, 1.5, 3.0] {
        let family = StateFamily::IsingGround { j: 1.0, h };
        let fit = fit_exponent(&sweep(&family, Quantity::MaxFluctuation, &ns, &SweepConfig::default())?)?;
        println!("h = {h:<4} p = {:.4}  {}", fit.exponent, classify(&fit));
    }

    let (psi, energy) = ising_ground_with(12, 1.0, 0.2, &LanczosConfig::default())?;
    let mz: f64 = (0..12).map(|x| psi.expect_site(x, &SiteOperator::Z)).sum::<macroent::Result<f64>>()?;
    println!("\nN = 12, h = 0.2: E0 = {energy:.10}, <Σσz> = {mz:.1e}");
    Ok(())
}
