//! Perturbative decoherence rate against the Monte Carlo fidelity decay for
//! several states and noise correlation lengths.
//!
//! ```text
//! cargo run --release --example decoherence_rates
//! ```

use macroent::decoherence::{gamma_report, NoiseModel};
use macroent::StateFamily;

fn main() -> macroent::Result<()> {
    let n = 8;
    let noises = [
        ("white", NoiseModel::white(1.0)?),
        ("exp xi=1", NoiseModel::exponential(1.0, 1.0)?),
        ("exp xi=4", NoiseModel::exponential(1.0, 4.0)?),
        ("collective", NoiseModel::collective(1.0)?),
    ];
    let families = [StateFamily::Cat, StateFamily::W, StateFamily::PlusAll, StateFamily::IsingGround { j: 1.0, h: 0.5 }];
    for family in &families {
        let psi = family.generate(n)?;
        println!("{} (N = {n})", family.label());
        for (name, noise) in &noises {
            let r = gamma_report(&psi, noise, 1e-3, 4000, 3)?;
            println!("  {name:<11} pert {:>8.4}  mc {:>8.4} ± {:.4}", r.gamma_pert, r.gamma_mc, r.mc_stderr);
        }
    }
    Ok(())
}
