//! Cluster range Ω(ε) across sizes: bounded for the paramagnet and the Bell
//! pair, equal to N for the cat state.
//!
//! ```text
//! cargo run --release --example cluster_range
//! ```

use macroent::correlator::build_vcm;
use macroent::scaling::omega_range;
use macroent::StateFamily;

fn main() -> macroent::Result<()> {
    let eps = 0.05;
    let families = [
        StateFamily::IsingGround { j: 1.0, h: 3.0 },
        StateFamily::IsingGround { j: 1.0, h: 1.2 },
        StateFamily::BellPair,
        StateFamily::W,
        StateFamily::Cat,
    ];
    println!("Ω({eps}) on a ring");
    for family in &families {
        let omegas: Vec<String> = [8, 10, 12]
            .iter()
            .map(|&n| Ok(format!("N={n}: {}", omega_range(&family.generate(n)?, eps)?)))
            .collect::<macroent::Result<_>>()?;
        println!("{:<32} {}", family.label(), omegas.join(", "));
    }

    println!("\npair strength vs distance, ising_ground(h=3), N = 12");
    let psi = StateFamily::IsingGround { j: 1.0, h: 3.0 }.generate(12)?;
    let vcm = build_vcm(&psi);
    for d in 1..=6 {
        println!("  d={d}: {:.3e}", vcm.pair_strength(0, d));
    }
    Ok(())
}
