//! Iterated single-site measurements on macroscopically entangled states:
//! how many are needed before every pair correlation drops below ε.
//!
//! ```text
//! cargo run --release --example thermodynamic_emergence
//! ```

use macroent::seeds::task_rng;
use macroent::stability::{iterated_reduction, ReductionPolicy};
use macroent::StateFamily;

fn main() -> macroent::Result<()> {
    let eps = 0.05;
    let cases = [
        (StateFamily::Cat, 12),
        (StateFamily::IsingGround { j: 1.0, h: 0.2 }, 12),
        (StateFamily::IsingGround { j: 1.0, h: 0.6 }, 12),
        (StateFamily::W, 12),
        (StateFamily::Dicke { k: 3 }, 10),
    ];
    for policy in [ReductionPolicy::ArgmaxPair, ReductionPolicy::RoundRobinZ] {
        println!("policy {policy:?}, ε = {eps}, 100 trajectories");
        for (family, n) in &cases {
            let psi = family.generate(*n)?;
            let mut counts: Vec<usize> = (0..100)
                .map(|seed| iterated_reduction(&psi, eps, policy, &mut task_rng(seed, 0)).map(|o| o.count))
                .collect::<macroent::Result<_>>()?;
            counts.sort_unstable();
            println!(
                "  {:<28} N={n:<3} median {:>4.1}  max {:>2}",
                family.label(),
                (counts[49] + counts[50]) as f64 / 2.0,
                counts[99]
            );
        }
    }
    Ok(())
}
