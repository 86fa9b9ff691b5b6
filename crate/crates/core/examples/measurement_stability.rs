//! Pair strength against measurement disturbance for every pair of sites,
//! across a catalog of states at N = 10.
//!
//! ```text
//! cargo run --release --example measurement_stability
//! ```

use macroent::stability::stability_vs_cluster;
use macroent::StateFamily;

fn main() -> macroent::Result<()> {
    let eps = 0.01;
    let catalog = [
        StateFamily::ProductRandom { seed: 0 },
        StateFamily::W,
        StateFamily::BellPair,
        StateFamily::Cat,
        StateFamily::IsingGround { j: 1.0, h: 3.0 },
        StateFamily::IsingGround { j: 1.0, h: 0.2 },
    ];
    for family in &catalog {
        let rep = stability_vs_cluster(&family.generate(10)?, eps)?;
        let (max_s, max_d) = rep
            .rows
            .iter()
            .fold((0.0f64, 0.0f64), |acc, r| (acc.0.max(r.pair_strength), acc.1.max(r.disturbance)));
        let c_hat = rep.c_hat.map_or("-".to_string(), |c| format!("{c:.3}"));
        println!(
            "{:<28} max pair strength {max_s:.3e}  max disturbance {max_d:.3e}  C_hat {c_hat}  violations {}",
            family.label(),
            rep.violations.len()
        );
    }

    println!("\nising_ground(h=3), N = 10, site 0 against distance");
    let rep = stability_vs_cluster(&StateFamily::IsingGround { j: 1.0, h: 3.0 }.generate(10)?, eps)?;
    for r in rep.rows.iter().filter(|r| r.x == 0 && r.y <= 5) {
        println!("  d={}  pair strength {:.3e}  disturbance {:.3e}", r.distance, r.pair_strength, r.disturbance);
    }
    Ok(())
}
