//! Mermin value of cat states against the local-hidden-variable bound.
//!
//! ```text
//! cargo run --release --example mermin_violation
//! ```

use macroent::{mermin_value, StateFamily};

fn main() -> macroent::Result<()> {
    println!("{:>3} {:>12} {:>10} {:>8}", "N", "value", "LHV bound", "ratio");
    for n in 2..=11 {
        let m = mermin_value(&StateFamily::Cat.generate(n)?)?;
        println!("{n:>3} {:>12.4} {:>10.4} {:>8.3}", m.value, m.lhv_bound, m.ratio);
    }
    let w = mermin_value(&StateFamily::W.generate(5)?)?;
    println!("\nW state, N=5: ratio {:.4}", w.ratio);
    Ok(())
}
