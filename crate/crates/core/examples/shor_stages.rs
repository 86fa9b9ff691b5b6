//! The three stages of order finding for M = 15 and M = 21: fluctuation
//! class, success probability and sensitivity to one dephasing kick.
//!
//! ```text
//! cargo run --release --example shor_stages
//! ```

use macroent::decoherence::NoiseModel;
use macroent::shor::{build_stage, noisy_stage_report, stage_index_p, success_probability, ShorInstance, Stage};

fn main() -> macroent::Result<()> {
    let gt = 1e-3;
    for (m, x) in [(15, 7), (21, 2)] {
        let inst = ShorInstance::new(m, x)?;
        let t_clean = success_probability(&build_stage(&inst, Stage::Final)?.state, &inst)?;
        println!("M={m} x={x}: r={}, {} qubits, T_clean = {t_clean:.4}", inst.r, inst.n_total());
        for stage in Stage::ALL {
            let idx = stage_index_p(&inst, stage)?;
            print!(
                "  {:<6} max fluct {:>8.3}  /N {:>6.3}  {:<13}",
                stage.name(),
                idx.fluctuation.relaxed_max,
                idx.ratio,
                idx.class.to_string()
            );
            for (name, noise) in [("white", NoiseModel::white(1.0)?), ("collective", NoiseModel::collective(1.0)?)] {
                let rep = noisy_stage_report(&inst, stage, &noise, gt, 400, 1)?;
                print!("  {name}: 1-F {:.2e} dT {:+.2e}", rep.one_minus_f, rep.delta_t);
            }
            println!();
        }
    }
    Ok(())
}
