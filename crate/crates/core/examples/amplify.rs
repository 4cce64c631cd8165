//! Amplification schedule and an amplified encoding of a peaked vector.

use qampenc::amplify::{run_amplified_encoding, schedule};
use qampenc::encoder::build_plan;
use qampenc::preprocess::{normalize_real, preprocess};

fn main() -> qampenc::Result<()> {
    for rho in [0.01, 0.1, 0.25, 0.5, 0.625, 1.0] {
        let s = schedule(rho)?;
        println!(
            "rho {rho:<5} m {:>2} success {:.4}",
            s.m, s.predicted_success
        );
    }
    let mut values = vec![0.05; 64];
    values[17] = 1.0;
    let b = preprocess(&normalize_real(&values)?, 8)?.b;
    let enc = run_amplified_encoding(&build_plan(&b, 4)?)?;
    println!(
        "peaked vector: rho {:.4}, {} rounds, success {:.4}, fidelity {:.12}",
        enc.rho, enc.m, enc.achieved_success, enc.fidelity_vs_target
    );
    Ok(())
}
