//! Encode complex vectors, apply the QFT and compare with the classical DFT.

use num_complex::Complex64;
use qampenc::preprocess::normalize;
use qampenc::qft::{build_qft, run_qft_check};

fn main() -> qampenc::Result<()> {
    println!("5-qubit QFT: {} gates", build_qft(5, None).len());
    for n in 2..=6 {
        let len = 1usize << n;
        let values: Vec<Complex64> = (0..len)
            .map(|k| Complex64::from_polar(1.0 + (k % 3) as f64, 0.7 * k as f64))
            .collect();
        let r = run_qft_check(&normalize(&values)?, 2, 8)?;
        println!(
            "n = {n}: fidelity {:.12}, rho {:.4}, encoder depth {}, QFT depth {}",
            r.fidelity_vs_dft, r.rho, r.encoder_depth, r.qft_depth
        );
    }
    Ok(())
}
