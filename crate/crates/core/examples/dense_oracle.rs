//! Cross-check the branch simulator against gate-by-gate dense simulation,
//! Toffoli decompositions included.

use qampenc::encoder::{build_plan, compare_with_branch};
use qampenc::preprocess::{normalize_real, preprocess};

fn main() -> qampenc::Result<()> {
    for (values, m, l) in [
        (vec![1.0, 2.0, -1.0, 2.0], 2, 4),
        (vec![0.3, -0.9, 0.5, 0.1, 0.8, -0.2, 0.6, 0.4], 1, 3),
    ] {
        let b = preprocess(&normalize_real(&values)?, l)?.b;
        let r = compare_with_branch(&build_plan(&b, m)?)?;
        println!(
            "N = {}, M = {m}, L = {l}: {} qubits, {} gates, fidelity {:.12}, P(ancillas 0) {:.12}",
            values.len(),
            r.qubits,
            r.gates,
            r.fidelity,
            r.ancilla_zero_probability
        );
    }
    Ok(())
}
