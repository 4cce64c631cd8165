//! Build the encoder for a vector and simulate it branch by branch.

use qampenc::encoder::{build_plan, run_branch_sim};
use qampenc::preprocess::{normalize_real, preprocess};

fn main() -> qampenc::Result<()> {
    let v = normalize_real(&[0.9, -0.2, 0.4, 0.7, -0.5, 0.1, 0.3, -0.8])?;
    let pre = preprocess(&v, 8)?;
    for m in [1, 2, 8] {
        let plan = build_plan(&pre.b, m)?;
        let run = run_branch_sim(&plan, true)?;
        println!(
            "M = {m}: {} chunks, {} qubits, {} gates, P(FLAG = 1) = {:.6}",
            plan.chunk_count(),
            plan.layout.total,
            plan.gates().count(),
            run.output.rho
        );
    }
    let run = run_branch_sim(&build_plan(&pre.b, 2)?, true)?;
    let psi2 = run
        .checkpoints
        .iter()
        .find(|c| c.label == "psi2")
        .expect("fan-out checkpoint");
    println!(
        "after fan-out, branch 5 holds {:?}",
        psi2.branches[5].registers
    );
    let psi_g: Vec<String> = run
        .output
        .psi_g
        .iter()
        .map(|a| format!("{:+.4}", a.re))
        .collect();
    println!("psi_G = [{}]", psi_g.join(", "));
    Ok(())
}
