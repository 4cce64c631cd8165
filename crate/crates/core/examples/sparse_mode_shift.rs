//! Vectors dominated by one value only rotate the entries off that value.

use qampenc::encoder::{build_plan, mode_shift_plan, run_branch_sim};
use qampenc::preprocess::{compress_mode_shift, normalize_real, preprocess};
use qampenc::resources::{measured_depth, sparse_estimate};
use qampenc::sim::fidelity;

fn main() -> qampenc::Result<()> {
    let mut values = vec![0.5; 32];
    values[3] = -0.2;
    values[20] = 1.0;
    let b = preprocess(&normalize_real(&values)?, 6)?.b;
    let shift = compress_mode_shift(&b);
    let full = build_plan(&b, 4)?;
    let sparse = mode_shift_plan(&b, 4)?;
    let a = run_branch_sim(&full, false)?.output;
    let s = run_branch_sim(&sparse, false)?.output;
    println!(
        "mode {:.4}, {} of {} entries off the mode",
        shift.mode,
        shift.s(),
        b.len()
    );
    println!(
        "depth full {}, shifted {}",
        measured_depth(&full)?,
        measured_depth(&sparse)?
    );
    println!(
        "model depth shifted {}",
        sparse_estimate(shift.s(), 5, 4, 6, a.rho)?.encoder_depth
    );
    println!(
        "fidelity between outputs {:.12}",
        fidelity(&a.psi_g, &s.psi_g)?
    );
    Ok(())
}
