//! Angles and binary angle matrix of a small vector.

use qampenc::preprocess::{normalize_real, preprocess};

fn main() -> qampenc::Result<()> {
    let v = normalize_real(&[1.0, 2.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0])?;
    let pre = preprocess(&v, 6)?;
    println!("k   theta      B       c_k");
    for k in 0..pre.len {
        let bits: String = pre.b.row_bits(k).iter().map(|b| b.to_string()).collect();
        println!(
            "{k}  {:+.6}  {bits}  {:+.6}",
            pre.theta.as_slice()[k],
            pre.w[k]
        );
    }
    println!(
        "rho exact {:.6}, heralding probability {:.6}",
        pre.rho_exact, pre.rho_circuit
    );
    Ok(())
}
