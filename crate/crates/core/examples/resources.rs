//! Qubit and depth accounting as the number of index registers grows.

use qampenc::resources::model_estimate;

fn main() -> qampenc::Result<()> {
    let n = 10;
    println!("    M  qubits  work   depth  depth / ((N/M) log2(M+1))");
    for e in (0..=n).map(|k| model_estimate(n, 1 << k, 8, 0.1)) {
        let e = e?;
        let scale = (e.len as f64 / e.m as f64) * ((e.m + 1) as f64).log2();
        println!(
            "{:>5}  {:>6}  {:>4}  {:>6}  {:.2}",
            e.m,
            e.qubits_declared,
            e.qubits_work,
            e.encoder_depth,
            e.encoder_depth as f64 / scale
        );
    }
    Ok(())
}
