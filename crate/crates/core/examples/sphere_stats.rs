//! Mean share of the largest entry for random unit vectors.

use qampenc::randstats::scaling_report;

fn main() -> qampenc::Result<()> {
    println!("      N  mean_ratio  / (2 ln N / N)  tau / n^1.5");
    for r in scaling_report(&[64, 256, 1024, 4096], 4000, 7)? {
        println!(
            "{:>7}  {:.6}    {:.3}           {:.3}",
            r.len, r.mean_ratio, r.mean_over_predicted, r.tau_over_n_pow_1_5
        );
    }
    Ok(())
}
