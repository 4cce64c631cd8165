//! Sector densities of a synthetic noise image at decreasing sector sizes.

use qampenc::imagery::{density_scaling_curve, load_pgm, synthetic, write_pgm};

fn main() -> qampenc::Result<()> {
    let img = load_pgm(&write_pgm(&synthetic::gaussian_noise(512, 512, 3)))?;
    let curve = density_scaling_curve(&img, &[1, 2, 4, 8, 16, 32, 64, 128])?;
    println!("sector_size  mean_rho  c_log     c_sqrt");
    for r in &curve.rows {
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:>11}  {}    {}    {}",
            r.sector_size,
            f(r.mean_rho),
            f(r.c_log),
            f(r.c_sqrt)
        );
    }
    Ok(())
}
