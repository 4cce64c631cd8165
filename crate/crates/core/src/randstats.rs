//! Monte Carlo statistics of `|x|_inf^2 / |x|_2^2` for vectors drawn
//! uniformly from the unit sphere.
//!
//! Sample `i` of a run with seed `s` comes from ChaCha8 seeded with `s` on
//! stream `i`, so every sample is reproducible on its own and the result
//! does not depend on the thread count. Normal deviates use the Marsaglia
//! polar method; sums are pairwise in sample order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 52) as f64) - 1.0
}

/// Fill `out` with standard normal deviates.
fn fill_normal(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let mut i = 0;
    while i < out.len() {
        let (u, v) = (uniform_pm1(rng), uniform_pm1(rng));
        let s = u * u + v * v;
        if s == 0.0 || s >= 1.0 {
            continue;
        }
        let f = (-2.0 * s.ln() / s).sqrt();
        out[i] = u * f;
        if i + 1 < out.len() {
            out[i + 1] = v * f;
        }
        i += 2;
    }
}

/// Gaussian vector number `index` of the run seeded with `seed`. Its
/// direction is uniform on the sphere.
pub fn sample_gaussian(len: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut x = vec![0.0; len];
    fill_normal(&mut rng, &mut x);
    x
}

/// `max x_i^2 / sum x_i^2`.
pub fn max_share(x: &[f64]) -> f64 {
    let (max, sum) = x
        .iter()
        .fold((0.0f64, 0.0f64), |(m, s), v| (m.max(v * v), s + v * v));
    max / sum
}

/// Sum in a fixed pairwise order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = pairwise_sum(x) / n;
    let dev: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, pairwise_sum(&dev) / (n - 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    #[serde(rename = "N")]
    pub len: usize,
    pub count: usize,
    pub seed: u64,
    pub mean_ratio: f64,
    pub var_ratio: f64,
    /// Mean of `tau = n sqrt(N ratio)`, i.e. `n / sqrt(rho)`.
    pub mean_tau: f64,
    pub var_tau: f64,
}

pub fn sample_ratio_stats(len: usize, count: usize, seed: u64) -> Result<SampleStats> {
    if len < 2 || count < 2 {
        return Err(Error::Invalid(format!(
            "need N >= 2 and count >= 2, got N = {len}, count = {count}"
        )));
    }
    let ratios: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| max_share(&sample_gaussian(len, seed, i)))
        .collect();
    let n = (len as f64).log2();
    let taus: Vec<f64> = ratios.iter().map(|r| n * (len as f64 * r).sqrt()).collect();
    let (mean_ratio, var_ratio) = mean_var(&ratios);
    let (mean_tau, var_tau) = mean_var(&taus);
    Ok(SampleStats {
        len,
        count,
        seed,
        mean_ratio,
        var_ratio,
        mean_tau,
        var_tau,
    })
}

/// Leading-order mean of the ratio, `2 ln N / N`.
pub fn predicted_mean(len: f64) -> f64 {
    2.0 * len.ln() / len
}

/// Order-of-magnitude reference for the variance, `ln N / N^2` (the
/// constant is not known).
pub fn predicted_var(len: f64) -> f64 {
    len.ln() / (len * len)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReportRow {
    #[serde(rename = "N")]
    pub len: usize,
    pub count: usize,
    pub seed: u64,
    pub mean_ratio: f64,
    pub var_ratio: f64,
    pub predicted_mean: f64,
    pub mean_over_predicted: f64,
    pub mean_tau: f64,
    pub var_tau: f64,
    pub n_pow_1_5: f64,
    pub tau_over_n_pow_1_5: f64,
}

pub fn scaling_report(lens: &[usize], count: usize, seed: u64) -> Result<Vec<ScalingReportRow>> {
    lens.iter()
        .map(|&len| {
            let s = sample_ratio_stats(len, count, seed)?;
            let predicted = predicted_mean(len as f64);
            let n_pow = (len as f64).log2().powf(1.5);
            Ok(ScalingReportRow {
                len,
                count,
                seed,
                mean_ratio: s.mean_ratio,
                var_ratio: s.var_ratio,
                predicted_mean: predicted,
                mean_over_predicted: s.mean_ratio / predicted,
                mean_tau: s.mean_tau,
                var_tau: s.var_tau,
                n_pow_1_5: n_pow,
                tau_over_n_pow_1_5: s.mean_tau / n_pow,
            })
        })
        .collect()
}
