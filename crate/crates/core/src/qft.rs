//! Quantum Fourier transform applied to an encoded state, checked against
//! the classical DFT.
//!
//! Convention: `F_k = (1/sqrt N) sum_j exp(+2 pi i j k / N) w_j`, the same
//! sign the phase gates of the encoder use.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::amplify::schedule;
use crate::encoder::{build_plan, build_plan_with_phases, run_branch_sim, EncodingPlan};
use crate::error::{Error, Result};
use crate::preprocess::{preprocess, reconstructed_amplitudes, split_complex, InputVector};
use crate::resources::measured_depth;
use crate::sim::{fidelity, greedy_depth, DenseState, GateSpec};

/// QFT on qubits `0..n` (qubit 0 least significant). Controlled phases
/// `2 pi / 2^s` with `s > cutoff` are dropped; `None` keeps all of them.
pub fn build_qft(n: usize, cutoff: Option<usize>) -> Vec<GateSpec> {
    let keep = |s: usize| cutoff.is_none_or(|c| s <= c);
    let mut gates = Vec::new();
    for t in (0..n).rev() {
        gates.push(GateSpec::h(t));
        for c in (0..t).rev() {
            let s = t - c + 1;
            if keep(s) {
                gates.push(GateSpec::cphase(c, t, 2.0 * PI / (1u64 << s) as f64));
            }
        }
    }
    gates.extend((0..n / 2).map(|i| GateSpec::swap(i, n - 1 - i)));
    gates
}

/// Unitary DFT with the positive exponent.
pub fn classical_dft(w: &[Complex64]) -> Result<Vec<Complex64>> {
    if !w.len().is_power_of_two() {
        return Err(Error::BadShape(format!(
            "length {} is not a power of two",
            w.len()
        )));
    }
    let mut out = w.to_vec();
    FftPlanner::new()
        .plan_fft_inverse(w.len())
        .process(&mut out);
    let scale = (w.len() as f64).sqrt().recip();
    out.iter_mut().for_each(|a| *a *= scale);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QftReport {
    pub n: usize,
    /// QFT of the heralded encoder output against the DFT of the quantized
    /// target computed classically.
    pub fidelity_vs_dft: f64,
    pub rho: f64,
    /// Amplification rounds needed for the heralded state.
    pub m: usize,
    pub encoder_depth: usize,
    pub qft_depth: usize,
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let s = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt().recip();
    v.into_iter().map(|a| a * s).collect()
}

/// Encode `v` with `m` index registers at `precision`, run the QFT on the
/// heralded system state and compare with the classical transform.
pub fn run_qft_check(v: &InputVector, m: usize, precision: usize) -> Result<QftReport> {
    let (plan, target): (EncodingPlan, Vec<Complex64>) = if v.is_real() {
        let pre = preprocess(v, precision)?;
        let target = reconstructed_amplitudes(&pre.b)
            .into_iter()
            .map(Complex64::from)
            .collect();
        (build_plan(&pre.b, m)?, target)
    } else {
        let split = split_complex(v, precision)?;
        let plan = build_plan_with_phases(&split.b_r, m, Some(&split.b_phi))?;
        (plan, split.target_amplitudes())
    };
    let out = run_branch_sim(&plan, false)?.output;
    let qft = build_qft(v.n_qubits(), None);
    let mut state = DenseState::from_amplitudes(out.psi_g)?;
    state.apply_circuit(&qft)?;
    let expected = classical_dft(&normalized(target))?;
    Ok(QftReport {
        n: v.n_qubits(),
        fidelity_vs_dft: fidelity(state.amplitudes(), &expected)?.clamp(0.0, 1.0),
        rho: out.rho,
        m: schedule(out.rho)?.m,
        encoder_depth: measured_depth(&plan)?,
        qft_depth: greedy_depth(&qft),
    })
}
