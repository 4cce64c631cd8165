//! Amplitude amplification of the heralded `FLAG=1` branch.
//!
//! The Grover operator is `Q = -E S0 E^dag S` with `S = Z` on `FLAG` and
//! `S0 = I - 2|0><0|`. Since the encoder `E` leaves every ancilla at `|0>`,
//! `-E S0 E^dag` acts on `SYS (x) FLAG` as the reflection `2|psi><psi| - I`
//! about the encoded state, which is what the reduced implementation uses.
//! After `m` steps the good-branch overlap is `sin((2m + 1) theta_a)` with
//! `sin^2 theta_a = rho`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoder::{reduced_joint, run_branch_sim, EncodingPlan};
use crate::error::{Error, Result};
use crate::sim::{fidelity, inverse_circuit, lower_gate, DenseState, GateKind, GateSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AASchedule {
    pub rho: f64,
    pub theta_a: f64,
    pub m: usize,
    pub predicted_success: f64,
    /// The success probability sits on the `max(1 - rho, rho)` floor (for
    /// example `m = 0` just above `rho = 1/2`).
    pub at_floor: bool,
}

/// Iteration count `floor(pi / (4 asin sqrt(rho)))` and the resulting
/// success probability.
pub fn schedule(rho: f64) -> Result<AASchedule> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::BadDensity(rho));
    }
    let theta_a = rho.sqrt().asin();
    let m = (PI / (4.0 * theta_a)).floor() as usize;
    let predicted_success = success_after(theta_a, m);
    Ok(AASchedule {
        rho,
        theta_a,
        m,
        predicted_success,
        at_floor: predicted_success - rho.max(1.0 - rho) < 1e-9,
    })
}

pub fn success_after(theta_a: f64, m: usize) -> f64 {
    ((2 * m + 1) as f64 * theta_a).sin().powi(2)
}

fn check_normalized(psi: &[Complex64]) -> Result<()> {
    let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::BadState(norm));
    }
    Ok(())
}

/// One application of `Q` to a joint `SYS (x) FLAG` vector (index
/// `k + N * flag`), with `psi` the encoded state.
pub fn grover_step(state: &[Complex64], psi: &[Complex64]) -> Result<Vec<Complex64>> {
    check_normalized(psi)?;
    if state.len() != psi.len() || !psi.len().is_multiple_of(2) {
        return Err(Error::BadShape(format!(
            "state of length {} against psi of length {}",
            state.len(),
            psi.len()
        )));
    }
    let half = psi.len() / 2;
    let flagged: Vec<Complex64> = state
        .iter()
        .enumerate()
        .map(|(i, &a)| if i >= half { -a } else { a })
        .collect();
    let overlap: Complex64 = psi.iter().zip(&flagged).map(|(p, x)| p.conj() * x).sum();
    Ok(psi
        .iter()
        .zip(&flagged)
        .map(|(p, x)| 2.0 * overlap * p - x)
        .collect())
}

/// `Q^m psi`.
pub fn amplify_reduced(psi: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let mut state = psi.to_vec();
    for _ in 0..m {
        state = grover_step(&state, psi)?;
    }
    Ok(state)
}

/// Gates flipping the sign of `|0...0>` on `targets`: `X` everywhere, an
/// MCX of all but the last target into `anc`, `CZ(anc, last)`, and the
/// mirror. `anc` and `work` must start (and end) at `|0>`.
pub fn s0_gates(targets: &[usize], anc: usize, work: &[usize]) -> Result<Vec<GateSpec>> {
    let (&last, rest) = targets
        .split_last()
        .ok_or_else(|| Error::BadShape("S0 needs at least one target".into()))?;
    let flip = GateSpec::new(GateKind::X, targets.to_vec(), vec![]);
    let mut gates = vec![flip.clone()];
    let mark = if rest.is_empty() {
        vec![GateSpec::x(anc)]
    } else {
        lower_gate(&GateSpec::mcx(rest.to_vec(), anc), work)?
    };
    gates.extend(mark.iter().cloned());
    gates.push(GateSpec::cz(anc, last));
    gates.extend(mark);
    gates.push(flip);
    Ok(gates)
}

/// Standalone `S0` on qubits `0..q`, with the ancilla at `q` and work
/// qubits after it.
#[derive(Clone, Debug, PartialEq)]
pub struct S0Circuit {
    pub gates: Vec<GateSpec>,
    pub targets: usize,
    pub total_qubits: usize,
}

pub fn build_s0_circuit(q: usize) -> Result<S0Circuit> {
    if q < 2 {
        return Err(Error::Invalid(format!("S0 needs q >= 2, got {q}")));
    }
    let work_len = crate::sim::decompose::work_needed(q - 1);
    let work: Vec<usize> = (q + 1..q + 1 + work_len).collect();
    let targets: Vec<usize> = (0..q).collect();
    Ok(S0Circuit {
        gates: s0_gates(&targets, q, &work)?,
        targets: q,
        total_qubits: q + 1 + work_len,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifiedEncoding {
    pub m: usize,
    pub rho: f64,
    pub predicted_success: f64,
    pub achieved_success: f64,
    pub fidelity_vs_target: f64,
    pub at_floor: bool,
    /// Post-selected `SYS` state.
    pub state: Vec<Complex64>,
}

/// Encode, amplify with the scheduled number of steps, and post-select.
pub fn run_amplified_encoding(plan: &EncodingPlan) -> Result<AmplifiedEncoding> {
    let out = run_branch_sim(plan, false)?.output;
    let sched = schedule(out.rho)?;
    let psi = out.joint();
    let fin = amplify_reduced(&psi, sched.m)?;
    let half = psi.len() / 2;
    let good = &fin[half..];
    let achieved_success: f64 = good.iter().map(|a| a.norm_sqr()).sum();
    let scale = achieved_success.sqrt().recip();
    let state: Vec<Complex64> = good.iter().map(|a| a * scale).collect();
    Ok(AmplifiedEncoding {
        m: sched.m,
        rho: out.rho,
        predicted_success: sched.predicted_success,
        achieved_success,
        fidelity_vs_target: fidelity(&state, &out.psi_g)?,
        at_floor: sched.at_floor,
        state,
    })
}

/// Gate-level amplification on the full register set.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseAmplified {
    /// `SYS (x) FLAG` slice with all ancillas at 0.
    pub joint: Vec<Complex64>,
    pub ancilla_zero_probability: f64,
}

/// Run `E`, then `m` times `S`, `E^dag`, `S0`, `E` and the leading `-1`
/// (an `RY(2 pi)` on `FLAG`). `S0` acts on `SYS (x) FLAG` only and borrows
/// idle ancillas as its own ancilla and work qubits: they are all `|0>`
/// between `E^dag` and `E`.
pub fn dense_amplified(plan: &EncodingPlan, m: usize) -> Result<DenseAmplified> {
    let layout = &plan.layout;
    let e = plan.lowered_gates()?;
    let e_dag = inverse_circuit(&e);
    let ancillas = layout.ancillas();
    let s0 = s0_gates(&layout.reduced_qubits(), ancillas[0], &ancillas[1..])?;
    let mut state = DenseState::zero(layout.total)?;
    state.apply_circuit(&e)?;
    for _ in 0..m {
        state.apply_gate(&GateSpec::z(layout.flag))?;
        state.apply_circuit(&e_dag)?;
        state.apply_circuit(&s0)?;
        state.apply_circuit(&e)?;
        state.apply_gate(&GateSpec::ry(layout.flag, 2.0 * PI))?;
    }
    Ok(DenseAmplified {
        joint: reduced_joint(plan, &state),
        ancilla_zero_probability: state.probability_all_zero(&ancillas),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::build_plan;
    use crate::preprocess::{compute_theta, normalize_real, quantize_theta};
    use proptest::prelude::*;

    fn joint_for(rho: f64) -> Vec<Complex64> {
        // good and bad branches over N = 4, spread unevenly
        let good = [0.5, -0.5, 0.5, 0.5];
        let bad = [0.1, 0.7, -0.1, 0.7];
        let nb = bad.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
        bad.iter()
            .map(|x| Complex64::new(x / nb * (1.0 - rho).sqrt(), 0.0))
            .chain(good.iter().map(|x| Complex64::new(x * rho.sqrt(), 0.0)))
            .collect()
    }

    #[test]
    fn schedule_examples() {
        let s = schedule(1.0).unwrap();
        assert_eq!((s.m, s.predicted_success), (0, 1.0));
        assert!((s.theta_a - PI / 2.0).abs() < 1e-15);
        let s = schedule(0.625).unwrap();
        assert_eq!(s.m, 0);
        assert!((s.predicted_success - 0.625).abs() < 1e-12);
        let s = schedule(0.01).unwrap();
        assert_eq!(s.m, 7);
        assert!((s.predicted_success - 0.9953).abs() < 1e-4);
        assert!(matches!(schedule(0.0), Err(Error::BadDensity(_))));
        assert!(matches!(schedule(1.5), Err(Error::BadDensity(_))));
    }

    #[test]
    fn half_density_stays_put() {
        let psi = joint_for(0.5);
        let after = grover_step(&psi, &psi).unwrap();
        let p: f64 = after[4..].iter().map(|a| a.norm_sqr()).sum();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_psi() {
        let psi = vec![Complex64::new(0.5, 0.0); 4];
        let bad: Vec<_> = psi.iter().map(|a| a * 2.0).collect();
        assert!(matches!(grover_step(&psi, &bad), Err(Error::BadState(_))));
    }

    proptest! {
        #[test]
        fn overlap_follows_sine_law(rho in 0.001f64..1.0, m in 0usize..12) {
            let psi = joint_for(rho);
            let fin = amplify_reduced(&psi, m).unwrap();
            let good_dir: Vec<Complex64> = psi[4..].iter().map(|a| a / rho.sqrt()).collect();
            let overlap: Complex64 = good_dir.iter().zip(&fin[4..]).map(|(g, x)| g.conj() * x).sum();
            let expected = ((2 * m + 1) as f64 * rho.sqrt().asin()).sin();
            prop_assert!((overlap.re - expected).abs() < 1e-10);
            prop_assert!(overlap.im.abs() < 1e-12);
        }

        #[test]
        fn success_floor(rho in 1e-6f64..=1.0) {
            let s = schedule(rho).unwrap();
            prop_assert!(s.predicted_success >= rho.max(1.0 - rho) - 1e-12);
            if rho <= 0.5 {
                prop_assert!(s.m as f64 <= (PI / 4.0 / rho.sqrt()).ceil());
            }
        }
    }

    #[test]
    fn s0_flips_only_all_zero() {
        for q in 2..=5 {
            let c = build_s0_circuit(q).unwrap();
            for basis in 0..1usize << q {
                let mut s = DenseState::basis(c.total_qubits, basis).unwrap();
                s.apply_circuit(&c.gates).unwrap();
                let expected = if basis == 0 { -1.0 } else { 1.0 };
                assert!(
                    (s.amplitudes()[basis].re - expected).abs() < 1e-12,
                    "q={q} basis={basis}"
                );
            }
        }
        let c = build_s0_circuit(3).unwrap();
        let mut s = DenseState::zero(c.total_qubits).unwrap();
        s.apply_circuit(&(0..3).map(GateSpec::h).collect::<Vec<_>>())
            .unwrap();
        s.apply_circuit(&c.gates).unwrap();
        let r = 8f64.sqrt().recip();
        let sub = s.restrict(&[0, 1, 2]);
        assert!((sub[0].re + r).abs() < 1e-12);
        assert!(sub[1..].iter().all(|a| (a.re - r).abs() < 1e-12));
    }

    #[test]
    fn dense_amplification_matches_reduced() {
        let v = normalize_real(&[0.05, 0.9, 0.0, 0.1]).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), 4).unwrap();
        let plan = build_plan(&b, 2).unwrap();
        let out = run_branch_sim(&plan, false).unwrap().output;
        let psi = out.joint();
        for m in 0..3 {
            let dense = dense_amplified(&plan, m).unwrap();
            let reduced = amplify_reduced(&psi, m).unwrap();
            assert!(dense.ancilla_zero_probability > 1.0 - 1e-10);
            for (a, b) in dense.joint.iter().zip(&reduced) {
                assert!((a - b).norm() < 1e-9, "m={m}");
            }
        }
    }

    #[test]
    fn amplified_basis_vector() {
        let mut raw = vec![0.0; 256];
        raw[0] = 1.0;
        let v = normalize_real(&raw).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), 8).unwrap();
        let r = run_amplified_encoding(&build_plan(&b, 256).unwrap()).unwrap();
        assert!((r.achieved_success - r.predicted_success).abs() < 1e-10);
        assert!(r.achieved_success >= 0.99);
        assert!(r.fidelity_vs_target > 1.0 - 1e-10);
    }
}
