//! Gate-by-gate dense execution of an encoding plan, used to check the
//! branch simulator on small instances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::plan::EncodingPlan;
use super::{run_branch_sim, ReducedOutput};
use crate::error::Result;
use crate::sim::{fidelity, DenseState};

/// Run the lowered circuit of `plan` from `|0...0>`.
pub fn run_dense_oracle(plan: &EncodingPlan) -> Result<DenseState> {
    let mut state = DenseState::zero(plan.layout.total)?;
    state.apply_circuit(&plan.lowered_gates()?)?;
    Ok(state)
}

/// Dense versus branch comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseOracleReport {
    pub qubits: usize,
    pub gates: usize,
    /// Fidelity of the joint `SYS (x) FLAG` vectors.
    pub fidelity: f64,
    pub rho_dense: f64,
    pub rho_branch: f64,
    /// Probability that every ancilla reads 0.
    pub ancilla_zero_probability: f64,
    pub matches: bool,
}

/// `SYS (x) FLAG` amplitudes on the all-ancillas-zero slice, indexed
/// `k + N * flag`.
pub fn reduced_joint(plan: &EncodingPlan, state: &DenseState) -> Vec<Complex64> {
    state.restrict(&plan.layout.reduced_qubits())
}

pub fn compare_with_branch(plan: &EncodingPlan) -> Result<DenseOracleReport> {
    let gates = plan.lowered_gates()?.len();
    let state = run_dense_oracle(plan)?;
    let joint = reduced_joint(plan, &state);
    let dense = ReducedOutput::from_joint(&joint);
    let branch = run_branch_sim(plan, false)?.output;
    let fid = fidelity(&joint, &branch.joint())?;
    let ancilla_zero_probability = state.probability_all_zero(&plan.layout.ancillas());
    Ok(DenseOracleReport {
        qubits: plan.layout.total,
        gates,
        fidelity: fid,
        rho_dense: dense.rho,
        rho_branch: branch.rho,
        ancilla_zero_probability,
        matches: fid >= 1.0 - 1e-9 && ancilla_zero_probability >= 1.0 - 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_plan, build_plan_with_phases};
    use crate::preprocess::{
        compute_theta, heralding_probability, normalize, normalize_real, quantize_theta,
        reconstructed_amplitudes, split_complex,
    };
    use crate::Error;

    fn check(v: &[f64], m: usize, l: usize) -> DenseOracleReport {
        let v = normalize_real(v).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), l).unwrap();
        let report = compare_with_branch(&build_plan(&b, m).unwrap()).unwrap();
        assert!(report.matches, "{report:?}");
        let rho = heralding_probability(&reconstructed_amplitudes(&b));
        assert!((report.rho_dense - rho).abs() < 1e-10);
        report
    }

    #[test]
    fn small_instances() {
        check(&[1.0, 1.0, 1.0, 1.0], 1, 4);
        check(&[0.6, 0.8, 0.0, 0.0], 2, 4);
        check(&[0.6, 0.8], 2, 3);
        check(&[0.6, -0.8], 1, 3);
    }

    #[test]
    fn three_qubit_vectors_use_toffoli_trees() {
        let r = check(&[0.1, -0.4, 0.2, 0.9, -0.3, 0.05, 0.6, -0.2], 1, 3);
        assert_eq!(r.qubits, 3 * 2 + 1 + 3 + 1 + 2);
    }

    #[test]
    fn complex_phases_match() {
        let s = 0.5f64.sqrt();
        let v = normalize(&[Complex64::new(0.0, s), Complex64::new(s, 0.0)]).unwrap();
        let split = split_complex(&v, 4).unwrap();
        let plan = build_plan_with_phases(&split.b_r, 2, Some(&split.b_phi)).unwrap();
        assert!(compare_with_branch(&plan).unwrap().matches);
    }

    #[test]
    fn too_large_for_dense() {
        let b = quantize_theta(
            &compute_theta(&normalize_real(&[1.0; 32]).unwrap()).unwrap(),
            6,
        )
        .unwrap();
        let plan = build_plan(&b, 32).unwrap();
        assert!(matches!(
            run_dense_oracle(&plan),
            Err(Error::TooLarge { .. })
        ));
    }
}
