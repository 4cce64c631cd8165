//! The encoding circuit and its two simulators.
//!
//! Registers, in qubit order: `SYS` (n), index registers `I_1..I_M`
//! (n each), parity flags `C_1..C_M`, `CTRL`, `FLAG`, then the work
//! ancillas (Toffoli trees, one pool per index register, and the extra
//! `CTRL` copies used to load several rows in parallel).
//!
//! The circuit is split into an initial segment (superpose `SYS`, fan it out
//! into every index register as `1^n xor k`), one segment per chunk of at
//! most `M` entries, and a final segment undoing the fan-out. A chunk marks
//! the branch whose `SYS` value matches one of its entries, loads that
//! entry's row into `CTRL`, rotates `FLAG` from `CTRL`, and uncomputes.

mod branch;
mod oracle;
mod plan;

pub use branch::{run_branch_sim, BranchRun, BranchSnapshot, Checkpoint};
pub use oracle::{compare_with_branch, reduced_joint, run_dense_oracle, DenseOracleReport};
pub use plan::{
    build_plan, build_plan_with_phases, mode_shift_plan, EncodingPlan, Layout, PlanKind, Segment,
    Stage, Step,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::preprocess::ComplexSplit;

/// Output restricted to `SYS (x) FLAG` once every ancilla is back at `|0>`:
/// `sqrt(1-rho) |psi_B>|0> + sqrt(rho) |psi_G>|1>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedOutput {
    pub rho: f64,
    #[serde(rename = "psi_G")]
    pub psi_g: Vec<Complex64>,
    #[serde(rename = "psi_B")]
    pub psi_b: Vec<Complex64>,
}

impl ReducedOutput {
    /// Build from the unnormalized FLAG=0 and FLAG=1 components.
    pub fn from_components(bad: Vec<Complex64>, good: Vec<Complex64>) -> Self {
        let norm = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>();
        let rho = norm(&good);
        let bad_norm = norm(&bad);
        let scaled = |v: Vec<Complex64>, p: f64| {
            if p > 0.0 {
                let s = p.sqrt().recip();
                v.into_iter().map(|a| a * s).collect()
            } else {
                v
            }
        };
        ReducedOutput {
            rho,
            psi_g: scaled(good, rho),
            psi_b: scaled(bad, bad_norm),
        }
    }

    /// Split a joint `SYS (x) FLAG` vector indexed `k + N * flag`.
    pub fn from_joint(joint: &[Complex64]) -> Self {
        let half = joint.len() / 2;
        Self::from_components(joint[..half].to_vec(), joint[half..].to_vec())
    }

    /// Joint `SYS (x) FLAG` vector indexed `k + N * flag`.
    pub fn joint(&self) -> Vec<Complex64> {
        let good = self.rho.sqrt();
        let bad = (1.0 - self.rho).max(0.0).sqrt();
        self.psi_b
            .iter()
            .map(|a| a * bad)
            .chain(self.psi_g.iter().map(|a| a * good))
            .collect()
    }
}

/// Encode a complex vector from its modulus/phase split.
pub fn encode_complex(split: &ComplexSplit, m: usize) -> Result<ReducedOutput> {
    let plan = build_plan_with_phases(&split.b_r, m, Some(&split.b_phi))?;
    Ok(run_branch_sim(&plan, false)?.output)
}
