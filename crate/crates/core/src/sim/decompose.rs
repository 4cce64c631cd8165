//! Lowering of many-controlled gates into Toffoli trees.

use super::gate::GateSpec;
use crate::error::{Error, Result};

/// Work qubits needed to lower a gate with `controls` controls.
pub fn work_needed(controls: usize) -> usize {
    if controls <= 2 {
        0
    } else {
        controls - 1
    }
}

/// Rewrite `g` so that no gate has more than two controls.
///
/// Controls are AND-ed pairwise into work qubits (a balanced tree of
/// `c - 1` Toffolis), the base operation fires from the root, then the tree
/// is uncomputed. Work qubits must be `|0>` on entry and are returned to
/// `|0>`.
pub fn lower_gate(g: &GateSpec, work: &[usize]) -> Result<Vec<GateSpec>> {
    let c = g.controls.len();
    if c <= 2 {
        return Ok(vec![g.clone()]);
    }
    if work.len() < c - 1 {
        return Err(Error::BadShape(format!(
            "{} controls need {} work qubits, got {}",
            c,
            c - 1,
            work.len()
        )));
    }
    let mut compute = Vec::with_capacity(c - 1);
    let mut level = g.controls.clone();
    let mut free = work.iter().copied();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        for pair in level.chunks(2) {
            match *pair {
                [a, b] => {
                    let w = free.next().expect("work counted above");
                    compute.push(GateSpec::mcx(vec![a, b], w).with_condition_of(g));
                    next.push(w);
                }
                [a] => next.push(a),
                _ => unreachable!(),
            }
        }
        level = next;
    }
    let mut out = compute.clone();
    out.push(GateSpec {
        controls: level,
        ..g.clone()
    });
    out.extend(compute.into_iter().rev());
    Ok(out)
}

/// Lower every gate in `gates` against one shared work pool.
pub fn lower_gates(gates: &[GateSpec], work: &[usize]) -> Result<Vec<GateSpec>> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        out.extend(lower_gate(g, work)?);
    }
    Ok(out)
}

impl GateSpec {
    fn with_condition_of(mut self, other: &GateSpec) -> Self {
        self.condition = other.condition;
        self
    }
}
