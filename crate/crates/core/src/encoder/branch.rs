//! Exact simulation on computational-basis branches.
//!
//! After the `SYS` superposition every gate of the encoder either permutes
//! basis states of the ancilla registers or rotates `FLAG` under basis-state
//! controls. Each `SYS` value `k` therefore evolves as a bit string plus a
//! two-amplitude `FLAG` state, and the `N` branches never interact.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{EncodingPlan, Layout, Stage};
use super::ReducedOutput;
use crate::error::{Error, Result};
use crate::sim::gate::{GateKind, GateSpec};

type Masks = Vec<(usize, u64)>;

fn masks(qubits: impl IntoIterator<Item = usize>) -> Masks {
    let mut by_word: BTreeMap<usize, u64> = BTreeMap::new();
    for q in qubits {
        *by_word.entry(q / 64).or_default() |= 1 << (q % 64);
    }
    by_word.into_iter().collect()
}

#[derive(Clone, Debug)]
enum Op {
    Flip {
        ctrl: Masks,
        targets: Masks,
    },
    Swap {
        ctrl: Masks,
        a: usize,
        b: usize,
    },
    /// Multiply the branch by `phase` when every bit in `ctrl` is set.
    Phase {
        ctrl: Masks,
        phase: Complex64,
    },
    /// 2x2 unitary on `FLAG`, row-major.
    Flag {
        ctrl: Masks,
        m: [Complex64; 4],
    },
}

fn flag_matrix(kind: GateKind) -> [Complex64; 4] {
    let r = |x: f64| Complex64::new(x, 0.0);
    match kind {
        GateKind::X => [r(0.0), r(1.0), r(1.0), r(0.0)],
        GateKind::Z => [r(1.0), r(0.0), r(0.0), r(-1.0)],
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [r(s), r(s), r(s), r(-s)]
        }
        GateKind::Ry(a) => {
            let (s, c) = (a / 2.0).sin_cos();
            [r(c), r(-s), r(s), r(c)]
        }
        GateKind::Phase(a) => [r(1.0), r(0.0), r(0.0), Complex64::from_polar(1.0, a)],
        GateKind::Swap => unreachable!("swap is rejected before this point"),
    }
}

fn compile(g: &GateSpec, layout: &Layout, stage: Stage) -> Result<Vec<Op>> {
    let refuse = || Error::NotBranchable(g.to_string());
    if !g.is_active() {
        return Ok(Vec::new());
    }
    if g.controls.contains(&layout.flag) {
        return Err(refuse());
    }
    let ctrl = masks(g.controls.iter().copied());
    if g.targets.contains(&layout.flag) {
        if g.targets.len() != 1 || g.kind == GateKind::Swap {
            return Err(refuse());
        }
        return Ok(vec![Op::Flag {
            ctrl,
            m: flag_matrix(g.kind),
        }]);
    }
    let with_target = |t: usize| masks(g.controls.iter().copied().chain([t]));
    match g.kind {
        GateKind::X => Ok(vec![Op::Flip {
            ctrl,
            targets: masks(g.targets.iter().copied()),
        }]),
        GateKind::Swap => Ok(vec![Op::Swap {
            ctrl,
            a: g.targets[0],
            b: g.targets[1],
        }]),
        GateKind::Z => Ok(g
            .targets
            .iter()
            .map(|&t| Op::Phase {
                ctrl: with_target(t),
                phase: Complex64::new(-1.0, 0.0),
            })
            .collect()),
        GateKind::Phase(a) => Ok(g
            .targets
            .iter()
            .map(|&t| Op::Phase {
                ctrl: with_target(t),
                phase: Complex64::from_polar(1.0, a),
            })
            .collect()),
        // The SYS Hadamards create the branches themselves.
        GateKind::H
            if stage == Stage::Prepare
                && g.controls.is_empty()
                && g.targets.iter().all(|t| layout.sys.contains(t)) =>
        {
            Ok(Vec::new())
        }
        GateKind::H | GateKind::Ry(_) => Err(refuse()),
    }
}

fn holds(bits: &[u64], ctrl: &Masks) -> bool {
    ctrl.iter().all(|&(w, m)| bits[w] & m == m)
}

fn bit(bits: &[u64], q: usize) -> bool {
    (bits[q / 64] >> (q % 64)) & 1 == 1
}

impl Op {
    fn apply(&self, bits: &mut [u64], flag: &mut [Complex64; 2]) {
        match self {
            Op::Flip { ctrl, targets } => {
                if holds(bits, ctrl) {
                    for &(w, m) in targets {
                        bits[w] ^= m;
                    }
                }
            }
            Op::Swap { ctrl, a, b } => {
                if holds(bits, ctrl) && bit(bits, *a) != bit(bits, *b) {
                    bits[a / 64] ^= 1 << (a % 64);
                    bits[b / 64] ^= 1 << (b % 64);
                }
            }
            Op::Phase { ctrl, phase } => {
                if holds(bits, ctrl) {
                    flag[0] *= phase;
                    flag[1] *= phase;
                }
            }
            Op::Flag { ctrl, m } => {
                if holds(bits, ctrl) {
                    let [a, b] = *flag;
                    *flag = [m[0] * a + m[1] * b, m[2] * a + m[3] * b];
                }
            }
        }
    }
}

/// One branch at a checkpoint. Register values are written most
/// significant bit first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSnapshot {
    pub k: usize,
    pub registers: BTreeMap<String, String>,
    pub flag: [Complex64; 2],
}

/// State after a stage, one snapshot per branch. `psi0` precedes the
/// `SYS` superposition and so has a single branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub label: String,
    pub chunk: Option<usize>,
    pub branches: Vec<BranchSnapshot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRun {
    pub output: ReducedOutput,
    /// Final `FLAG` pair per branch (without the `1/sqrt(N)` scale).
    pub flags: Vec<[Complex64; 2]>,
    pub checkpoints: Vec<Checkpoint>,
}

fn label(stage: Stage) -> Option<&'static str> {
    Some(match stage {
        Stage::Prepare => "psi1",
        Stage::FanOut => "psi2",
        Stage::LoadIndex => "psi3",
        Stage::And => "psi4",
        Stage::Mtc => "psi5",
        Stage::Rotate => "psi6",
        Stage::UnloadIndex => "psi7",
        Stage::Unprepare => "psi8",
        _ => return None,
    })
}

fn snapshot(
    registers: &[(String, Vec<usize>)],
    k: usize,
    bits: &[u64],
    flag: [Complex64; 2],
) -> BranchSnapshot {
    let registers = registers
        .iter()
        .map(|(name, qs)| {
            let s: String = qs
                .iter()
                .rev()
                .map(|&q| if bit(bits, q) { '1' } else { '0' })
                .collect();
            (name.clone(), s)
        })
        .collect();
    BranchSnapshot { k, registers, flag }
}

/// Run `plan` on all `N` branches. With `checkpoints`, records the state
/// after every labelled stage (`psi0` .. `psi9`, chunk stages once per
/// chunk).
pub fn run_branch_sim(plan: &EncodingPlan, checkpoints: bool) -> Result<BranchRun> {
    let layout = &plan.layout;
    let compiled: Vec<Vec<Op>> = plan
        .steps
        .iter()
        .map(|s| {
            let mut ops = Vec::new();
            for g in &s.gates {
                g.validate(layout.total)?;
                ops.extend(compile(g, layout, s.stage)?);
            }
            Ok(ops)
        })
        .collect::<Result<_>>()?;
    let words = layout.total.div_ceil(64);
    let registers = layout.registers();
    let sys = layout.sys.clone();

    let run = |k: usize| -> Result<([Complex64; 2], Vec<BranchSnapshot>)> {
        let mut bits = vec![0u64; words];
        for (b, q) in sys.clone().enumerate() {
            if (k >> b) & 1 == 1 {
                bits[q / 64] |= 1 << (q % 64);
            }
        }
        let mut flag = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let mut snaps = Vec::new();
        for (step, ops) in plan.steps.iter().zip(&compiled) {
            for op in ops {
                op.apply(&mut bits, &mut flag);
            }
            if checkpoints && label(step.stage).is_some() {
                snaps.push(snapshot(&registers, k, &bits, flag));
            }
        }
        for q in 0..layout.total {
            let expected = sys.contains(&q) && (k >> (q - sys.start)) & 1 == 1;
            if q != layout.flag && bit(&bits, q) != expected {
                return Err(Error::UncomputeLeak {
                    branch: k,
                    qubit: q,
                });
            }
        }
        Ok((flag, snaps))
    };
    let results: Vec<_> = (0..plan.len)
        .into_par_iter()
        .map(run)
        .collect::<Result<_>>()?;

    let scale = (plan.len as f64).sqrt().recip();
    let bad = results.iter().map(|(f, _)| f[0] * scale).collect();
    let good = results.iter().map(|(f, _)| f[1] * scale).collect();
    let output = ReducedOutput::from_components(bad, good);
    let flags: Vec<[Complex64; 2]> = results.iter().map(|(f, _)| *f).collect();

    let mut cps = Vec::new();
    if checkpoints {
        let zeros = vec![0u64; words];
        cps.push(Checkpoint {
            label: "psi0".into(),
            chunk: None,
            branches: vec![snapshot(
                &registers,
                0,
                &zeros,
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            )],
        });
        let labelled = plan
            .steps
            .iter()
            .filter_map(|s| label(s.stage).map(|l| (l, s.segment)));
        let mut columns: Vec<Vec<BranchSnapshot>> = results.into_iter().map(|(_, s)| s).collect();
        let mut per_branch: Vec<_> = columns.iter_mut().map(|c| c.drain(..)).collect();
        for (l, segment) in labelled {
            let chunk = match segment {
                super::Segment::Chunk(c) => Some(c),
                _ => None,
            };
            let branches = per_branch
                .iter_mut()
                .map(|it| it.next().expect("one snapshot per labelled stage"))
                .collect();
            cps.push(Checkpoint {
                label: l.into(),
                chunk,
                branches,
            });
        }
        let sys_only: Vec<(String, Vec<usize>)> = vec![("SYS".into(), sys.clone().collect())];
        cps.push(Checkpoint {
            label: "psi9".into(),
            chunk: None,
            branches: flags
                .iter()
                .enumerate()
                .map(|(k, &f)| {
                    let mut bits = vec![0u64; words];
                    for (b, q) in sys.clone().enumerate() {
                        if (k >> b) & 1 == 1 {
                            bits[q / 64] |= 1 << (q % 64);
                        }
                    }
                    snapshot(&sys_only, k, &bits, f)
                })
                .collect(),
        });
    }
    Ok(BranchRun {
        output,
        flags,
        checkpoints: cps,
    })
}
