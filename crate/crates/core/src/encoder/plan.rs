use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{compress_mode_shift, BinaryAngleMatrix, PhaseMatrix};
use crate::sim::decompose::{lower_gate, work_needed};
use crate::sim::gate::{dump_circuit, inverse_circuit, GateKind, GateSpec};

/// Qubit assignment of every register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub sys: Range<usize>,
    pub index: Vec<Range<usize>>,
    pub parity: Vec<usize>,
    pub ctrl: Range<usize>,
    pub flag: usize,
    /// Toffoli-tree work qubits, one pool per index register.
    pub toffoli_work: Vec<Range<usize>>,
    /// Row-loading targets; `copies[0]` is `CTRL` itself.
    pub copies: Vec<Range<usize>>,
    pub total: usize,
}

impl Layout {
    pub fn new(n: usize, registers: usize, ctrl_width: usize) -> Self {
        let sys = 0..n;
        let index: Vec<_> = (0..registers).map(|j| n + j * n..n + (j + 1) * n).collect();
        let parity_start = n * (1 + registers);
        let parity: Vec<_> = (parity_start..parity_start + registers).collect();
        let ctrl_start = parity_start + registers;
        let ctrl = ctrl_start..ctrl_start + ctrl_width;
        let flag = ctrl.end;
        let mut next = flag + 1;
        let per = work_needed(n);
        let toffoli_work = (0..registers)
            .map(|_| {
                let r = next..next + per;
                next += per;
                r
            })
            .collect();
        let mut copies = vec![ctrl.clone()];
        for _ in 1..registers.div_ceil(2).max(1) {
            copies.push(next..next + ctrl_width);
            next += ctrl_width;
        }
        Layout {
            n,
            sys,
            index,
            parity,
            ctrl,
            flag,
            toffoli_work,
            copies,
            total: next,
        }
    }

    /// Qubits of the named registers `SYS .. FLAG`.
    pub fn declared(&self) -> usize {
        self.flag + 1
    }

    pub fn work(&self) -> usize {
        self.total - self.declared()
    }

    /// Every qubit except `SYS` and `FLAG`.
    pub fn ancillas(&self) -> Vec<usize> {
        (self.sys.end..self.total)
            .filter(|&q| q != self.flag)
            .collect()
    }

    /// `SYS` followed by `FLAG`: the reduced output space, indexed
    /// `k + N * flag`.
    pub fn reduced_qubits(&self) -> Vec<usize> {
        self.sys.clone().chain([self.flag]).collect()
    }

    /// Named registers for checkpoint dumps.
    pub fn registers(&self) -> Vec<(String, Vec<usize>)> {
        let mut out = vec![("SYS".to_string(), self.sys.clone().collect())];
        for (j, r) in self.index.iter().enumerate() {
            out.push((format!("I{}", j + 1), r.clone().collect()));
        }
        for (j, &q) in self.parity.iter().enumerate() {
            out.push((format!("C{}", j + 1), vec![q]));
        }
        out.push(("CTRL".to_string(), self.ctrl.clone().collect()));
        for (j, r) in self
            .toffoli_work
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
        {
            out.push((format!("W{}", j + 1), r.clone().collect()));
        }
        for (j, r) in self.copies.iter().enumerate().skip(1) {
            out.push((format!("COPY{j}"), r.clone().collect()));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Segment {
    Initial,
    Chunk(usize),
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// `H` on `SYS`, `X` on every index register.
    Prepare,
    FanOut,
    /// Unconditional rotation of `FLAG` by the mode angle.
    ModeLadder,
    LoadIndex,
    And,
    Mtc,
    Rotate,
    Unmtc,
    PhaseLoad,
    PhaseRotate,
    PhaseUnload,
    Unand,
    UnloadIndex,
    UnfanOut,
    Unprepare,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub segment: Segment,
    pub stage: Stage,
    pub gates: Vec<GateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlanKind {
    Full,
    /// Only `support` entries are processed; everything else keeps the
    /// unconditional mode rotation.
    ModeShift {
        mode_code: i64,
        support: Vec<usize>,
    },
}

/// Register layout plus the ordered gate sequence of the encoder.
#[derive(Clone, Debug)]
pub struct EncodingPlan {
    pub n: usize,
    pub len: usize,
    /// Index registers allocated.
    pub m: usize,
    pub precision: usize,
    /// Entries handled by each chunk.
    pub chunks: Vec<Vec<usize>>,
    pub layout: Layout,
    pub steps: Vec<Step>,
    pub kind: PlanKind,
    /// Rotation angle driven by each `CTRL` bit.
    pub ctrl_angles: Vec<f64>,
    pub b: BinaryAngleMatrix,
    pub phases: Option<PhaseMatrix>,
}

/// Build the plan for `B` with `m` index registers.
pub fn build_plan(b: &BinaryAngleMatrix, m: usize) -> Result<EncodingPlan> {
    build_plan_with_phases(b, m, None)
}

/// As [`build_plan`], with a controlled-phase ladder after each chunk's
/// rotations when `phases` is given.
pub fn build_plan_with_phases(
    b: &BinaryAngleMatrix,
    m: usize,
    phases: Option<&PhaseMatrix>,
) -> Result<EncodingPlan> {
    let len = check_len(b.len())?;
    if m < 1 || m > len {
        return Err(Error::BadParallelism { m, n: len });
    }
    if let Some(p) = phases {
        if p.len() != len || p.precision() != b.precision() {
            return Err(Error::BadShape(format!(
                "phase matrix {}x{} does not match B {}x{}",
                p.len(),
                p.precision(),
                len,
                b.precision()
            )));
        }
    }
    let l = b.precision();
    let mut angles = vec![2.0 * PI];
    angles.extend((1..l).map(|j| PI * (-(j as f64)).exp2()));
    let rows: Vec<Vec<bool>> = (0..len)
        .map(|i| (0..l).map(|j| b.bit(i, j)).collect())
        .collect();
    let phase_rows = phases.map(|p| {
        (0..len)
            .map(|i| (1..=l).map(|j| p.bit(i, j)).collect::<Vec<bool>>())
            .collect::<Vec<_>>()
    });
    let entries: Vec<usize> = (0..len).collect();
    let mut plan = assemble(Assembly {
        len,
        m,
        angles,
        rows: &rows,
        phase_rows: phase_rows.as_deref(),
        entries: &entries,
        mode_ladder: Vec::new(),
    });
    plan.precision = l;
    plan.b = b.clone();
    plan.phases = phases.cloned();
    Ok(plan)
}

/// Rotation of a row in units of `pi * 2^-(L-1)`; the sign bit adds a full
/// `2 pi` turn. Values live in `[0, 2^(L+1))`, matching `RY`'s `4 pi`
/// period.
fn turn_code(b: &BinaryAngleMatrix, i: usize) -> u64 {
    let c = b.codes()[i];
    c.magnitude + (u64::from(c.negative) << b.precision())
}

/// Plan that rotates `FLAG` unconditionally by the most frequent angle and
/// corrects only the entries that differ from it.
///
/// `CTRL` gets one extra bit because corrections span a full `4 pi`.
pub fn mode_shift_plan(b: &BinaryAngleMatrix, m: usize) -> Result<EncodingPlan> {
    let len = check_len(b.len())?;
    if m < 1 || m > len {
        return Err(Error::BadParallelism { m, n: len });
    }
    let l = b.precision();
    let shift = compress_mode_shift(b);
    let mode_index = b
        .codes()
        .iter()
        .position(|c| c.signed() == shift.mode_code)
        .expect("mode occurs in B");
    let mode_turn = turn_code(b, mode_index);
    // Compare full turn codes so a negative-zero row still counts as a
    // difference from a positive mode.
    let support: Vec<usize> = (0..len).filter(|&i| turn_code(b, i) != mode_turn).collect();
    let unit = PI * (-((l - 1) as f64)).exp2();
    let angles: Vec<f64> = (0..=l).map(|j| unit * (j as f64).exp2()).collect();
    let modulus = 1u64 << (l + 1);
    let rows: Vec<Vec<bool>> = (0..len)
        .map(|i| {
            let d = (turn_code(b, i) + modulus - mode_turn) % modulus;
            (0..=l).map(|j| (d >> j) & 1 == 1).collect()
        })
        .collect();
    let mode_ladder = (0..=l)
        .filter(|j| (mode_turn >> j) & 1 == 1)
        .map(|j| angles[j])
        .collect();
    let registers = m.min(support.len());
    let mut plan = assemble(Assembly {
        len,
        m: registers,
        angles,
        rows: &rows,
        phase_rows: None,
        entries: &support,
        mode_ladder,
    });
    plan.precision = l;
    plan.b = b.clone();
    plan.kind = PlanKind::ModeShift {
        mode_code: shift.mode_code,
        support,
    };
    Ok(plan)
}

fn check_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::BadShape(format!(
            "B has {len} rows; need a power of two"
        )));
    }
    Ok(len)
}

struct Assembly<'a> {
    len: usize,
    m: usize,
    angles: Vec<f64>,
    rows: &'a [Vec<bool>],
    phase_rows: Option<&'a [Vec<bool>]>,
    entries: &'a [usize],
    mode_ladder: Vec<f64>,
}

fn assemble(a: Assembly<'_>) -> EncodingPlan {
    let n = a.len.trailing_zeros() as usize;
    let layout = Layout::new(n, a.m, a.angles.len());
    let chunks: Vec<Vec<usize>> = if a.m == 0 {
        Vec::new()
    } else {
        a.entries.chunks(a.m).map(<[usize]>::to_vec).collect()
    };
    let mut steps = Vec::new();
    let mut push = |segment, stage, gates| {
        steps.push(Step {
            segment,
            stage,
            gates,
        })
    };

    let mut prepare: Vec<GateSpec> = layout.sys.clone().map(GateSpec::h).collect();
    let all_index: Vec<usize> = layout.index.iter().flat_map(|r| r.clone()).collect();
    if !all_index.is_empty() {
        prepare.push(GateSpec::new(GateKind::X, all_index.clone(), vec![]));
    }
    push(Segment::Initial, Stage::Prepare, prepare);
    let fanout = fan_out(&layout);
    push(Segment::Initial, Stage::FanOut, fanout.clone());
    if !a.mode_ladder.is_empty() {
        let ladder = a
            .mode_ladder
            .iter()
            .map(|&t| GateSpec::ry(layout.flag, t))
            .collect();
        push(Segment::Initial, Stage::ModeLadder, ladder);
    }

    for (c, entries) in chunks.iter().enumerate() {
        let seg = Segment::Chunk(c);
        let load: Vec<GateSpec> = entries
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(j, &e)| {
                let targets = (0..n)
                    .filter(|b| (e >> b) & 1 == 1)
                    .map(|b| layout.index[j].start + b)
                    .collect();
                GateSpec::new(GateKind::X, targets, vec![])
            })
            .collect();
        let and: Vec<GateSpec> = (0..entries.len())
            .map(|j| GateSpec::mcx(layout.index[j].clone().collect(), layout.parity[j]))
            .collect();
        let mtc = load_rows(&layout, entries, a.rows);
        let rotate = a
            .angles
            .iter()
            .enumerate()
            .map(|(l, &t)| GateSpec::cry(layout.ctrl.start + l, layout.flag, t))
            .collect();
        push(seg, Stage::LoadIndex, load.clone());
        push(seg, Stage::And, and.clone());
        push(seg, Stage::Mtc, mtc.clone());
        push(seg, Stage::Rotate, rotate);
        push(seg, Stage::Unmtc, inverse_circuit(&mtc));
        if let Some(phase_rows) = a.phase_rows {
            let pload = load_rows(&layout, entries, phase_rows);
            let prot = (0..layout.ctrl.len())
                .map(|l| {
                    let t = 2.0 * PI * (-((l + 1) as f64)).exp2();
                    GateSpec::cphase(layout.ctrl.start + l, layout.flag, t)
                })
                .collect();
            push(seg, Stage::PhaseLoad, pload.clone());
            push(seg, Stage::PhaseRotate, prot);
            push(seg, Stage::PhaseUnload, inverse_circuit(&pload));
        }
        push(seg, Stage::Unand, inverse_circuit(&and));
        push(seg, Stage::UnloadIndex, inverse_circuit(&load));
    }

    push(Segment::Final, Stage::UnfanOut, inverse_circuit(&fanout));
    let unprepare = if all_index.is_empty() {
        Vec::new()
    } else {
        vec![GateSpec::new(GateKind::X, all_index, vec![])]
    };
    push(Segment::Final, Stage::Unprepare, unprepare);

    EncodingPlan {
        n,
        len: a.len,
        m: a.m,
        precision: 0,
        chunks,
        layout,
        steps,
        kind: PlanKind::Full,
        ctrl_angles: a.angles,
        b: BinaryAngleMatrix::from_codes(2, Vec::new()).expect("empty matrix"),
        phases: None,
    }
}

/// Copy `SYS` into every index register along a doubling tree, then fix the
/// registers that ended up holding `k` instead of `1^n xor k`.
///
/// Runs after the `X` layer, so a copy from a register holding `u` into a
/// fresh register yields `1^n xor u`.
fn fan_out(layout: &Layout) -> Vec<GateSpec> {
    let n = layout.n;
    let mut gates = Vec::new();
    // (first qubit, holds k rather than its complement)
    let mut sources: Vec<(usize, bool)> = vec![(layout.sys.start, true)];
    let mut next = 0;
    let m = layout.index.len();
    while next < m {
        let mut fresh = Vec::new();
        for &(src, holds_k) in &sources {
            if next == m {
                break;
            }
            let dst = layout.index[next].start;
            gates.extend((0..n).map(|b| GateSpec::cx(src + b, dst + b)));
            fresh.push((dst, !holds_k));
            next += 1;
        }
        sources.extend(fresh);
    }
    let fix: Vec<usize> = sources
        .iter()
        .skip(1)
        .filter(|(_, holds_k)| *holds_k)
        .flat_map(|&(start, _)| start..start + n)
        .collect();
    if !fix.is_empty() {
        gates.push(GateSpec::new(GateKind::X, fix, vec![]));
    }
    gates
}

/// Load the rows of `entries` into `CTRL`: each parity flag writes its row
/// into one of the copy registers (two flags per copy), then the copies are
/// XOR-folded into `CTRL` along a binary tree. At most one flag is set in
/// any branch, so `CTRL` ends up holding that entry's row.
fn load_rows(layout: &Layout, entries: &[usize], rows: &[Vec<bool>]) -> Vec<GateSpec> {
    let mut gates = Vec::new();
    let used = entries.len().div_ceil(2);
    for half in 0..2 {
        for i in 0..used {
            let j = 2 * i + half;
            let Some(&e) = entries.get(j) else { continue };
            let targets: Vec<usize> = rows[e]
                .iter()
                .enumerate()
                .filter(|(_, &bit)| bit)
                .map(|(l, _)| layout.copies[i].start + l)
                .collect();
            if !targets.is_empty() {
                gates.push(GateSpec::new(GateKind::X, targets, vec![layout.parity[j]]));
            }
        }
    }
    let width = layout.ctrl.len();
    let mut stride = 1;
    while stride < used {
        for i in (0..used).step_by(2 * stride) {
            if i + stride < used {
                let (dst, src) = (layout.copies[i].start, layout.copies[i + stride].start);
                gates.extend((0..width).map(|l| GateSpec::cx(src + l, dst + l)));
            }
        }
        stride *= 2;
    }
    gates
}

impl EncodingPlan {
    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateSpec> {
        self.steps.iter().flat_map(|s| s.gates.iter())
    }

    pub fn segment_gates(&self, segment: Segment) -> Vec<GateSpec> {
        self.steps
            .iter()
            .filter(|s| s.segment == segment)
            .flat_map(|s| s.gates.iter().cloned())
            .collect()
    }

    /// Every gate with at most two controls; index-register ANDs use that
    /// register's own work pool so they stay parallel.
    pub fn lowered_gates(&self) -> Result<Vec<GateSpec>> {
        let mut out = Vec::new();
        for g in self.gates() {
            if g.controls.len() <= 2 {
                out.push(g.clone());
                continue;
            }
            let j = self
                .layout
                .index
                .iter()
                .position(|r| r.contains(&g.controls[0]))
                .ok_or_else(|| Error::BadShape(format!("no work pool for {g}")))?;
            let work: Vec<usize> = self.layout.toffoli_work[j].clone().collect();
            out.extend(lower_gate(g, &work)?);
        }
        Ok(out)
    }

    /// Circuit dump with a comment line before every step.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&format!("# {:?} {:?}\n", s.segment, s.stage));
            out.push_str(&dump_circuit(&s.gates));
        }
        out
    }

    /// FLAG pair `(a0, a1)` every branch carries once its chunk has rotated
    /// it: `((-1)^sign sqrt(1 - c_k^2), c_k e^{i phi_k})`.
    pub fn expected_flags(&self) -> Vec<[Complex64; 2]> {
        let unit = PI * (-((self.precision - 1) as f64)).exp2();
        (0..self.len)
            .map(|k| {
                let alpha = unit * turn_code(&self.b, k) as f64;
                let (s, c) = (alpha / 2.0).sin_cos();
                let phase = self.phases.as_ref().map_or(Complex64::new(1.0, 0.0), |p| {
                    Complex64::from_polar(1.0, 2.0 * PI * p.fraction(k))
                });
                [Complex64::new(c, 0.0), phase * s]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{compute_theta, normalize_real, quantize_theta};

    fn example_b() -> BinaryAngleMatrix {
        let v = normalize_real(&[1.0, 2.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0]).unwrap();
        quantize_theta(&compute_theta(&v).unwrap(), 6).unwrap()
    }

    #[test]
    fn declared_qubits_follow_register_table() {
        let b = example_b();
        let plan = build_plan(&b, 8).unwrap();
        assert_eq!(plan.chunk_count(), 1);
        assert_eq!(plan.layout.declared(), 42);
        let plan = build_plan(&b, 1).unwrap();
        assert_eq!(plan.chunk_count(), 8);
        assert_eq!(plan.layout.declared(), 3 * 2 + 1 + 6 + 1);
    }

    #[test]
    fn parallelism_bounds() {
        let b = example_b();
        assert!(matches!(
            build_plan(&b, 0),
            Err(Error::BadParallelism { m: 0, n: 8 })
        ));
        assert!(matches!(
            build_plan(&b, 9),
            Err(Error::BadParallelism { m: 9, n: 8 })
        ));
    }

    #[test]
    fn partial_last_chunk() {
        let plan = build_plan(&example_b(), 3).unwrap();
        assert_eq!(plan.chunks, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7]]);
    }

    #[test]
    fn final_mirrors_initial_without_hadamards() {
        let v = normalize_real(&[0.1, 0.5, -0.3, 0.8]).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), 4).unwrap();
        let plan = build_plan(&b, 4).unwrap();
        let initial: Vec<GateSpec> = plan
            .segment_gates(Segment::Initial)
            .into_iter()
            .filter(|g| g.kind != GateKind::H)
            .collect();
        assert_eq!(
            plan.segment_gates(Segment::Final),
            inverse_circuit(&initial)
        );
    }

    #[test]
    fn fan_out_is_logarithmic() {
        let layout = Layout::new(4, 15, 3);
        let gates = fan_out(&layout);
        // 4 doubling rounds and one fix layer
        assert_eq!(crate::sim::greedy_depth(&gates), 5);
        assert_eq!(
            gates.iter().filter(|g| g.controls.len() == 1).count(),
            15 * 4
        );
    }

    #[test]
    fn mode_shift_skips_common_entries() {
        let b = example_b();
        let plan = mode_shift_plan(&b, 4).unwrap();
        assert_eq!(plan.m, 4);
        assert_eq!(plan.chunk_count(), 1);
        assert_eq!(plan.chunks[0], vec![0, 2, 4, 6]);
        let uniform = normalize_real(&[1.0; 8]).unwrap();
        let bu = quantize_theta(&compute_theta(&uniform).unwrap(), 6).unwrap();
        let plan = mode_shift_plan(&bu, 4).unwrap();
        assert_eq!(plan.chunk_count(), 0);
        assert_eq!(plan.m, 0);
        assert!(plan.steps.iter().any(|s| s.stage == Stage::ModeLadder));
    }

    #[test]
    fn lowered_gates_have_two_controls_at_most() {
        let v = normalize_real(&[0.1, 0.5, -0.3, 0.8, 0.2, 0.2, 0.9, -0.1]).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), 4).unwrap();
        let plan = build_plan(&b, 2).unwrap();
        let low = plan.lowered_gates().unwrap();
        assert!(low.iter().all(|g| g.controls.len() <= 2));
        assert!(low.iter().all(|g| g.validate(plan.layout.total).is_ok()));
    }
}
