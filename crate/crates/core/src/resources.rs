//! Qubit, gate and depth accounting.
//!
//! Depth model, with `lg(x) = ceil(log2(max(x, 2)))` and `m_eff` the index
//! registers a chunk actually needs (`ceil(N / R)` for `R` chunks):
//!
//! - initial: `1` (H and X together) `+ 1` (fix-up) `+ lg(m_eff)` fan-out
//!   rounds, plus the mode ladder if any;
//! - each chunk: `1` LoadIndex `+ 3 lg(n)` n-Toffoli (a single layer when
//!   `n <= 2`) `+ 2 + lg(m_eff)` row load `+ L` rotations, then the
//!   mirrored uncompute without the rotations (and the same again for a
//!   phase ladder);
//! - final: the initial segment without the Hadamard layer.
//!
//! `lg(m_eff)` is taken as a real `log2` and the total rounded up once,
//! which keeps the depth monotone in `M`. Classically determined X layers
//! count one layer each.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amplify::schedule;
use crate::encoder::{EncodingPlan, PlanKind};
use crate::error::Result;
use crate::sim::decompose::work_needed;
use crate::sim::greedy_depth;

/// `ceil(log2(max(x, 2)))`.
pub fn lg(x: usize) -> usize {
    x.max(2).next_power_of_two().trailing_zeros() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub n: usize,
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub precision: usize,
    pub rho: f64,
    pub index_registers: usize,
    pub chunks: usize,
    pub qubits_declared: usize,
    pub qubits_work: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub encoder_depth: usize,
    pub aa_iterations: usize,
    pub total_depth: usize,
    pub tau_model: f64,
}

/// Shape of a circuit as seen by the depth model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthShape {
    pub n: usize,
    pub registers: usize,
    pub chunks: usize,
    /// Entries a chunk needs registers for.
    pub chunk_width: usize,
    pub ctrl_width: usize,
    pub mode_ladder: usize,
    pub phases: bool,
}

pub fn encoder_depth(s: &DepthShape) -> usize {
    if s.registers == 0 {
        return 1 + s.mode_ladder;
    }
    // Real-valued log of the chunk width keeps the total monotone in M;
    // the sum is rounded up once at the end.
    let lw = (s.chunk_width.max(2) as f64).log2();
    let fan = 1.0 + lw;
    let initial = 1.0 + fan + s.mode_ladder as f64;
    let load = 2.0 + lw;
    // with two or fewer controls the AND is a single gate
    let and = if s.n <= 2 { 1.0 } else { (3 * lg(s.n)) as f64 };
    let mut chunk = 2.0 * (1.0 + and + load) + s.ctrl_width as f64;
    if s.phases {
        chunk += 2.0 * load + s.ctrl_width as f64;
    }
    (initial + s.chunks as f64 * chunk + fan - 1e-9).ceil() as usize
}

/// Layers of one Grover iteration beyond the two encoder calls: `Z`, the
/// leading sign, two X layers, and the two lowered MCX ladders around the
/// controlled `Z` of `S0`.
pub fn aa_overhead(n: usize) -> usize {
    7 + 4 * lg(n)
}

fn finish(mut e: ResourceEstimate, shape: &DepthShape) -> Result<ResourceEstimate> {
    let sched = schedule(e.rho)?;
    e.encoder_depth = encoder_depth(shape);
    e.aa_iterations = sched.m;
    e.total_depth = (2 * sched.m + 1) * e.encoder_depth + sched.m * aa_overhead(e.n);
    e.tau_model = e.n as f64 / e.rho.sqrt();
    Ok(e)
}

fn declared(n: usize, registers: usize, ctrl_width: usize) -> usize {
    n * (1 + registers) + registers + ctrl_width + 1
}

fn work(n: usize, registers: usize, ctrl_width: usize) -> usize {
    registers * work_needed(n) + (registers.div_ceil(2).max(1) - 1) * ctrl_width
}

/// Model-only estimate for `N = 2^n` entries, `m` index registers and `L`
/// bits per angle.
pub fn model_estimate(n: usize, m: usize, precision: usize, rho: f64) -> Result<ResourceEstimate> {
    let len = 1usize << n;
    if m < 1 || m > len {
        return Err(crate::Error::BadParallelism { m, n: len });
    }
    let chunks = len.div_ceil(m);
    let shape = DepthShape {
        n,
        registers: m,
        chunks,
        chunk_width: len.div_ceil(chunks),
        ctrl_width: precision,
        mode_ladder: 0,
        phases: false,
    };
    finish(
        ResourceEstimate {
            n,
            len,
            m,
            precision,
            rho,
            index_registers: m,
            chunks,
            qubits_declared: declared(n, m, precision),
            qubits_work: work(n, m, precision),
            gate_counts: BTreeMap::new(),
            encoder_depth: 0,
            aa_iterations: 0,
            total_depth: 0,
            tau_model: 0.0,
        },
        &shape,
    )
}

/// Estimate for a built plan, with gate counts of its lowered circuit.
pub fn estimate(plan: &EncodingPlan, rho: f64) -> Result<ResourceEstimate> {
    let ctrl_width = plan.layout.ctrl.len();
    let chunk_width = plan.chunks.iter().map(Vec::len).max().unwrap_or(0);
    let mode_ladder = match plan.kind {
        PlanKind::Full => 0,
        PlanKind::ModeShift { .. } => ctrl_width,
    };
    let shape = DepthShape {
        n: plan.n,
        registers: plan.m,
        chunks: plan.chunk_count(),
        chunk_width,
        ctrl_width,
        mode_ladder,
        phases: plan.phases.is_some(),
    };
    let mut gate_counts = BTreeMap::new();
    for g in plan.lowered_gates()? {
        *gate_counts.entry(g.name()).or_default() += 1;
    }
    finish(
        ResourceEstimate {
            n: plan.n,
            len: plan.len,
            m: plan.m,
            precision: plan.precision,
            rho,
            index_registers: plan.m,
            chunks: plan.chunk_count(),
            qubits_declared: plan.layout.declared(),
            qubits_work: plan.layout.work(),
            gate_counts,
            encoder_depth: 0,
            aa_iterations: 0,
            total_depth: 0,
            tau_model: 0.0,
        },
        &shape,
    )
}

/// Greedy ASAP layer count of the plan's lowered gate list.
pub fn measured_depth(plan: &EncodingPlan) -> Result<usize> {
    Ok(greedy_depth(&plan.lowered_gates()?))
}

/// Estimate for a mode-shifted encoding with `s` entries off the mode.
/// `s = N` means no compression and gives [`model_estimate`].
pub fn sparse_estimate(
    s: usize,
    n: usize,
    m: usize,
    precision: usize,
    rho: f64,
) -> Result<ResourceEstimate> {
    let len = 1usize << n;
    if s > len {
        return Err(crate::Error::Invalid(format!("S = {s} exceeds N = {len}")));
    }
    if s == len {
        return model_estimate(n, m, precision, rho);
    }
    if m < 1 || m > len {
        return Err(crate::Error::BadParallelism { m, n: len });
    }
    let registers = m.min(s);
    let chunks = if registers == 0 {
        0
    } else {
        s.div_ceil(registers)
    };
    let ctrl_width = precision + 1;
    let shape = DepthShape {
        n,
        registers,
        chunks,
        chunk_width: if chunks == 0 { 0 } else { s.div_ceil(chunks) },
        ctrl_width,
        mode_ladder: ctrl_width,
        phases: false,
    };
    finish(
        ResourceEstimate {
            n,
            len,
            m,
            precision,
            rho,
            index_registers: registers,
            chunks,
            qubits_declared: declared(n, registers, ctrl_width),
            qubits_work: work(n, registers, ctrl_width),
            gate_counts: BTreeMap::new(),
            encoder_depth: 0,
            aa_iterations: 0,
            total_depth: 0,
            tau_model: 0.0,
        },
        &shape,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub encoder_depth: usize,
    /// `encoder_depth / ((N / M) log2(M + 1))`.
    pub ratio: f64,
}

/// Model depth over a grid; `m` values above `N` are skipped.
pub fn scaling_table(
    n_list: &[usize],
    m_list: &[usize],
    precision: usize,
) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for &n in n_list {
        let len = 1usize << n;
        for &m in m_list.iter().filter(|&&m| m >= 1 && m <= len) {
            let e = model_estimate(n, m, precision, 1.0)?;
            let scale = len as f64 / m as f64 * ((m + 1) as f64).log2();
            rows.push(ScalingRow {
                len,
                m,
                encoder_depth: e.encoder_depth,
                ratio: e.encoder_depth as f64 / scale,
            });
        }
    }
    Ok(rows)
}

/// Flat CSV record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub precision: usize,
    pub rho: f64,
    pub qubits_declared: usize,
    pub qubits_work: usize,
    pub depth: usize,
    #[serde(rename = "m")]
    pub m_iterations: usize,
    pub total_depth: usize,
    pub tau_model: f64,
}

impl From<&ResourceEstimate> for ResourceRow {
    fn from(e: &ResourceEstimate) -> Self {
        ResourceRow {
            len: e.len,
            m: e.m,
            precision: e.precision,
            rho: e.rho,
            qubits_declared: e.qubits_declared,
            qubits_work: e.qubits_work,
            depth: e.encoder_depth,
            m_iterations: e.aa_iterations,
            total_depth: e.total_depth,
            tau_model: e.tau_model,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_plan, mode_shift_plan};
    use crate::preprocess::{compute_theta, normalize_real, quantize_theta, BinaryAngleMatrix};

    fn random_b(n: usize, l: usize, seed: u64) -> BinaryAngleMatrix {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let raw: Vec<f64> = (0..1usize << n)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let v = normalize_real(&raw).unwrap();
        quantize_theta(&compute_theta(&v).unwrap(), l).unwrap()
    }

    #[test]
    fn register_table() {
        assert_eq!(model_estimate(3, 8, 6, 1.0).unwrap().qubits_declared, 42);
        let e = model_estimate(3, 1, 6, 1.0).unwrap();
        assert_eq!((e.qubits_declared, e.chunks), (14, 8));
        for n in 1..=6 {
            let len = 1 << n;
            for l in [3, 8] {
                assert_eq!(
                    model_estimate(n, len, l, 1.0).unwrap().qubits_declared,
                    n * (1 + len) + len + l + 1
                );
                assert_eq!(
                    model_estimate(n, 1, l, 1.0).unwrap().qubits_declared,
                    2 * n + 2 + l
                );
            }
        }
    }

    #[test]
    fn worst_case_runtime() {
        let e = model_estimate(10, 4, 8, 1.0 / 1024.0).unwrap();
        assert!((e.tau_model - 320.0).abs() < 1e-9);
    }

    #[test]
    fn depth_monotone_in_parallelism() {
        for n in 1..=10 {
            for l in [4, 8] {
                let mut prev = usize::MAX;
                for m in 1..=1usize << n {
                    let d = model_estimate(n, m, l, 1.0).unwrap().encoder_depth;
                    assert!(d <= prev, "n={n} L={l} M={m}: {d} > {prev}");
                    prev = d;
                }
            }
        }
    }

    #[test]
    fn scaling_band_at_n10() {
        let ms: Vec<usize> = (1..=1024).collect();
        let rows = scaling_table(&[10], &ms, 8).unwrap();
        let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        assert!(hi / lo <= 20.0, "{lo} .. {hi}");
        let first = rows.first().unwrap().encoder_depth;
        assert!(rows.last().unwrap().encoder_depth < first);
    }

    #[test]
    fn model_tracks_measured_layers() {
        for n in 1..=6 {
            for l in [3, 6] {
                let b = random_b(n, l, (n * 31 + l) as u64);
                let len = 1usize << n;
                for m in [1, 2, 3, len / 2, len]
                    .into_iter()
                    .filter(|&m| m >= 1 && m <= len)
                {
                    let plan = build_plan(&b, m).unwrap();
                    let model = estimate(&plan, 1.0).unwrap().encoder_depth as f64;
                    let measured = measured_depth(&plan).unwrap() as f64;
                    let r = model / measured;
                    assert!(
                        (0.5..=2.0).contains(&r),
                        "n={n} L={l} M={m}: model {model} measured {measured}"
                    );
                }
            }
        }
    }

    #[test]
    fn sparse_estimates() {
        let e = sparse_estimate(2, 3, 8, 6, 0.5).unwrap();
        assert_eq!((e.index_registers, e.chunks), (2, 1));
        let e = sparse_estimate(0, 3, 8, 6, 1.0).unwrap();
        assert_eq!(e.chunks, 0);
        assert_eq!(
            sparse_estimate(8, 3, 4, 6, 0.5).unwrap(),
            model_estimate(3, 4, 6, 0.5).unwrap()
        );
    }

    #[test]
    fn mode_shift_is_shallower() {
        let v = normalize_real(&[1.0, 2.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0]).unwrap();
        let b = quantize_theta(&compute_theta(&v).unwrap(), 6).unwrap();
        let full = build_plan(&b, 4).unwrap();
        let shifted = mode_shift_plan(&b, 4).unwrap();
        assert!(measured_depth(&shifted).unwrap() < measured_depth(&full).unwrap());
        assert!(
            estimate(&shifted, 0.6).unwrap().encoder_depth
                < estimate(&full, 0.6).unwrap().encoder_depth
        );
        let sparse = sparse_estimate(4, 3, 4, 6, 0.6).unwrap();
        assert_eq!(sparse.qubits_declared, shifted.layout.declared());
        assert_eq!(sparse.qubits_work, shifted.layout.work());
    }

    #[test]
    fn runtime_model_tracks_total_depth() {
        let mut ratios = Vec::new();
        for k in 0..=10 {
            let rho = (-(k as f64)).exp2();
            let e = model_estimate(10, 16, 8, rho).unwrap();
            ratios.push(e.total_depth as f64 / e.tau_model);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 4.0, "{ratios:?}");
    }

    #[test]
    fn plan_estimate_counts_gates() {
        let b = random_b(3, 4, 5);
        let plan = build_plan(&b, 2).unwrap();
        let e = estimate(&plan, 0.5).unwrap();
        assert_eq!(e.qubits_work, plan.layout.work());
        assert_eq!(e.gate_counts["H"], 3);
        assert_eq!(e.gate_counts["C-RY"], 4 * 4);
        assert_eq!(
            e.gate_counts.values().sum::<usize>(),
            plan.lowered_gates().unwrap().len()
        );
    }
}
