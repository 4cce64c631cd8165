use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{GateKind, GateSpec};
use crate::error::{Error, Result};

/// Refuse dense states above this many qubits.
pub const DENSE_QUBIT_CAP: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Raw `2^q` statevector. Qubit 0 is the least significant bit of the
/// basis-state index.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    qubits: usize,
    amps: Vec<Complex64>,
}

fn check_cap(qubits: usize) -> Result<()> {
    if qubits > DENSE_QUBIT_CAP {
        return Err(Error::TooLarge {
            qubits,
            cap: DENSE_QUBIT_CAP,
        });
    }
    Ok(())
}

fn mask_of(qs: &[usize]) -> usize {
    qs.iter().fold(0, |m, &q| m | (1 << q))
}

impl DenseState {
    /// `|0...0>` on `qubits` qubits.
    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        check_cap(qubits)?;
        let mut amps = vec![ZERO; 1 << qubits];
        *amps
            .get_mut(index)
            .ok_or(Error::BadIndex { index, qubits })? = ONE;
        Ok(DenseState { qubits, amps })
    }

    /// Wrap an amplitude vector whose length is a power of two. The vector
    /// is taken as is; callers normalize if they need to.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::BadShape(format!(
                "{} amplitudes is not a power of two",
                amps.len()
            )));
        }
        let qubits = amps.len().trailing_zeros() as usize;
        check_cap(qubits)?;
        Ok(DenseState { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_circuit(&mut self, gates: &[GateSpec]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply_gate(g))
    }

    pub fn apply_gate(&mut self, g: &GateSpec) -> Result<()> {
        g.validate(self.qubits)?;
        if !g.is_active() {
            return Ok(());
        }
        let cmask = mask_of(&g.controls);
        match g.kind {
            GateKind::X => self.flip(cmask, mask_of(&g.targets)),
            GateKind::Swap => self.swap(cmask, g.targets[0], g.targets[1]),
            GateKind::Z => {
                for &t in &g.targets {
                    self.diagonal(cmask, t, -ONE);
                }
            }
            GateKind::Phase(a) => {
                for &t in &g.targets {
                    self.diagonal(cmask, t, Complex64::from_polar(1.0, a));
                }
            }
            GateKind::H => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let m = [s, s, s, -s].map(|x| Complex64::new(x, 0.0));
                for &t in &g.targets {
                    self.unitary(cmask, t, m);
                }
            }
            GateKind::Ry(a) => {
                let (sin, cos) = (a / 2.0).sin_cos();
                let m = [cos, -sin, sin, cos].map(|x| Complex64::new(x, 0.0));
                for &t in &g.targets {
                    self.unitary(cmask, t, m);
                }
            }
        }
        Ok(())
    }

    /// `X` on every target bit where all controls are set.
    fn flip(&mut self, cmask: usize, tmask: usize) {
        let low = tmask & tmask.wrapping_neg();
        for i in 0..self.amps.len() {
            if i & low == 0 && i & cmask == cmask {
                self.amps.swap(i, i ^ tmask);
            }
        }
    }

    fn swap(&mut self, cmask: usize, a: usize, b: usize) {
        let (ma, mb) = (1 << a, 1 << b);
        for i in 0..self.amps.len() {
            if i & ma != 0 && i & mb == 0 && i & cmask == cmask {
                self.amps.swap(i, i ^ ma ^ mb);
            }
        }
    }

    fn diagonal(&mut self, cmask: usize, t: usize, phase: Complex64) {
        let mask = cmask | (1 << t);
        self.amps
            .par_iter_mut()
            .enumerate()
            .with_min_len(1 << 12)
            .for_each(|(i, a)| {
                if i & mask == mask {
                    *a *= phase;
                }
            });
    }

    /// Apply `[[m0, m1], [m2, m3]]` to qubit `t` where the controls hold.
    fn unitary(&mut self, cmask: usize, t: usize, m: [Complex64; 4]) {
        let half = 1usize << t;
        self.amps
            .par_chunks_mut(half << 1)
            .enumerate()
            .with_min_len((1 << 12) / (half << 1) + 1)
            .for_each(|(block, chunk)| {
                let base = block * (half << 1);
                let (lo, hi) = chunk.split_at_mut(half);
                for (j, (a0, a1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    if (base + j) & cmask == cmask {
                        let (x, y) = (*a0, *a1);
                        *a0 = m[0] * x + m[1] * y;
                        *a1 = m[2] * x + m[3] * y;
                    }
                }
            });
    }

    /// Born probability of reading `value` on `qubit`.
    pub fn probability_of(&self, qubit: usize, value: bool) -> Result<f64> {
        if qubit >= self.qubits {
            return Err(Error::BadIndex {
                index: qubit,
                qubits: self.qubits,
            });
        }
        let bit = 1 << qubit;
        let want = if value { bit } else { 0 };
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Project onto `qubit = value` and renormalize.
    pub fn post_select(&self, qubit: usize, value: bool) -> Result<DenseState> {
        let p = self.probability_of(qubit, value)?;
        if p <= 1e-14 {
            return Err(Error::ImpossibleOutcome);
        }
        let bit = 1 << qubit;
        let want = if value { bit } else { 0 };
        let scale = p.sqrt().recip();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & bit == want { a * scale } else { ZERO })
            .collect();
        Ok(DenseState {
            qubits: self.qubits,
            amps,
        })
    }

    /// Probability that every qubit in `qubits` reads 0.
    pub fn probability_all_zero(&self, qubits: &[usize]) -> f64 {
        let mask = mask_of(qubits);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Amplitudes of the sub-register `keep` (listed low bit first) on the
    /// slice where all other qubits are 0. Not renormalized.
    pub fn restrict(&self, keep: &[usize]) -> Vec<Complex64> {
        (0..1usize << keep.len())
            .map(|sub| {
                let full = keep
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| (sub >> b) & 1 == 1)
                    .fold(0usize, |acc, (_, &q)| acc | (1 << q));
                self.amps[full]
            })
            .collect()
    }
}

/// `|<a|b>|^2 / (|a|^2 |b|^2)`: 1 exactly when the states agree up to a
/// global phase.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::BadShape(format!(
            "fidelity of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::BadState(na.min(nb)));
    }
    Ok((overlap.norm_sqr() / (na * nb)).min(1.0))
}

/// Statevector dump: JSON array of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateDump(pub Vec<[f64; 2]>);

impl From<&[Complex64]> for StateDump {
    fn from(amps: &[Complex64]) -> Self {
        StateDump(amps.iter().map(|a| [a.re, a.im]).collect())
    }
}

impl From<StateDump> for Vec<Complex64> {
    fn from(d: StateDump) -> Self {
        d.0.into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect()
    }
}
