//! Classical pre-processing.
//!
//! A unit vector `v` of length `N = 2^n` is turned into the angle vector
//! `theta_i = (2/pi) asin(v_i / |v|_inf)` (angles in quarter turns), and each
//! angle is written as one row of the `N x L` bit matrix `B`: a sign bit
//! followed by `L - 1` fraction bits with weights `2^-1 .. 2^-(L-1)`.
//! The circuit reproduces the quantized amplitudes
//! `c_k = sign_k * sin(pi/2 * |theta_hat_k|)`, whose data density
//! `rho = (1/N) sum (c_k / |c|_inf)^2` is the heralding probability of the
//! encoder.
//!
//! Complex inputs are split into moduli (encoded exactly like a real,
//! non-negative vector) and phases stored as fractions of a full turn.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of bits per angle (the fraction bits must fit in
/// an `f64` mantissa).
pub const MAX_PRECISION: usize = 52;

/// Grid values closer than this to an integer snap onto it before rounding,
/// so `asin` round-off cannot push an exactly representable angle into the
/// next grid cell.
const SNAP: f64 = 1e-9;

/// Unit-norm input vector, zero-padded to a power-of-two length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputVector {
    values: Vec<Complex64>,
    is_real: bool,
    padding: usize,
}

impl InputVector {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of qubits `n = log2 N`.
    pub fn n_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Zeros appended to reach a power-of-two length.
    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn original_len(&self) -> usize {
        self.values.len() - self.padding
    }

    /// Real parts; only meaningful when [`is_real`](Self::is_real) holds.
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// `|v|_inf` over the moduli.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Normalize to unit 2-norm and zero-pad to the next power of two.
pub fn normalize(values: &[Complex64]) -> Result<InputVector> {
    let norm_sqr: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    if values.is_empty() || norm_sqr == 0.0 || !norm_sqr.is_finite() {
        return Err(Error::ZeroVector);
    }
    let scale = norm_sqr.sqrt().recip();
    let len = values.len().next_power_of_two().max(1);
    let mut out: Vec<Complex64> = values.iter().map(|z| z * scale).collect();
    let padding = len - values.len();
    out.resize(len, Complex64::new(0.0, 0.0));
    Ok(InputVector {
        is_real: values.iter().all(|z| z.im == 0.0),
        values: out,
        padding,
    })
}

pub fn normalize_real(values: &[f64]) -> Result<InputVector> {
    let complex: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    normalize(&complex)
}

/// Angles in units of `pi/2`, each in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleVector(Vec<f64>);

impl AngleVector {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = thetas.iter().find(|t| t.is_nan() || t.abs() > 1.0) {
            return Err(Error::Invalid(format!("angle {bad} outside [-1, 1]")));
        }
        Ok(AngleVector(thetas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn angles_of(ratios: impl IndexedParallelIterator<Item = f64>) -> AngleVector {
    AngleVector(
        ratios
            .map(|r| r.clamp(-1.0, 1.0).asin() / FRAC_PI_2)
            .collect(),
    )
}

/// `theta_i = (2/pi) asin(v_i / |v|_inf)` for a real vector.
pub fn compute_theta(v: &InputVector) -> Result<AngleVector> {
    if !v.is_real() {
        return Err(Error::UseComplexSplit);
    }
    let max = v.max_abs();
    if max == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(angles_of(v.values().par_iter().map(|z| z.re / max)))
}

/// How `|theta|` is mapped onto the `2^-(L-1)` grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Round the signed angle toward `+inf`. Reproduces the golden
    /// example matrix (`1/3 -> 11/32`, `-1/3 -> -10/32`).
    #[default]
    Ceiling,
    /// Round `|theta|` to the nearest grid value, ties away from zero.
    Nearest,
}

/// One row of `B`: sign bit plus the `L - 1` fraction bits read as an
/// unsigned integer (most significant fraction bit first).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngleCode {
    pub negative: bool,
    pub magnitude: u64,
}

impl AngleCode {
    /// Signed grid value `(-1)^sign * magnitude`.
    pub fn signed(&self) -> i64 {
        if self.negative {
            -(self.magnitude as i64)
        } else {
            self.magnitude as i64
        }
    }
}

/// The `N x L` bit matrix. Column 0 is the sign bit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BitRows", try_from = "BitRows")]
pub struct BinaryAngleMatrix {
    precision: usize,
    rows: Vec<AngleCode>,
}

#[derive(Serialize, Deserialize)]
struct BitRows {
    #[serde(rename = "L")]
    precision: usize,
    rows: Vec<Vec<u8>>,
}

impl From<BinaryAngleMatrix> for BitRows {
    fn from(b: BinaryAngleMatrix) -> Self {
        BitRows {
            precision: b.precision,
            rows: b.bit_rows(),
        }
    }
}

impl TryFrom<BitRows> for BinaryAngleMatrix {
    type Error = Error;

    fn try_from(raw: BitRows) -> Result<Self> {
        BinaryAngleMatrix::from_bit_rows(raw.precision, &raw.rows)
    }
}

fn check_precision(precision: usize) -> Result<()> {
    if precision < 2 {
        return Err(Error::PrecisionTooLow(precision));
    }
    if precision > MAX_PRECISION {
        return Err(Error::PrecisionTooHigh(precision));
    }
    Ok(())
}

impl BinaryAngleMatrix {
    pub fn from_codes(precision: usize, rows: Vec<AngleCode>) -> Result<Self> {
        check_precision(precision)?;
        let limit = 1u64 << (precision - 1);
        if let Some(row) = rows.iter().find(|r| r.magnitude >= limit) {
            return Err(Error::Invalid(format!(
                "magnitude {} needs more than {} fraction bits",
                row.magnitude,
                precision - 1
            )));
        }
        Ok(BinaryAngleMatrix { precision, rows })
    }

    pub fn from_bit_rows(precision: usize, rows: &[Vec<u8>]) -> Result<Self> {
        check_precision(precision)?;
        let codes = rows
            .iter()
            .map(|bits| {
                if bits.len() != precision || bits.iter().any(|&b| b > 1) {
                    return Err(Error::BadShape(format!(
                        "row {bits:?} is not {precision} bits"
                    )));
                }
                let magnitude = bits[1..]
                    .iter()
                    .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
                Ok(AngleCode {
                    negative: bits[0] == 1,
                    magnitude,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BinaryAngleMatrix {
            precision,
            rows: codes,
        })
    }

    /// Bits per angle, `L`.
    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn codes(&self) -> &[AngleCode] {
        &self.rows
    }

    /// `B[i][j]`; `j = 0` is the sign bit.
    pub fn bit(&self, i: usize, j: usize) -> bool {
        let code = self.rows[i];
        if j == 0 {
            code.negative
        } else {
            (code.magnitude >> (self.precision - 1 - j)) & 1 == 1
        }
    }

    pub fn row_bits(&self, i: usize) -> Vec<u8> {
        (0..self.precision)
            .map(|j| u8::from(self.bit(i, j)))
            .collect()
    }

    pub fn bit_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows.len()).map(|i| self.row_bits(i)).collect()
    }

    /// Grid spacing `2^-(L-1)`.
    pub fn resolution(&self) -> f64 {
        (-((self.precision - 1) as f64)).exp2()
    }

    /// Dequantized angle of row `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.rows[i].signed() as f64 * self.resolution()
    }
}

/// Quantize with the default rounding ([`Rounding::Ceiling`]).
pub fn quantize_theta(theta: &AngleVector, precision: usize) -> Result<BinaryAngleMatrix> {
    quantize_theta_with(theta, precision, Rounding::default())
}

pub fn quantize_theta_with(
    theta: &AngleVector,
    precision: usize,
    rounding: Rounding,
) -> Result<BinaryAngleMatrix> {
    check_precision(precision)?;
    let scale = (1u64 << (precision - 1)) as f64;
    let max_mag = (1i64 << (precision - 1)) - 1;
    let rows = theta
        .as_slice()
        .par_iter()
        .map(|&t| {
            let mut x = t * scale;
            if (x - x.round()).abs() < SNAP {
                x = x.round();
            }
            let q = match rounding {
                Rounding::Ceiling => x.ceil(),
                Rounding::Nearest => x.round(),
            } as i64;
            let q = q.clamp(-max_mag, max_mag);
            AngleCode {
                negative: q < 0,
                magnitude: q.unsigned_abs(),
            }
        })
        .collect();
    Ok(BinaryAngleMatrix { precision, rows })
}

pub fn dequantize(b: &BinaryAngleMatrix) -> AngleVector {
    AngleVector((0..b.len()).map(|i| b.value(i)).collect())
}

/// `c_k = sign * sin(pi/2 * |theta_hat_k|)`, the FLAG=1 amplitude of branch k.
pub fn reconstructed_amplitudes(b: &BinaryAngleMatrix) -> Vec<f64> {
    (0..b.len())
        .map(|i| {
            let t = b.value(i);
            t.signum() * (FRAC_PI_2 * t.abs()).sin()
        })
        .collect()
}

/// Probability of reading FLAG=1 after encoding the quantized amplitudes
/// `c`: `(1/N) sum |c_k|^2`.
pub fn heralding_probability(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum::<f64>() / c.len() as f64
}

/// Data density `rho = (1/N) sum (a_i / |a|_inf)^2`.
pub fn density(amplitudes: &[f64]) -> Result<f64> {
    density_of_moduli(amplitudes.iter().map(|a| a.abs()), amplitudes.len())
}

pub(crate) fn density_of_moduli(
    moduli: impl Iterator<Item = f64> + Clone,
    len: usize,
) -> Result<f64> {
    let max = moduli.clone().fold(0.0, f64::max);
    if max == 0.0 || len == 0 {
        return Err(Error::ZeroVector);
    }
    let sum: f64 = moduli.map(|a| (a / max) * (a / max)).sum();
    Ok(sum / len as f64)
}

/// Per-entry phases quantized to `L` bits of a full turn:
/// `phase_k ~= 2 pi * code_k / 2^L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseMatrix {
    #[serde(rename = "L")]
    precision: usize,
    codes: Vec<u64>,
}

impl PhaseMatrix {
    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    /// Bit `l` in `1..=L` of entry `i`, weight `2^-l` of a turn.
    pub fn bit(&self, i: usize, l: usize) -> bool {
        (self.codes[i] >> (self.precision - l)) & 1 == 1
    }

    pub fn fraction(&self, i: usize) -> f64 {
        self.codes[i] as f64 / (1u64 << self.precision) as f64
    }

    pub fn bit_rows(&self) -> Vec<Vec<u8>> {
        (0..self.codes.len())
            .map(|i| {
                (1..=self.precision)
                    .map(|l| u8::from(self.bit(i, l)))
                    .collect()
            })
            .collect()
    }
}

/// Modulus/phase decomposition of a complex input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSplit {
    #[serde(rename = "theta_R")]
    pub theta_r: AngleVector,
    /// `phi_k / 2pi mod 1`, with the first nonzero entry rotated to phase 0.
    pub phase_fractions: Vec<f64>,
    #[serde(rename = "B_R")]
    pub b_r: BinaryAngleMatrix,
    #[serde(rename = "B_phi")]
    pub b_phi: PhaseMatrix,
}

impl ComplexSplit {
    /// Quantized target amplitudes `|c_k| e^{i phi_hat_k}` (unnormalized).
    pub fn target_amplitudes(&self) -> Vec<Complex64> {
        reconstructed_amplitudes(&self.b_r)
            .into_iter()
            .enumerate()
            .map(|(k, c)| Complex64::from_polar(c, 2.0 * PI * self.b_phi.fraction(k)))
            .collect()
    }
}

pub fn split_complex(v: &InputVector, precision: usize) -> Result<ComplexSplit> {
    split_complex_with(v, precision, Rounding::default())
}

pub fn split_complex_with(
    v: &InputVector,
    precision: usize,
    rounding: Rounding,
) -> Result<ComplexSplit> {
    check_precision(precision)?;
    let values = v.values();
    let reference = values
        .iter()
        .find(|z| z.norm() > 0.0)
        .ok_or(Error::ZeroVector)?
        .arg();
    let max = v.max_abs();
    let theta_r = angles_of(values.par_iter().map(|z| z.norm() / max));
    let phase_fractions: Vec<f64> = values
        .iter()
        .map(|z| {
            if z.norm() == 0.0 {
                return 0.0;
            }
            let f = ((z.arg() - reference) / (2.0 * PI)).rem_euclid(1.0);
            if f >= 1.0 || f.abs() < 1e-15 {
                0.0
            } else {
                f
            }
        })
        .collect();
    let turns = (1u64 << precision) as f64;
    let codes = phase_fractions
        .iter()
        .map(|f| ((f * turns).round() as u64) % (1u64 << precision))
        .collect();
    let b_r = quantize_theta_with(&theta_r, precision, rounding)?;
    Ok(ComplexSplit {
        theta_r,
        phase_fractions,
        b_r,
        b_phi: PhaseMatrix { precision, codes },
    })
}

/// Result of shifting every angle by the most frequent quantized value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeShift {
    /// Most frequent dequantized angle (smallest on ties).
    pub mode: f64,
    pub mode_code: i64,
    /// `theta_hat_i - mode`.
    pub shifted: AngleVector,
    /// Entries whose shifted angle is nonzero.
    pub support: Vec<usize>,
}

impl ModeShift {
    /// Number of entries differing from the mode, `S`.
    pub fn s(&self) -> usize {
        self.support.len()
    }
}

pub fn compress_mode_shift(b: &BinaryAngleMatrix) -> ModeShift {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for code in b.codes() {
        *counts.entry(code.signed()).or_default() += 1;
    }
    // BTreeMap iterates ascending, so the first maximum is the smallest value.
    let mode_code = counts
        .iter()
        .fold((0i64, 0usize), |best, (&value, &count)| {
            if count > best.1 {
                (value, count)
            } else {
                best
            }
        })
        .0;
    let res = b.resolution();
    let mode = mode_code as f64 * res;
    let shifted: Vec<f64> = b
        .codes()
        .iter()
        .map(|c| (c.signed() - mode_code) as f64 * res)
        .collect();
    let support = b
        .codes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.signed() != mode_code)
        .map(|(i, _)| i)
        .collect();
    ModeShift {
        mode,
        mode_code,
        shifted: AngleVector(shifted),
        support,
    }
}

/// Everything the classical stage hands to the circuit builder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessResult {
    #[serde(rename = "N")]
    pub len: usize,
    pub n: usize,
    pub padding: usize,
    pub rounding: Rounding,
    pub theta: AngleVector,
    #[serde(rename = "B")]
    pub b: BinaryAngleMatrix,
    /// Reconstructed amplitudes `c_k` (scale `w_k / |w|_inf`).
    pub w: Vec<f64>,
    pub rho_exact: f64,
    /// FLAG=1 probability of the built circuit, `(1/N) sum c_k^2`. Below
    /// the density of `w` by the factor `|c|_inf^2`, since saturated
    /// entries give `|c|_inf < 1`.
    pub rho_circuit: f64,
    pub max_abs: f64,
    pub mode: f64,
    #[serde(rename = "S")]
    pub s: usize,
}

pub fn preprocess(v: &InputVector, precision: usize) -> Result<PreprocessResult> {
    preprocess_with(v, precision, Rounding::default())
}

pub fn preprocess_with(
    v: &InputVector,
    precision: usize,
    rounding: Rounding,
) -> Result<PreprocessResult> {
    let theta = compute_theta(v)?;
    let b = quantize_theta_with(&theta, precision, rounding)?;
    let w = reconstructed_amplitudes(&b);
    let rho_exact = density(&v.real_parts())?;
    let rho_circuit = heralding_probability(&w);
    let shift = compress_mode_shift(&b);
    Ok(PreprocessResult {
        len: v.len(),
        n: v.n_qubits(),
        padding: v.padding(),
        rounding,
        theta,
        b,
        w,
        rho_exact,
        rho_circuit,
        max_abs: v.max_abs(),
        mode: shift.mode,
        s: shift.s(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_vector() -> InputVector {
        normalize_real(&[1.0, 2.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normalize_three_four_five() {
        let v = normalize_real(&[3.0, 4.0]).unwrap();
        assert_eq!(v.len(), 2);
        assert!((v.values()[0].re - 0.6).abs() < 1e-15);
        assert!((v.values()[1].re - 0.8).abs() < 1e-15);
        assert!(v.is_real());
    }

    #[test]
    fn normalize_example_vector() {
        let v = example_vector();
        let s = 20f64.sqrt();
        for (got, raw) in v
            .values()
            .iter()
            .zip([1.0, 2.0, -1.0, 2.0, -1.0, 2.0, 1.0, 2.0])
        {
            assert!((got.re - raw / s).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_pads_to_power_of_two() {
        let v = normalize_real(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.padding(), 1);
        assert_eq!(v.original_len(), 3);
        let s = 3f64.sqrt().recip();
        assert!((v.values()[0].re - s).abs() < 1e-15);
        assert_eq!(v.values()[3], c(0.0, 0.0));
    }

    #[test]
    fn normalize_rejects_zero() {
        assert!(matches!(
            normalize_real(&[0.0, 0.0]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(normalize_real(&[]), Err(Error::ZeroVector)));
    }

    #[test]
    fn theta_of_example_vector() {
        let theta = compute_theta(&example_vector()).unwrap();
        let expected = [
            1.0 / 3.0,
            1.0,
            -1.0 / 3.0,
            1.0,
            -1.0 / 3.0,
            1.0,
            1.0 / 3.0,
            1.0,
        ];
        for (t, e) in theta.as_slice().iter().zip(expected) {
            assert!((t - e).abs() < 1e-14, "{t} vs {e}");
        }
        // max-norm entries land on exactly 1
        assert_eq!(theta.as_slice()[1], 1.0);
    }

    #[test]
    fn theta_uniform_and_basis() {
        let u = normalize_real(&[1.0; 8]).unwrap();
        assert!(compute_theta(&u)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&t| t == 1.0));
        let e0 = normalize_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            compute_theta(&e0).unwrap().as_slice(),
            &[1.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn theta_rejects_complex() {
        let v = normalize(&[c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(compute_theta(&v), Err(Error::UseComplexSplit)));
    }

    #[test]
    fn quantize_reproduces_golden_matrix() {
        let theta = compute_theta(&example_vector()).unwrap();
        let b = quantize_theta(&theta, 6).unwrap();
        let expected: Vec<Vec<u8>> = vec![
            vec![0, 0, 1, 0, 1, 1],
            vec![0, 1, 1, 1, 1, 1],
            vec![1, 0, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 1, 1],
            vec![1, 0, 1, 0, 1, 0],
            vec![0, 1, 1, 1, 1, 1],
            vec![0, 0, 1, 0, 1, 1],
            vec![0, 1, 1, 1, 1, 1],
        ];
        assert_eq!(b.bit_rows(), expected);
    }

    #[test]
    fn quantize_single_rows() {
        let rows = |t: f64, r| {
            quantize_theta_with(&AngleVector::new(vec![t]).unwrap(), 6, r)
                .unwrap()
                .row_bits(0)
        };
        assert_eq!(rows(1.0 / 3.0, Rounding::Ceiling), vec![0, 0, 1, 0, 1, 1]);
        assert_eq!(rows(1.0, Rounding::Ceiling), vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(rows(-1.0 / 3.0, Rounding::Ceiling), vec![1, 0, 1, 0, 1, 0]);
        // nearest rounding gives 11/32 for both signs
        assert_eq!(rows(1.0 / 3.0, Rounding::Nearest), vec![0, 0, 1, 0, 1, 1]);
        assert_eq!(rows(-1.0 / 3.0, Rounding::Nearest), vec![1, 0, 1, 0, 1, 1]);
        assert_eq!(rows(-1.0, Rounding::Nearest), vec![1, 1, 1, 1, 1, 1]);
        // tiny negative angles round to +0 under ceiling: no sign bit
        assert_eq!(rows(-0.001, Rounding::Ceiling), vec![0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn quantize_rejects_low_precision() {
        let theta = AngleVector::new(vec![0.5]).unwrap();
        assert!(matches!(
            quantize_theta(&theta, 1),
            Err(Error::PrecisionTooLow(1))
        ));
        assert!(matches!(
            quantize_theta(&theta, 0),
            Err(Error::PrecisionTooLow(0))
        ));
    }

    #[test]
    fn dequantize_rows() {
        let b = BinaryAngleMatrix::from_bit_rows(
            6,
            &[vec![0, 0, 1, 0, 1, 1], vec![1, 0, 1, 0, 1, 0], vec![0; 6]],
        )
        .unwrap();
        assert_eq!(dequantize(&b).as_slice(), &[0.34375, -0.3125, 0.0]);
    }

    #[test]
    fn reconstructed_amplitude_values() {
        let b = BinaryAngleMatrix::from_bit_rows(
            6,
            &[vec![0, 0, 1, 0, 1, 1], vec![0, 1, 1, 1, 1, 1], vec![0; 6]],
        )
        .unwrap();
        let c = reconstructed_amplitudes(&b);
        assert!((c[0] - 0.514103).abs() < 1e-6);
        assert!((c[1] - 0.998795).abs() < 1e-6);
        assert_eq!(c[2], 0.0);
    }

    #[test]
    fn density_examples() {
        let mut e = vec![0.0; 16];
        e[5] = -0.3;
        assert_eq!(density(&e).unwrap(), 1.0 / 16.0);
        assert_eq!(density(&[0.5; 8]).unwrap(), 1.0);
        let v = example_vector();
        assert!((density(&v.real_parts()).unwrap() - 0.625).abs() < 1e-15);
        assert!(matches!(density(&[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn rho_circuit_of_example_vector() {
        // direct sine evaluation on the 11/32, -10/32, 31/32 grid values
        let a = (0.34375 * FRAC_PI_2).sin();
        let b = (0.3125 * FRAC_PI_2).sin();
        let m = (0.96875 * FRAC_PI_2).sin();
        let ceiling = (2.0 * a * a + 2.0 * b * b + 4.0 * m * m) / 8.0;
        let nearest = (4.0 * a * a + 4.0 * m * m) / 8.0;
        let v = example_vector();
        let r = preprocess(&v, 6).unwrap();
        assert!((r.rho_circuit - ceiling).abs() < 1e-12);
        assert!((r.rho_circuit - 0.620425).abs() < 1e-6);
        let r = preprocess_with(&v, 6, Rounding::Nearest).unwrap();
        assert!((r.rho_circuit - nearest).abs() < 1e-12);
        assert!((r.rho_circuit - 0.63095).abs() < 1e-5);
        assert!((r.rho_exact - 0.625).abs() < 1e-15);
    }

    #[test]
    fn split_real_positive_matches_real_path() {
        let v = normalize_real(&[0.2, 0.9, 0.4, 0.1]).unwrap();
        let split = split_complex(&v, 8).unwrap();
        assert!(split.phase_fractions.iter().all(|&f| f == 0.0));
        let theta = compute_theta(&v).unwrap();
        assert_eq!(split.theta_r, theta);
        assert_eq!(split.b_r, quantize_theta(&theta, 8).unwrap());
    }

    #[test]
    fn split_fixes_global_phase() {
        let s = 0.5f64.sqrt();
        let v = normalize(&[c(0.0, s), c(s, 0.0)]).unwrap();
        let split = split_complex(&v, 6).unwrap();
        assert_eq!(split.phase_fractions[0], 0.0);
        assert!((split.phase_fractions[1] - 0.75).abs() < 1e-15);
        assert_eq!(split.b_phi.codes(), &[0, 48]);

        let v = normalize_real(&[1.0, -1.0]).unwrap();
        let split = split_complex(&v, 6).unwrap();
        assert_eq!(split.phase_fractions, vec![0.0, 0.5]);
        assert!(split.b_r.codes().iter().all(|c| !c.negative));
        assert_eq!(split.theta_r.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn split_rejects_zero() {
        let v = InputVector {
            values: vec![c(0.0, 0.0); 2],
            is_real: true,
            padding: 0,
        };
        assert!(matches!(split_complex(&v, 4), Err(Error::ZeroVector)));
    }

    #[test]
    fn mode_shift_examples() {
        let b = quantize_theta(&compute_theta(&example_vector()).unwrap(), 6).unwrap();
        let shift = compress_mode_shift(&b);
        assert_eq!(shift.mode, 31.0 / 32.0);
        assert_eq!(shift.s(), 4);
        assert_eq!(shift.support, vec![0, 2, 4, 6]);

        let sparse = normalize_real(&[0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.7]).unwrap();
        let b = quantize_theta(&compute_theta(&sparse).unwrap(), 6).unwrap();
        let shift = compress_mode_shift(&b);
        assert_eq!(shift.mode, 0.0);
        assert_eq!(shift.s(), 2);

        let uniform = normalize_real(&[1.0; 4]).unwrap();
        let b = quantize_theta(&compute_theta(&uniform).unwrap(), 6).unwrap();
        assert_eq!(compress_mode_shift(&b).s(), 0);
    }

    #[test]
    fn mode_ties_pick_smallest() {
        let b = BinaryAngleMatrix::from_codes(
            4,
            vec![
                AngleCode {
                    negative: false,
                    magnitude: 3,
                },
                AngleCode {
                    negative: true,
                    magnitude: 2,
                },
                AngleCode {
                    negative: false,
                    magnitude: 3,
                },
                AngleCode {
                    negative: true,
                    magnitude: 2,
                },
            ],
        )
        .unwrap();
        assert_eq!(compress_mode_shift(&b).mode_code, -2);
    }

    #[test]
    fn matrix_json_round_trip() {
        let b = quantize_theta(&compute_theta(&example_vector()).unwrap(), 6).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.starts_with(r#"{"L":6,"rows":[[0,0,1,0,1,1]"#));
        let back: BinaryAngleMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
    }

    fn unit_vectors() -> impl Strategy<Value = Vec<f64>> {
        (1usize..=5).prop_flat_map(|n| {
            prop::collection::vec(-1.0f64..1.0, 1usize << n)
                .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        })
    }

    proptest! {
        #[test]
        fn round_trip_bound(t in -1.0f64..=1.0, l in 2usize..20) {
            let theta = AngleVector::new(vec![t]).unwrap();
            let grid = (-((l - 1) as f64)).exp2();
            for rounding in [Rounding::Ceiling, Rounding::Nearest] {
                let back = dequantize(&quantize_theta_with(&theta, l, rounding).unwrap());
                prop_assert!((back.as_slice()[0] - t).abs() <= grid + 1e-12);
            }
            // nearest rounding is within half a cell away from saturation
            if t.abs() <= 1.0 - grid {
                let back = dequantize(&quantize_theta_with(&theta, l, Rounding::Nearest).unwrap());
                prop_assert!((back.as_slice()[0] - t).abs() <= grid / 2.0 + 1e-12);
            }
        }

        #[test]
        fn density_bounds_and_closed_form(raw in unit_vectors()) {
            let v = normalize_real(&raw).unwrap();
            let rho = density(&v.real_parts()).unwrap();
            let n = v.len() as f64;
            prop_assert!(rho >= 1.0 / n - 1e-12 && rho <= 1.0 + 1e-12);
            let max = v.max_abs();
            prop_assert!((rho - 1.0 / (n * max * max)).abs() < 1e-12);
        }

        #[test]
        fn density_invariant_under_permutation_and_sign(raw in unit_vectors(), seed in any::<u64>()) {
            let rho = density(&raw).unwrap();
            let mut perm = raw.clone();
            perm.reverse();
            let k = (seed as usize) % perm.len();
            perm.rotate_left(k);
            for (i, x) in perm.iter_mut().enumerate() {
                if (seed >> (i % 64)) & 1 == 1 {
                    *x = -*x;
                }
            }
            prop_assert!((density(&perm).unwrap() - rho).abs() < 1e-12);
        }

        #[test]
        fn split_modulus_bits_match_real_path(raw in unit_vectors(), l in 2usize..12) {
            let v = normalize_real(&raw).unwrap();
            let real = quantize_theta(&compute_theta(&v).unwrap(), l).unwrap();
            let split = split_complex(&v, l).unwrap();
            let abs: Vec<f64> = raw.iter().map(|x| x.abs()).collect();
            let pos = quantize_theta(&compute_theta(&normalize_real(&abs).unwrap()).unwrap(), l).unwrap();
            prop_assert_eq!(&split.b_r, &pos);
            if raw.iter().all(|&x| x >= 0.0) {
                prop_assert_eq!(&split.b_r, &real);
            }
        }
    }

    #[test]
    fn density_extremes() {
        assert_eq!(density(&[0.0, -2.0, 0.0, 0.0]).unwrap(), 0.25);
        assert_eq!(density(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 1.0);
    }
}
