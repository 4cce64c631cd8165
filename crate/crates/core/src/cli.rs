//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input or arguments, 3 when an
//! internal invariant breaks. Output goes to `--output` or stdout.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplify::{
    run_amplified_encoding, schedule, success_after, AASchedule, AmplifiedEncoding,
};
use crate::encoder::{
    build_plan, build_plan_with_phases, compare_with_branch, mode_shift_plan, run_branch_sim,
    Checkpoint, DenseOracleReport, EncodingPlan, PlanKind, ReducedOutput,
};
use crate::error::{Error, Result};
use crate::imagery::{
    density_scaling_curve, load_pgm, sector_density, CurveRow, DensityGrid, FitAnchor,
};
use crate::io::{read_vector, to_csv, to_json, Meta};
use crate::preprocess::{
    normalize, preprocess_with, split_complex_with, InputVector, PreprocessResult, Rounding,
};
use crate::qft::run_qft_check;
use crate::randstats::scaling_report;
use crate::resources::{estimate, model_estimate, ResourceEstimate, ResourceRow};

#[derive(Debug, Parser)]
#[command(
    name = "qampenc",
    version,
    about = "Shallow amplitude encoding toolkit"
)]
pub struct Cli {
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, env = "QAMPENC_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundingArg {
    #[default]
    Ceiling,
    Nearest,
}

impl From<RoundingArg> for Rounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::Ceiling => Rounding::Ceiling,
            RoundingArg::Nearest => Rounding::Nearest,
        }
    }
}

/// Output destination. Not part of the recorded config, so the same run
/// written to two paths gives identical bytes.
#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct Output {
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Angles and the binary angle matrix of a vector.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(short = 'L', long = "L", default_value_t = 6)]
        #[serde(rename = "L")]
        precision: usize,
        /// Modulus/phase split for complex input.
        #[arg(long)]
        complex: bool,
        #[arg(long, value_enum, default_value_t)]
        rounding: RoundingArg,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Build the encoder circuit and simulate it.
    Encode {
        #[arg(long)]
        input: PathBuf,
        #[arg(short = 'M', long = "M", default_value_t = 1)]
        #[serde(rename = "M")]
        registers: usize,
        #[arg(short = 'L', long = "L", default_value_t = 6)]
        #[serde(rename = "L")]
        precision: usize,
        #[arg(long)]
        complex: bool,
        #[arg(long, value_enum, default_value_t)]
        rounding: RoundingArg,
        /// Cross-check against gate-by-gate dense simulation.
        #[arg(long)]
        dense_oracle: bool,
        /// Record the per-stage branch states.
        #[arg(long)]
        checkpoints: bool,
        /// Rotate only entries off the most frequent angle.
        #[arg(long)]
        mode_shift: bool,
        /// Also write the gate list in circuit dump format.
        #[arg(long)]
        #[serde(skip)]
        circuit: Option<PathBuf>,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Amplification schedule for a density, or the amplified encoding of a vector.
    Amplify {
        #[arg(long, required_unless_present = "rho")]
        input: Option<PathBuf>,
        #[arg(long, conflicts_with = "input")]
        rho: Option<f64>,
        #[arg(short = 'M', long = "M", default_value_t = 1)]
        #[serde(rename = "M")]
        registers: usize,
        #[arg(short = 'L', long = "L", default_value_t = 8)]
        #[serde(rename = "L")]
        precision: usize,
        #[arg(long, value_enum, default_value_t)]
        rounding: RoundingArg,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Qubit, gate and depth accounting.
    Resources {
        /// Measure an actual circuit for this vector instead of the model grid.
        #[arg(long, conflicts_with = "n")]
        input: Option<PathBuf>,
        /// System qubits (comma separated list).
        #[arg(long, value_delimiter = ',', required_unless_present = "input")]
        n: Vec<usize>,
        #[arg(short = 'M', long = "M", value_delimiter = ',', default_value = "1")]
        #[serde(rename = "M")]
        registers: Vec<usize>,
        #[arg(short = 'L', long = "L", default_value_t = 8)]
        #[serde(rename = "L")]
        precision: usize,
        /// Density for the runtime model; defaults to the typical density
        /// `1 / (2 ln N)` of a random vector.
        #[arg(long)]
        rho: Option<f64>,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Monte Carlo statistics of the infinity-norm share on the sphere.
    SphereStats {
        #[arg(
            long = "N",
            value_delimiter = ',',
            default_value = "64,256,1024,4096,16384"
        )]
        #[serde(rename = "N")]
        lens: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Sector density maps of a PGM image.
    ImageDensity {
        #[arg(long)]
        input: PathBuf,
        /// Sectors per side, ascending (comma separated list).
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        grid: Vec<usize>,
        /// Also write a heat map CSV (n_s, row, col, rho) for every grid.
        #[arg(long)]
        #[serde(skip)]
        heatmap: Option<PathBuf>,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
    /// Encode, apply the QFT and compare with the classical DFT.
    QftCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(short = 'M', long = "M", default_value_t = 1)]
        #[serde(rename = "M")]
        registers: usize,
        #[arg(short = 'L', long = "L", default_value_t = 8)]
        #[serde(rename = "L")]
        precision: usize,
        #[command(flatten)]
        #[serde(flatten)]
        out: Output,
    },
}

impl Command {
    fn out(&self) -> &Output {
        match self {
            Command::Preprocess { out, .. }
            | Command::Encode { out, .. }
            | Command::Amplify { out, .. }
            | Command::Resources { out, .. }
            | Command::SphereStats { out, .. }
            | Command::ImageDensity { out, .. }
            | Command::QftCheck { out, .. } => out,
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Command::SphereStats { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PreprocessOutput {
    Real(Box<PreprocessResult>),
    Complex(Box<crate::preprocess::ComplexSplit>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRow {
    pub k: usize,
    pub theta: f64,
    /// `B` row, sign bit first.
    pub bits: String,
    /// Phase bits, complex input only.
    pub phase_bits: Option<String>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeResult {
    #[serde(rename = "N")]
    pub len: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub registers: usize,
    #[serde(rename = "L")]
    pub precision: usize,
    pub chunks: usize,
    /// Entries rotated (all `N` unless mode-shifted).
    #[serde(rename = "S")]
    pub rotated: usize,
    pub qubits_declared: usize,
    pub qubits_total: usize,
    pub gates: usize,
    pub output: ReducedOutput,
    pub dense_oracle: Option<DenseOracleReport>,
    pub checkpoints: Option<Vec<Checkpoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    pub k: usize,
    pub psi_g_re: f64,
    pub psi_g_im: f64,
    pub psi_b_re: f64,
    pub psi_b_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplifyResult {
    pub schedule: AASchedule,
    pub encoding: Option<AmplifiedEncoding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub step: usize,
    pub success: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageDensityResult {
    pub n_s_list: Vec<usize>,
    pub undefined_sector_count: usize,
    pub fit_anchors: FitAnchor,
    pub curve: Vec<CurveRow>,
    pub grids: Vec<DensityGrid>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub n_s: usize,
    pub row: usize,
    pub col: usize,
    pub rho: Option<f64>,
}

fn load_vector(path: &PathBuf, complex: bool) -> Result<InputVector> {
    let values: Vec<Complex64> = read_vector(&fs::read(path)?)?;
    let v = normalize(&values)?;
    if !complex && !v.is_real() {
        return Err(Error::UseComplexSplit);
    }
    Ok(v)
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 1 { '1' } else { '0' })
        .collect()
}

fn emit<J: Serialize, C: Serialize>(cmd: &Command, json: &J, rows: &[C]) -> Result<String> {
    let meta = Meta::new(cmd, cmd.seed())?;
    match cmd.out().format {
        Format::Json => to_json(meta, json),
        Format::Csv => to_csv(&meta, rows),
    }
}

fn encoding_plan(
    v: &InputVector,
    m: usize,
    precision: usize,
    rounding: Rounding,
    complex: bool,
    shift: bool,
) -> Result<EncodingPlan> {
    if complex {
        if shift {
            return Err(Error::Invalid(
                "mode shift applies to real input only".into(),
            ));
        }
        let split = split_complex_with(v, precision, rounding)?;
        build_plan_with_phases(&split.b_r, m, Some(&split.b_phi))
    } else {
        let pre = preprocess_with(v, precision, rounding)?;
        if shift {
            mode_shift_plan(&pre.b, m)
        } else {
            build_plan(&pre.b, m)
        }
    }
}

/// Run one parsed command and return the text it emits.
pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Preprocess {
            input,
            precision,
            complex,
            rounding,
            ..
        } => {
            let v = load_vector(input, *complex)?;
            let rounding = Rounding::from(*rounding);
            if *complex {
                let split = split_complex_with(&v, *precision, rounding)?;
                let amps = split.target_amplitudes();
                let phase_rows = split.b_phi.bit_rows();
                let rows: Vec<PreprocessRow> = (0..v.len())
                    .map(|k| PreprocessRow {
                        k,
                        theta: split.theta_r.as_slice()[k],
                        bits: bit_string(&split.b_r.row_bits(k)),
                        phase_bits: Some(bit_string(&phase_rows[k])),
                        amplitude: amps[k].norm(),
                    })
                    .collect();
                emit(cmd, &PreprocessOutput::Complex(Box::new(split)), &rows)
            } else {
                let pre = preprocess_with(&v, *precision, rounding)?;
                let rows: Vec<PreprocessRow> = (0..v.len())
                    .map(|k| PreprocessRow {
                        k,
                        theta: pre.theta.as_slice()[k],
                        bits: bit_string(&pre.b.row_bits(k)),
                        phase_bits: None,
                        amplitude: pre.w[k],
                    })
                    .collect();
                emit(cmd, &PreprocessOutput::Real(Box::new(pre)), &rows)
            }
        }
        Command::Encode {
            input,
            registers,
            precision,
            complex,
            rounding,
            dense_oracle,
            checkpoints,
            mode_shift,
            circuit,
            ..
        } => {
            let v = load_vector(input, *complex)?;
            let plan = encoding_plan(
                &v,
                *registers,
                *precision,
                (*rounding).into(),
                *complex,
                *mode_shift,
            )?;
            if let Some(path) = circuit {
                fs::write(path, plan.dump())?;
            }
            let run = run_branch_sim(&plan, *checkpoints)?;
            let oracle = if *dense_oracle {
                Some(compare_with_branch(&plan)?)
            } else {
                None
            };
            let rows: Vec<StateRow> = run
                .output
                .psi_g
                .iter()
                .zip(&run.output.psi_b)
                .enumerate()
                .map(|(k, (g, b))| StateRow {
                    k,
                    psi_g_re: g.re,
                    psi_g_im: g.im,
                    psi_b_re: b.re,
                    psi_b_im: b.im,
                })
                .collect();
            let result = EncodeResult {
                len: plan.len,
                n: plan.n,
                registers: plan.m,
                precision: plan.precision,
                chunks: plan.chunk_count(),
                rotated: match &plan.kind {
                    PlanKind::Full => plan.len,
                    PlanKind::ModeShift { support, .. } => support.len(),
                },
                qubits_declared: plan.layout.declared(),
                qubits_total: plan.layout.total,
                gates: plan.gates().count(),
                output: run.output,
                dense_oracle: oracle,
                checkpoints: checkpoints.then_some(run.checkpoints),
            };
            emit(cmd, &result, &rows)
        }
        Command::Amplify {
            input,
            rho,
            registers,
            precision,
            rounding,
            ..
        } => {
            let (sched, encoding) = match (input, rho) {
                (Some(path), _) => {
                    let v = load_vector(path, false)?;
                    let plan = encoding_plan(
                        &v,
                        *registers,
                        *precision,
                        (*rounding).into(),
                        false,
                        false,
                    )?;
                    let enc = run_amplified_encoding(&plan)?;
                    (schedule(enc.rho)?, Some(enc))
                }
                (None, Some(rho)) => (schedule(*rho)?, None),
                (None, None) => return Err(Error::Invalid("need --input or --rho".into())),
            };
            let rows: Vec<SuccessRow> = (0..=sched.m)
                .map(|step| SuccessRow {
                    step,
                    success: success_after(sched.theta_a, step),
                })
                .collect();
            emit(
                cmd,
                &AmplifyResult {
                    schedule: sched,
                    encoding,
                },
                &rows,
            )
        }
        Command::Resources {
            input,
            n,
            registers,
            precision,
            rho,
            ..
        } => {
            let estimates: Vec<ResourceEstimate> = if let Some(path) = input {
                let v = load_vector(path, false)?;
                let pre = preprocess_with(&v, *precision, Rounding::default())?;
                registers
                    .iter()
                    .map(|&m| estimate(&build_plan(&pre.b, m)?, rho.unwrap_or(pre.rho_circuit)))
                    .collect::<Result<_>>()?
            } else {
                let mut out = Vec::new();
                for &n in n {
                    for &m in registers {
                        let len = (1usize << n.min(62)) as f64;
                        let typical = if n == 0 {
                            1.0
                        } else {
                            1.0 / (2.0 * len.ln()).max(1.0)
                        };
                        out.push(model_estimate(n, m, *precision, rho.unwrap_or(typical))?);
                    }
                }
                out
            };
            let rows: Vec<ResourceRow> = estimates.iter().map(ResourceRow::from).collect();
            emit(cmd, &estimates, &rows)
        }
        Command::SphereStats {
            lens, count, seed, ..
        } => {
            let rows = scaling_report(lens, *count, *seed)?;
            emit(cmd, &rows, &rows)
        }
        Command::ImageDensity {
            input,
            grid,
            heatmap,
            ..
        } => {
            let img = load_pgm(&fs::read(input)?)?;
            let curve = density_scaling_curve(&img, grid)?;
            let grids = grid
                .iter()
                .map(|&n_s| sector_density(&img, n_s))
                .collect::<Result<Vec<_>>>()?;
            if let Some(path) = heatmap {
                let cells: Vec<HeatmapRow> = grids
                    .iter()
                    .flat_map(|g| {
                        (0..g.n_s * g.n_s).map(move |i| HeatmapRow {
                            n_s: g.n_s,
                            row: i / g.n_s,
                            col: i % g.n_s,
                            rho: g.rho[i],
                        })
                    })
                    .collect();
                fs::write(path, to_csv(&Meta::new(cmd, None)?, &cells)?)?;
            }
            let result = ImageDensityResult {
                n_s_list: grid.clone(),
                undefined_sector_count: curve.undefined_sector_count,
                fit_anchors: curve.anchor,
                curve: curve.rows,
                grids,
            };
            emit(cmd, &result, &result.curve)
        }
        Command::QftCheck {
            input,
            registers,
            precision,
            ..
        } => {
            let v = load_vector(input, true)?;
            let report = run_qft_check(&v, *registers, *precision)?;
            emit(cmd, &report, std::slice::from_ref(&report))
        }
    }
}

fn run_parsed(cli: &Cli) -> Result<()> {
    let text = match cli.threads {
        Some(0) => return Err(Error::Invalid("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(|| execute(&cli.command))?,
        None => execute(&cli.command)?,
    };
    match &cli.command.out().output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_parsed(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}
