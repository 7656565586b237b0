//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{DEFAULT_PRECISION_BITS, PRECISION_ENV};
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "opx", version, about = "Orthogonal polynomial, random matrix and discrete Painlevé computations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Working precision for multiprecision stages.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION_BITS)]
    pub precision_bits: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format; csv unless the command says otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Append wall time to the report.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
    /// Worker threads for Monte Carlo commands.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moments m_0..m_{count-1} of a classical weight.
    #[command(allow_negative_numbers = true)]
    Moments(MomentsArgs),
    /// Recurrence coefficients a_n², b_n from moments.
    #[command(allow_negative_numbers = true)]
    Recurrence(RecurrenceArgs),
    /// Christoffel–Darboux kernel, closed and summed forms.
    #[command(allow_negative_numbers = true)]
    Kernel(KernelArgs),
    /// Gap probability det(I - K) on an interval.
    #[command(allow_negative_numbers = true)]
    Gap(GapArgs),
    /// Random matrix ensembles.
    #[command(subcommand)]
    Rmt(RmtCommand),
    /// Multiple orthogonal polynomials of a classical family.
    #[command(allow_negative_numbers = true)]
    Mop(MopArgs),
    /// Positive solution of d-PI.
    #[command(allow_negative_numbers = true)]
    Dp1(Dp1Args),
    /// Verblunsky coefficients of e^{t cos θ} and their d-PII residuals.
    #[command(allow_negative_numbers = true)]
    Dp2(Dp2Args),
    /// Lattice flow of recurrence coefficients.
    #[command(allow_negative_numbers = true)]
    Lattice(LatticeArgs),
    /// Painlevé differential equation residual.
    #[command(allow_negative_numbers = true)]
    Ode(OdeArgs),
    /// Singularity confinement probe for d-PI.
    #[command(allow_negative_numbers = true)]
    Probe(ProbeArgs),
    /// Wronskian route to recurrence coefficients.
    #[command(allow_negative_numbers = true)]
    Wronskian(WronskianArgs),
    /// Discrete Painlevé system residuals of a semiclassical family.
    #[command(allow_negative_numbers = true)]
    System(SystemArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Recurrence(_) => "recurrence",
            Command::Kernel(_) => "kernel",
            Command::Gap(_) => "gap",
            Command::Rmt(RmtCommand::AvgChar(_)) => "rmt avg-char",
            Command::Rmt(RmtCommand::EigenStats(_)) => "rmt eigen-stats",
            Command::Mop(_) => "mop",
            Command::Dp1(_) => "dp1",
            Command::Dp2(_) => "dp2",
            Command::Lattice(_) => "lattice",
            Command::Ode(_) => "ode",
            Command::Probe(_) => "probe",
            Command::Wronskian(_) => "wronskian",
            Command::System(_) => "system",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Ode(_) | Command::Probe(_) | Command::Wronskian(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum RmtCommand {
    /// Monte Carlo average characteristic polynomial against its prediction.
    #[command(allow_negative_numbers = true)]
    AvgChar(AvgCharArgs),
    /// Eigenvalue histogram against the one-point density.
    #[command(allow_negative_numbers = true)]
    EigenStats(EigenStatsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    Hermite,
    Laguerre,
    Jacobi,
    Freud,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interval {
    Unit,
    Symmetric,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightArgs {
    #[arg(long, value_enum, default_value_t = WeightFamily::Hermite)]
    pub family: WeightFamily,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Freud deformation parameter.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Jacobi interval.
    #[arg(long, value_enum, default_value_t = Interval::Symmetric)]
    pub interval: Interval,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Integrate numerically instead of using closed forms.
    #[arg(long)]
    pub quadrature: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelModeArg {
    Plain,
    Weighted,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub x: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y: f64,
    #[arg(long, value_enum, default_value_t = KernelModeArg::Plain)]
    pub mode: KernelModeArg,
}

#[derive(Debug, Args, Serialize)]
pub struct GapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 6.0)]
    pub b: f64,
    /// Starting Gauss–Legendre order; doubled until converged.
    #[arg(long, default_value_t = 16)]
    pub order: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Gue,
    Wigner,
    Wishart,
    TruncatedUnitary,
    ExternalSource,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, default_value_t = EnsembleKind::Gue)]
    pub ensemble: EnsembleKind,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Wishart columns or truncated-unitary rows; defaults to n.
    #[arg(long)]
    pub m: Option<usize>,
    /// Truncation depth of the truncated unitary ensemble.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// External source eigenvalues.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AvgCharArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct EigenStatsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = -2.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 2.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MopFamilyKind {
    MultipleHermite,
    MultipleLaguerre1,
    MultipleLaguerre2,
    JacobiPineiro,
}

#[derive(Debug, Args, Serialize)]
pub struct MopArgs {
    #[arg(long, value_enum, default_value_t = MopFamilyKind::MultipleHermite)]
    pub family: MopFamilyKind,
    /// Per-weight shifts or scales; family default when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Vec<f64>,
    /// Per-weight exponents, or the shared exponent for multiple Laguerre II.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,2")]
    pub index: Vec<usize>,
    /// Moments per weight; 2|n| + 8 when omitted.
    #[arg(long)]
    pub moments: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct Dp1Args {
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Dp2Args {
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 15)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemiKind {
    Freud,
    GenCharlier,
    GenMeixner,
    ChenIts,
    Bce,
    OpucBessel,
    ExpLaguerre,
}

#[derive(Debug, Args, Serialize)]
pub struct SemiArgs {
    #[arg(long, value_enum, default_value_t = SemiKind::Freud)]
    pub family: SemiKind,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeKind {
    Toda,
    Langmuir,
    AblowitzLadik,
}

#[derive(Debug, Args, Serialize)]
pub struct LatticeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: SemiArgs,
    #[arg(long, value_enum, default_value_t = LatticeKind::Langmuir)]
    pub lattice: LatticeKind,
    /// Time span t0,t1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0.5")]
    pub span: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityKind {
    P4Freud,
    P5Charlier,
    P5Opuc,
    P3ChenIts,
    P5Bce,
}

#[derive(Debug, Args, Serialize)]
pub struct OdeArgs {
    #[arg(long, value_enum, default_value_t = QuantityKind::P4Freud)]
    pub quantity: QuantityKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Deformation parameter; c for p5-charlier.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub x_prev: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Gaussian,
    Laguerre,
    Freud,
}

#[derive(Debug, Args, Serialize)]
pub struct WronskianArgs {
    #[arg(long, value_enum, default_value_t = BaseKind::Gaussian)]
    pub base: BaseKind,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0.015625)]
    pub h: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SystemArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: SemiArgs,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
}
