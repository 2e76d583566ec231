//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Parser)]
#[command(name = "lfam", version, about = "Moments, large-sieve quantities and zeros for families of Dirichlet L-functions")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GlobalArgs {
    /// Key-value file (`key = value` per line) supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit wall-clock time so reports are byte-reproducible.
    #[arg(long = "no-timing", global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "command")]
pub enum Command {
    /// Characters of one modulus, or the family O_j(Q).
    Characters(CharactersArgs),
    /// L(s, χ) by the Hurwitz oracle and the approximate functional equation.
    Eval(EvalArgs),
    /// Family moments at a fixed height, integrated, or over well-spaced sets.
    Moment(MomentArgs),
    /// Integral of |ζ(½ + it)|² over [0, T].
    Hl(HlArgs),
    /// Large-sieve left-hand sides against Δ_j.
    Sieve(SieveArgs),
    /// Gallagher's inequality for L(½ + it, χ) or a random Dirichlet polynomial.
    Gallagher(GallagherArgs),
    /// Mean-value comparisons over random well-spaced point sets.
    Meanvalue(MeanValueArgs),
    /// Zero counts by the argument principle, or critical-line zeros.
    Zeros(ZerosArgs),
    /// Mollified zero detector at critical-line zeros.
    Detector(DetectorArgs),
    /// Zero-density bound formulas.
    Zdbounds(ZdBoundsArgs),
    /// Integrated moments on a (Q, T) grid with an exponent fit.
    Scaling(ScalingArgs),
    /// Square-part decomposition comparison at one height.
    #[command(name = "lemma31")]
    #[serde(rename = "lemma31")]
    SquarePart(SquarePartArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CharacterArgs {
    /// Modulus.
    #[arg(long)]
    pub q: u64,
    /// Exponents over the unit-group generators, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub chi: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CharactersArgs {
    #[arg(long)]
    pub order: Option<u64>,
    #[arg(long = "Q")]
    pub q_param: Option<f64>,
    /// List every character of this modulus instead of a family.
    #[arg(long)]
    pub q: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    Oracle,
    Afe,
    Both,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub character: CharacterArgs,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = EvalMethod::Both)]
    pub method: EvalMethod,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMode {
    FixedT,
    Integrated,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Grid,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MomentArgs {
    #[arg(long, value_enum, default_value_t = MomentMode::Integrated)]
    pub mode: MomentMode,
    #[arg(long)]
    pub order: u64,
    #[arg(long = "Q")]
    pub q_param: f64,
    /// Half-lengths; several values give nested integrated runs.
    #[arg(long = "T", value_delimiter = ',', num_args = 1.., default_value = "10")]
    pub t_max: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Strategy::Greedy)]
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HlArgs {
    #[arg(long = "T", value_delimiter = ',', num_args = 1.., default_value = "200")]
    pub t_max: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SieveModeArg {
    Discrete,
    Integrated,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SieveArgs {
    #[arg(long, value_enum, default_value_t = SieveModeArg::Integrated)]
    pub mode: SieveModeArg,
    #[arg(long)]
    pub order: u64,
    #[arg(long = "Q")]
    pub q_param: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_max: f64,
    #[arg(long = "N")]
    pub n_param: f64,
    /// Random coefficient vectors, seeded `seed, seed + 1, …`.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GallagherTarget {
    L,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GallagherArgs {
    #[command(flatten)]
    pub character: CharacterArgs,
    #[arg(long = "T")]
    pub t_max: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = Strategy::Greedy)]
    pub strategy: Strategy,
    #[arg(long, value_enum, default_value_t = GallagherTarget::L)]
    pub function: GallagherTarget,
    /// Length of the random polynomial for `--function poly`.
    #[arg(long = "N", default_value_t = 30.0)]
    pub n_param: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MeanValueArgs {
    #[arg(long)]
    pub order: u64,
    #[arg(long = "Q")]
    pub q_param: f64,
    #[arg(long = "T")]
    pub t_max: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long = "N")]
    pub n_param: f64,
    #[arg(long, default_value_t = 0.6)]
    pub sigma0: f64,
    /// Points per character.
    #[arg(long, default_value_t = 5)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZerosMode {
    Count,
    List,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ZerosArgs {
    #[arg(long, value_enum, default_value_t = ZerosMode::Count)]
    pub mode: ZerosMode,
    /// Single character (with `--chi`); otherwise `--order` and `--Q` select a family.
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub chi: Vec<u64>,
    #[arg(long)]
    pub order: Option<u64>,
    #[arg(long = "Q")]
    pub q_param: Option<f64>,
    #[arg(long, default_value_t = 0.55)]
    pub sigma: f64,
    #[arg(long = "T", default_value_t = 20.0)]
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DetectorArgs {
    #[command(flatten)]
    pub character: CharacterArgs,
    /// Zeros are taken from (0, T].
    #[arg(long = "T", default_value_t = 30.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 3)]
    pub zeros: usize,
    #[arg(long = "X", default_value_t = 10.0)]
    pub x: f64,
    #[arg(long = "Y", default_value_t = 30.0)]
    pub y: f64,
    #[arg(long = "C", default_value_t = 2.0)]
    pub c: f64,
    /// Keep only zeros spaced by at least `3 C' log(qT)` with this `C'`; 0 disables.
    #[arg(long = "spacing-C", default_value_t = 1.0)]
    pub spacing_c: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ZdBoundsArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long = "Q")]
    pub q_param: f64,
    #[arg(long = "T")]
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScalingArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "2")]
    pub order: Vec<u64>,
    #[arg(long = "Q", value_delimiter = ',', num_args = 1.., default_value = "10,20,40")]
    pub q_values: Vec<f64>,
    #[arg(long = "T", value_delimiter = ',', num_args = 1.., default_value = "10,20,40")]
    pub t_values: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SquarePartArgs {
    #[arg(long)]
    pub order: u64,
    #[arg(long = "Q")]
    pub q_param: f64,
    #[arg(long = "T")]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub epsilon: f64,
}
