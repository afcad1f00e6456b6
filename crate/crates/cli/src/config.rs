use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Everything a run depends on. Serialized verbatim into every JSON
/// artifact, so reruns with an identical config reproduce the outputs.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "frasian", version, about = "Bayesian procedures with frequentist guarantees")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Level of the region, band or test.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub alpha: f64,

    /// Master seed for every stochastic step.
    #[arg(long, global = true, env = "FRASIAN_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Monte Carlo replicates (simulate only); each preset has its own default.
    #[arg(long, global = true)]
    pub reps: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long, global = true, env = "FRASIAN_OUT_DIR", default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Frequentized and Bayes prediction regions for the next observation.
    Predict(PredictArgs),
    /// DKW or Dirichlet-process posterior band for a CDF.
    Bands(BandsArgs),
    /// Weighted Bonferroni on a vector of p-values.
    Mtest(MtestArgs),
    /// Seeded Monte Carlo presets.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    /// Inline comma-separated sample, e.g. "0.1,-0.3".
    #[arg(long, conflicts_with = "sample_file", allow_hyphen_values = true)]
    pub sample: Option<String>,

    /// CSV file with a `y` column.
    #[arg(long)]
    pub sample_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub prior_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub prior_var: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_var: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[command(flatten)]
    pub model: ModelArgs,

    /// Grid overrides; unset bounds come from the default grid.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub grid_hi: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,

    /// Count the candidate point itself in the conformal rank.
    #[arg(long)]
    pub self_inclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandMethodArg {
    Dkw,
    Dp,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DpArgs {
    /// DP concentration; required for `--method dp`.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub base_mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub base_var: f64,
    /// Posterior draws behind the band radius.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Stick-breaking truncation level.
    #[arg(long, default_value_t = 1000)]
    pub truncation: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BandsArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = BandMethodArg::Dkw)]
    pub method: BandMethodArg,
    #[command(flatten)]
    pub dp: DpArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MtestArgs {
    /// CSV file with a `pvalue` column.
    #[arg(long)]
    pub pvalues: PathBuf,
    /// CSV file with a `weight` column.
    #[arg(long, conflicts_with = "means")]
    pub weights: Option<PathBuf>,
    /// CSV file with a `theta` column; weights become the optimal ones.
    #[arg(long)]
    pub means: Option<PathBuf>,
    /// Reject when `p_j / w_j <= alpha / m` instead of `p_j <= alpha * w_j`.
    #[arg(long)]
    pub literal_rule: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Region lengths for n=2 under theta=0 and theta=5.
    Fig1,
    /// Coverage of the frequentized and Bayes regions.
    ConformalCoverage,
    /// DKW vs DP band coverage with the truth shifted away from the base.
    DpCoverage,
    /// Familywise error of weighted Bonferroni.
    Fwer,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub dp: DpArgs,

    /// True mean of the data (conformal-coverage) or of the shifted truth (dp-coverage).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Sample size per replicate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Weights for the fwer preset; uniform over 100 nulls when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub literal_rule: bool,
}
