use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "proxlasso", version, about = "Sparse regression with jointly estimated per-coefficient penalty weights")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write a JSON report.
    Fit(FitArgs),
    /// Fit over a grid of tau values and write the coefficient path as CSV.
    Path(PathArgs),
    /// Generate a synthetic dataset with a known sparse truth.
    Simulate(SimulateArgs),
    /// Compare analytic likelihood and prior gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Tabulate the reduced proximal operator over (lam0, |beta0|/s) for a fixed b.
    ProxTable(ProxTableArgs),
    /// Tabulate the profiled penalty g and its derivatives against |beta|.
    PenaltyProfile(PenaltyProfileArgs),
}

/// Settings shared by `fit` and `path`. Every value may also come from the
/// `--config` file; a flag given here wins.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// TOML run configuration (sections: design, family, penalty, prior, optimizer, path).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Headered numeric CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response column name [default: y].
    #[arg(long)]
    pub response: Option<String>,
    /// gaussian, bernoulli_logit, poisson_log, negbin_log or cauchy [default: gaussian].
    #[arg(long)]
    pub family: Option<String>,
    /// Gaussian sigma, negative binomial starting alpha or Cauchy scale [default: 1].
    #[arg(long)]
    pub family_param: Option<f64>,
    /// independent, sparse_group or overlapping_group [default: independent, or sparse_group when groups are given].
    #[arg(long)]
    pub prior: Option<String>,
    /// Group file of `predictor_index,group_index` rows, 0-based. Second-order
    /// designs default to the pair groups.
    #[arg(long)]
    pub groups: Option<PathBuf>,
    /// Expand the design to squares and pairwise interactions.
    #[arg(long)]
    pub second_order: bool,
    /// Keep the raw columns instead of standardizing them.
    #[arg(long)]
    pub no_standardize: bool,
    /// Fit without an intercept.
    #[arg(long)]
    pub no_intercept: bool,
    /// full, svrg or bcd [default: full].
    #[arg(long)]
    pub mode: Option<String>,
    /// Seed for holdout splits and minibatches [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Base step size [default: 0.01].
    #[arg(long)]
    pub step: Option<f64>,
    /// Minibatch size for svrg [default: 256].
    #[arg(long)]
    pub minibatch: Option<usize>,
    /// Iterations without improvement before stopping [default: 500].
    #[arg(long)]
    pub patience: Option<usize>,
    /// Rows held out for early stopping, 0 to disable [default: min(1000, N/10)].
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Iteration cap [default: 10000].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Inner iterations per svrg anchor [default: one pass over the rows].
    #[arg(long)]
    pub epoch_len: Option<usize>,
    /// Epsilon of the reweighting in bcd mode [default: 0.001].
    #[arg(long)]
    pub bcd_eps: Option<f64>,
    /// Progress line to stderr every this many iterations, 0 for none [default: 0].
    #[arg(long)]
    pub progress_every: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Penalty scale; a trailing N multiplies by the row count, e.g. 0.025N [default: 0.025N].
    #[arg(long)]
    pub tau: Option<String>,
    /// Report path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated tau values or `log:START:END:COUNT`; N suffixes allowed
    /// [default: log:N:0.001N:30].
    #[arg(long)]
    pub tau_grid: Option<String>,
    /// Fit each grid point from the default start instead of the previous solution.
    #[arg(long)]
    pub cold: bool,
    /// Odd window of the rolling median used by --smoothed [default: 5].
    #[arg(long)]
    pub median_window: Option<usize>,
    /// Fraction of rows used to score each tau [default: 0.5].
    #[arg(long)]
    pub holdout_fraction: Option<f64>,
    /// Write rolling-median smoothed coefficients.
    #[arg(long)]
    pub smoothed: bool,
    /// Path CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Response family [default: gaussian].
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// Gaussian sigma, negative binomial alpha or Cauchy scale [default: 1].
    #[arg(long)]
    pub family_param: Option<f64>,
    /// independent, group or hierarchical.
    #[arg(long, default_value = "independent")]
    pub structure: String,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Predictors (base predictors for hierarchical).
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Active coefficients, or active groups for the grouped structures.
    #[arg(long, default_value_t = 10)]
    pub n_active: usize,
    #[arg(long, default_value_t = 5)]
    pub group_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV; the truth goes to `<stem>.truth.json` and groups to `<stem>.groups.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Random instances per family and per prior.
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Restrict to one family.
    #[arg(long)]
    pub family: Option<String>,
    /// Restrict to one prior.
    #[arg(long)]
    pub prior: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest acceptable relative error.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Report path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProxTableArgs {
    /// Product of the two step sizes, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
    /// lam0 axis as START:END:COUNT.
    #[arg(long, default_value = "0:3:61")]
    pub lam0: String,
    /// |beta0|/s axis as START:END:COUNT.
    #[arg(long, default_value = "0:3:61")]
    pub aa: String,
    /// CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PenaltyProfileArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// half_cauchy, or exponential with --rate.
    #[arg(long, default_value = "half_cauchy")]
    pub rho: String,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Largest |beta|.
    #[arg(long, default_value_t = 10.0)]
    pub max: f64,
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}
