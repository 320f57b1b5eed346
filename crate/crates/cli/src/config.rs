//! TOML run configuration and its merge with command-line flags.

use std::path::{Path, PathBuf};

use proxlasso_core::design::hierarchical_groups;
use proxlasso_core::{load_csv, Dataset, DesignSpec, Family, FamilyKind, GroupStructure, Mode, OptimizerConfig};
use proxlasso_core::{PathConfig, PriorKind, PriorSpec};
use serde::Deserialize;

use crate::args::{ModelArgs, PathArgs};
use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub design: DesignSection,
    pub family: FamilySection,
    pub penalty: PenaltySection,
    pub prior: PriorSection,
    pub optimizer: OptimizerSection,
    pub path: PathSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSection {
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub standardize: Option<bool>,
    pub intercept: Option<bool>,
    pub second_order: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilySection {
    pub kind: Option<String>,
    pub param: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltySection {
    pub tau: Option<TauValue>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    pub kind: Option<String>,
    pub groups: Option<PathBuf>,
    pub group_scale: Option<f64>,
    pub softmax_temp: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub step: Option<f64>,
    pub minibatch: Option<usize>,
    pub patience: Option<usize>,
    pub holdout: Option<usize>,
    pub max_iters: Option<usize>,
    pub adam_beta1: Option<f64>,
    pub adam_beta2: Option<f64>,
    pub adam_eps: Option<f64>,
    pub epoch_len: Option<usize>,
    pub bcd_eps: Option<f64>,
    pub progress_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathSection {
    pub tau_grid: Option<GridValue>,
    pub warm_start: Option<bool>,
    pub reset_gamma: Option<bool>,
    pub median_window: Option<usize>,
    pub holdout_fraction: Option<f64>,
}

/// A τ value: a number, or a string such as `"0.025N"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TauValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    List(Vec<TauValue>),
    Text(String),
}

impl TauValue {
    pub fn resolve(&self, n_obs: usize) -> Result<f64, CliError> {
        match self {
            TauValue::Number(v) => Ok(*v),
            TauValue::Text(s) => parse_tau(s, n_obs),
        }
    }
}

impl GridValue {
    pub fn resolve(&self, n_obs: usize) -> Result<Vec<f64>, CliError> {
        match self {
            GridValue::List(v) => v.iter().map(|t| t.resolve(n_obs)).collect(),
            GridValue::Text(s) => parse_grid(s, n_obs),
        }
    }
}

impl RunConfig {
    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.design.data, &mut cfg.prior.groups].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn from_args(args: &ModelArgs) -> Result<Self, CliError> {
        match &args.config {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }
}

/// `"250"`, `"0.025N"` or `"N"`.
pub fn parse_tau(s: &str, n_obs: usize) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::config(format!("cannot parse tau '{s}'"));
    let v = match s.strip_suffix(['N', 'n']) {
        Some("") => n_obs as f64,
        Some(c) => c.trim().parse::<f64>().map_err(|_| bad())? * n_obs as f64,
        None => s.parse::<f64>().map_err(|_| bad())?,
    };
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(format!("tau must be positive and finite, got '{s}'")));
    }
    Ok(v)
}

/// Comma-separated values or `log:START:END:COUNT`.
pub fn parse_grid(s: &str, n_obs: usize) -> Result<Vec<f64>, CliError> {
    if let Some(rest) = s.trim().strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::config(format!("expected log:START:END:COUNT, got '{s}'")));
        }
        let (a, b) = (parse_tau(parts[0], n_obs)?, parse_tau(parts[1], n_obs)?);
        let k: usize = parts[2].trim().parse().map_err(|_| CliError::config(format!("bad grid count in '{s}'")))?;
        if k == 0 {
            return Err(CliError::config("grid count must be positive"));
        }
        return Ok(proxlasso_core::path::log_grid(a, b, k));
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_tau(t, n_obs)).collect()
}

/// `START:END:COUNT`, evenly spaced and inclusive.
pub fn parse_axis(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("expected START:END:COUNT, got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if k == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if k == 1 {
        return Ok(vec![a]);
    }
    Ok((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect())
}

pub fn family_from(name: &str, param: Option<f64>) -> Result<Family, CliError> {
    let kind: FamilyKind = name.parse()?;
    let fam = match (kind.default_family(), param) {
        (f, None) => f,
        (Family::Gaussian { .. }, Some(v)) => Family::Gaussian { sigma: v },
        (Family::NegbinLog { .. }, Some(v)) => Family::NegbinLog { alpha: v },
        (Family::Cauchy { .. }, Some(v)) => Family::Cauchy { scale: v },
        (f, Some(_)) => return Err(CliError::config(format!("{} takes no family parameter", f.kind().name()))),
    };
    fam.validate()?;
    Ok(fam)
}

/// Everything a fit needs, resolved from the config file and flags.
#[derive(Debug)]
pub struct Setup {
    pub dataset: Dataset,
    pub family: Family,
    pub spec: PriorSpec,
    pub opt: OptimizerConfig,
}

pub fn setup(args: &ModelArgs, cfg: &RunConfig) -> Result<Setup, CliError> {
    let d = &cfg.design;
    let data = args.data.clone().or_else(|| d.data.clone()).ok_or_else(|| CliError::config("no data file given (--data)"))?;
    let mut ds_spec = DesignSpec::new(data, args.response.clone().or_else(|| d.response.clone()).unwrap_or_else(|| "y".into()));
    ds_spec.standardize = !args.no_standardize && d.standardize.unwrap_or(true);
    ds_spec.intercept = !args.no_intercept && d.intercept.unwrap_or(true);
    ds_spec.second_order = args.second_order || d.second_order.unwrap_or(false);

    let f = &cfg.family;
    let family = family_from(
        args.family.as_deref().or(f.kind.as_deref()).unwrap_or("gaussian"),
        args.family_param.or(f.param),
    )?;
    let opt = optimizer_config(args, &cfg.optimizer)?;
    let dataset = load_csv(&ds_spec).map_err(|e| match e {
        proxlasso_core::Error::Io(e) => CliError::Data(format!("{}: {e}", ds_spec.source.display())),
        proxlasso_core::Error::Csv(e) => CliError::Data(format!("{}: {e}", ds_spec.source.display())),
        e => e.into(),
    })?;
    let spec = prior_spec(args, &cfg.prior, &dataset, ds_spec.second_order)?;
    Ok(Setup { dataset, family, spec, opt })
}

fn optimizer_config(args: &ModelArgs, o: &OptimizerSection) -> Result<OptimizerConfig, CliError> {
    let d = OptimizerConfig::default();
    let mode = match args.mode.as_deref().or(o.mode.as_deref()) {
        Some(m) => m.parse::<Mode>()?,
        None => d.mode,
    };
    let opt = OptimizerConfig {
        step: args.step.or(o.step).unwrap_or(d.step),
        minibatch: args.minibatch.or(o.minibatch).unwrap_or(d.minibatch),
        patience: args.patience.or(o.patience).unwrap_or(d.patience),
        holdout: args.holdout.or(o.holdout).or(d.holdout),
        max_iters: args.max_iters.or(o.max_iters).unwrap_or(d.max_iters),
        mode,
        seed: args.seed.or(o.seed).unwrap_or(d.seed),
        adam_beta1: o.adam_beta1.unwrap_or(d.adam_beta1),
        adam_beta2: o.adam_beta2.unwrap_or(d.adam_beta2),
        adam_eps: o.adam_eps.unwrap_or(d.adam_eps),
        epoch_len: args.epoch_len.or(o.epoch_len).or(d.epoch_len),
        bcd_eps: args.bcd_eps.or(o.bcd_eps).unwrap_or(d.bcd_eps),
        progress_every: args.progress_every.or(o.progress_every).unwrap_or(d.progress_every),
    };
    opt.validate()?;
    Ok(opt)
}

fn prior_spec(args: &ModelArgs, p: &PriorSection, ds: &Dataset, second_order: bool) -> Result<PriorSpec, CliError> {
    let groups_file = args.groups.clone().or_else(|| p.groups.clone());
    let kind = match args.prior.as_deref().or(p.kind.as_deref()) {
        Some(k) => k.parse::<PriorKind>()?,
        None if groups_file.is_some() => PriorKind::SparseGroup,
        None => PriorKind::IndependentHalfCauchy,
    };
    if kind == PriorKind::IndependentHalfCauchy {
        return Ok(PriorSpec::independent());
    }
    let groups = match groups_file {
        Some(f) => GroupStructure::read_csv(f, ds.n_pred())?,
        None if second_order => hierarchical_groups(ds.base().ncols())?,
        None => return Err(CliError::config(format!("{} prior needs a group file (--groups)", kind.name()))),
    };
    let mut spec = PriorSpec::grouped(kind, groups, ds.n_obs())?;
    if let Some(s) = p.group_scale {
        spec.group_scale = s;
    }
    if let Some(t) = p.softmax_temp {
        spec.softmax_temp = t;
    }
    spec.validate(ds.n_pred())?;
    Ok(spec)
}

pub fn path_config(args: &PathArgs, p: &PathSection, n_obs: usize) -> Result<PathConfig, CliError> {
    let grid = match (&args.tau_grid, &p.tau_grid) {
        (Some(s), _) => parse_grid(s, n_obs)?,
        (None, Some(g)) => g.resolve(n_obs)?,
        (None, None) => PathConfig::default_grid(n_obs),
    };
    let d = PathConfig::new(grid);
    let cfg = PathConfig {
        warm_start: !args.cold && p.warm_start.unwrap_or(d.warm_start),
        reset_gamma: p.reset_gamma.unwrap_or(d.reset_gamma),
        median_window: args.median_window.or(p.median_window).unwrap_or(d.median_window),
        holdout_fraction: args.holdout_fraction.or(p.holdout_fraction).unwrap_or(d.holdout_fraction),
        tau_grid: d.tau_grid,
    };
    cfg.validate()?;
    Ok(cfg)
}
