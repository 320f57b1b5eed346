//! Warm-started fits over a grid of τ values with held-out selection.

use std::path::Path;

use ndarray::Array2;

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::model::data_term;
use crate::objective::PenaltyConfig;
use crate::optimizer::engine::split_rows;
use crate::optimizer::{fit_with_mode, ConvergedReason, OptimizerConfig, ParamState};
use crate::prior::PriorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    /// Strictly monotone, positive.
    pub tau_grid: Vec<f64>,
    pub warm_start: bool,
    /// Reset group parameters γ to 1 before each warm-started fit.
    pub reset_gamma: bool,
    /// Odd window for the coefficient smoothing (presentation only).
    pub median_window: usize,
    /// Fraction of rows held out for selecting τ.
    pub holdout_fraction: f64,
}

impl PathConfig {
    pub fn new(tau_grid: Vec<f64>) -> Self {
        Self { tau_grid, warm_start: true, reset_gamma: true, median_window: 5, holdout_fraction: 0.5 }
    }

    /// 30 log-spaced points from `N` down to `1e-3·N`, so warm starts run
    /// from the sparse end.
    pub fn default_grid(n_obs: usize) -> Vec<f64> {
        let mut g = log_grid(1e-3 * n_obs as f64, n_obs as f64, 30);
        g.reverse();
        g
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.tau_grid;
        if g.is_empty() {
            return Err(Error::config("tau grid is empty"));
        }
        if g.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::config("tau grid values must be positive and finite"));
        }
        let inc = g.windows(2).all(|w| w[1] > w[0]);
        let dec = g.windows(2).all(|w| w[1] < w[0]);
        if !(inc || dec) {
            return Err(Error::config("tau grid must be strictly monotone"));
        }
        if self.median_window == 0 || self.median_window.is_multiple_of(2) {
            return Err(Error::config(format!("median window must be odd, got {}", self.median_window)));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::config("holdout fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub tau: f64,
    pub iterations: usize,
    pub converged_reason: Option<ConvergedReason>,
    pub nonzeros: usize,
    pub train_nll: f64,
    pub heldout_nll: f64,
    /// Error message when the fit at this τ failed; the next point starts cold.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub points: Vec<PathPoint>,
    /// τ × P; rows of failed fits are NaN.
    pub coefficients: Array2<f64>,
    pub smoothed: Array2<f64>,
    pub intercepts: Vec<f64>,
    /// Index into `points` of the τ with the lowest held-out NLL.
    pub selected: Option<usize>,
    pub column_names: Vec<String>,
}

impl PathResult {
    pub fn selected_tau(&self) -> Option<f64> {
        self.selected.map(|i| self.points[i].tau)
    }

    pub fn total_iterations(&self) -> usize {
        self.points.iter().map(|p| p.iterations).sum()
    }

    pub fn heldout_nll(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.heldout_nll).collect()
    }

    /// One row per τ: `tau, nonzeros, train_nll, heldout_nll, iterations,
    /// status`, then the coefficients (smoothed when `smoothed` is set).
    pub fn write_csv(&self, path: impl AsRef<Path>, smoothed: bool) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> =
            ["tau", "nonzeros", "train_nll", "heldout_nll", "iterations", "status"].iter().map(|s| s.to_string()).collect();
        header.extend(self.column_names.iter().cloned());
        w.write_record(&header)?;
        let coefs = if smoothed { &self.smoothed } else { &self.coefficients };
        for (i, p) in self.points.iter().enumerate() {
            let mut rec = vec![
                p.tau.to_string(),
                p.nonzeros.to_string(),
                p.train_nll.to_string(),
                p.heldout_nll.to_string(),
                p.iterations.to_string(),
                if p.failure.is_some() { "failed".into() } else { "ok".into() },
            ];
            rec.extend(coefs.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Centered rolling median; the window shrinks symmetrically near the ends,
/// so the first and last entries are kept as they are. NaN entries are
/// ignored inside a window.
pub fn rolling_median(traj: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::config(format!("median window must be odd, got {window}")));
    }
    if window > traj.len() {
        return Err(Error::config(format!("median window {window} exceeds sequence length {}", traj.len())));
    }
    let half = window / 2;
    let n = traj.len();
    let mut buf = Vec::with_capacity(window);
    Ok((0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            buf.clear();
            buf.extend(traj[i - r..=i + r].iter().copied().filter(|v| !v.is_nan()));
            median(&mut buf)
        })
        .collect())
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Fits every τ in order on a training split and scores each on the
/// complementary validation split (split seeded by `opt.seed`). Each fit
/// monitors its own training objective; `opt.holdout` is ignored since the
/// validation split already does the selecting.
pub fn run_path(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    opt: &OptimizerConfig,
    pcfg: &PathConfig,
) -> Result<PathResult> {
    pcfg.validate()?;
    opt.validate()?;
    ds.validate()?;
    spec.validate(ds.n_pred())?;
    let n = ds.n_obs();
    if n < 2 {
        return Err(Error::Data("a path needs at least two rows".into()));
    }
    let n_val = ((pcfg.holdout_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (tr, va) = split_rows(n, n_val, opt.seed);
    let (train, valid) = (ds.subset(&tr), ds.subset(&va));
    let opt = &OptimizerConfig { holdout: Some(0), ..opt.clone() };

    let p = ds.n_pred();
    let k = pcfg.tau_grid.len();
    let mut coefs = Array2::from_elem((k, p), f64::NAN);
    let mut intercepts = vec![f64::NAN; k];
    let mut points = Vec::with_capacity(k);
    let mut prev: Option<ParamState> = None;

    for (i, &tau) in pcfg.tau_grid.iter().enumerate() {
        let init = match (&prev, pcfg.warm_start) {
            (Some(s), true) => {
                let mut s = s.clone();
                if pcfg.reset_gamma {
                    s.gamma.fill(1.0);
                }
                Some(s)
            }
            _ => None,
        };
        let res = PenaltyConfig::new(tau).and_then(|pen| fit_with_mode(&train, fam, spec, &pen, opt, init));
        match res {
            Ok(fr) => {
                let st = &fr.state;
                let f = st.family(fam);
                let held = data_term(&f, &valid, None, st.beta.view(), st.intercept, false).mean_nll;
                coefs.row_mut(i).assign(&st.beta);
                intercepts[i] = st.intercept;
                points.push(PathPoint {
                    tau,
                    iterations: fr.iterations,
                    converged_reason: Some(fr.converged_reason),
                    nonzeros: st.nonzeros(),
                    train_nll: fr.train_nll,
                    heldout_nll: held,
                    failure: None,
                });
                prev = Some(fr.state);
            }
            Err(e) => {
                points.push(PathPoint {
                    tau,
                    iterations: 0,
                    converged_reason: None,
                    nonzeros: 0,
                    train_nll: f64::NAN,
                    heldout_nll: f64::NAN,
                    failure: Some(e.to_string()),
                });
                prev = None;
            }
        }
    }

    let selected = points
        .iter()
        .enumerate()
        .filter(|(_, pt)| pt.heldout_nll.is_finite())
        .min_by(|a, b| a.1.heldout_nll.partial_cmp(&b.1.heldout_nll).expect("finite"))
        .map(|(i, _)| i);

    let w = if pcfg.median_window <= k { pcfg.median_window } else { (k - 1) | 1 };
    let mut smoothed = coefs.clone();
    for j in 0..p {
        let col: Vec<f64> = coefs.column(j).to_vec();
        for (i, v) in rolling_median(&col, w)?.into_iter().enumerate() {
            smoothed[[i, j]] = v;
        }
    }

    Ok(PathResult { points, coefficients: coefs, smoothed, intercepts, selected, column_names: ds.column_names.clone() })
}
