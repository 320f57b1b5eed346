//! Joint minimization over coefficients, penalty weights, group
//! hyperparameters and auxiliary likelihood parameters.
//!
//! Three drivers share the same state type:
//!
//! * [`fit`]: full-batch proximal gradient with a diagonal Adam
//!   preconditioner. The smooth step uses the bias-corrected first moment;
//!   the per-coordinate step `step/(√v̂ + eps)` doubles as the prox step size.
//! * [`fit_svrg`]: the same update with variance-reduced minibatch gradients.
//! * [`fit_bcd_reweighted`]: block-coordinate descent alternating a
//!   weighted-Lasso β-block with the closed-form λ-block (reweighted ℓ1).

mod adam;
mod bcd;
mod descent;
pub(crate) mod engine;

pub use bcd::{fit_bcd_reweighted, fit_lasso, lambda_block_update, weighted_lasso, LassoSolution};
pub use descent::{descent_check, estimate_smoothness, DescentReport};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::objective::PenaltyConfig;
use crate::prior::PriorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    pub beta: Array1<f64>,
    /// Strictly positive after every prox step.
    pub lam: Array1<f64>,
    pub gamma: Array1<f64>,
    /// Unpenalized intercept (stays 0 when the dataset has none).
    pub intercept: f64,
    /// `log α` for families with a free auxiliary parameter.
    pub log_aux: Option<f64>,
}

impl ParamState {
    /// `β = 0`, `λ = 1`, `γ = 1`, auxiliary parameter taken from `fam`.
    pub fn initial(n_pred: usize, n_gamma: usize, fam: &Family) -> Self {
        Self {
            beta: Array1::zeros(n_pred),
            lam: Array1::ones(n_pred),
            gamma: Array1::ones(n_gamma),
            intercept: 0.0,
            log_aux: fam.has_free_aux().then(|| fam.aux().expect("free aux").ln()),
        }
    }

    /// The family with this state's auxiliary parameter substituted.
    pub fn family(&self, fam: &Family) -> Family {
        match self.log_aux {
            Some(la) => fam.with_log_aux(la),
            None => *fam,
        }
    }

    pub fn nonzeros(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    pub fn check_dims(&self, n_pred: usize, n_gamma: usize) -> Result<()> {
        if self.beta.len() != n_pred || self.lam.len() != n_pred {
            return Err(Error::dim(format!(
                "state has {} coefficients / {} weights, model has {n_pred}",
                self.beta.len(),
                self.lam.len()
            )));
        }
        if self.gamma.len() != n_gamma {
            return Err(Error::dim(format!("state has {} group parameters, prior needs {n_gamma}", self.gamma.len())));
        }
        if self.lam.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::domain("penalty weights must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FullBatch,
    Svrg,
    BcdReweighted,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full_batch" => Ok(Mode::FullBatch),
            "svrg" => Ok(Mode::Svrg),
            "bcd" | "bcd_reweighted" => Ok(Mode::BcdReweighted),
            _ => Err(Error::config(format!("unknown mode '{s}' (expected full, svrg or bcd)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub step: f64,
    pub minibatch: usize,
    /// Stop after this many iterations without improvement of the monitored
    /// quantity (held-out NLL, or the training objective without a holdout).
    pub patience: usize,
    /// Rows held out for early stopping. `None` uses `min(1000, N/10)`;
    /// `Some(0)` disables the holdout.
    pub holdout: Option<usize>,
    pub max_iters: usize,
    pub mode: Mode,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Inner iterations per SVRG anchor; `None` means one pass over the
    /// training rows (`N_train / minibatch`).
    pub epoch_len: Option<usize>,
    /// Exponential-prior rate ε for the reweighted-ℓ1 mode.
    pub bcd_eps: f64,
    /// Emit a progress line to stderr every this many iterations (0 = silent).
    pub progress_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            minibatch: 256,
            patience: 500,
            holdout: None,
            max_iters: 10_000,
            mode: Mode::FullBatch,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            epoch_len: None,
            bcd_eps: 1e-3,
            progress_every: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn holdout_rows(&self, n_obs: usize) -> usize {
        self.holdout.unwrap_or_else(|| 1000.min(n_obs / 10))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(m.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if self.minibatch == 0 {
            return bad("minibatch must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("adam betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("adam eps must be positive");
        }
        if !(self.bcd_eps > 0.0) {
            return bad("bcd eps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedReason {
    Patience,
    MaxIters,
    /// Fixed-point tolerance reached (block-coordinate mode).
    Tolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Best state by the monitored criterion, not necessarily the last iterate.
    pub state: ParamState,
    pub objective_trace: Vec<f64>,
    /// Held-out mean NLL at each evaluation (empty without a holdout).
    pub heldout_trace: Vec<f64>,
    pub iterations: usize,
    pub converged_reason: ConvergedReason,
    /// Held-out mean NLL of the returned state, when a holdout was used.
    pub heldout_nll: Option<f64>,
    /// Training mean NLL of the returned state.
    pub train_nll: f64,
}

/// Full-batch proximal gradient.
pub fn fit(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    opt: &OptimizerConfig,
    init: Option<ParamState>,
) -> Result<FitResult> {
    engine::run(ds, fam, spec, pen, opt, init, None)
}

/// Stochastic proximal gradient with SVRG. `epoch_len` overrides
/// `opt.epoch_len`.
pub fn fit_svrg(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    opt: &OptimizerConfig,
    init: Option<ParamState>,
    epoch_len: Option<usize>,
) -> Result<FitResult> {
    let n_train = ds.n_obs() - engine::holdout_count(ds.n_obs(), opt);
    let m = epoch_len.or(opt.epoch_len).unwrap_or_else(|| (n_train / opt.minibatch.max(1)).max(1));
    if m == 0 {
        return Err(Error::config("epoch length must be positive"));
    }
    engine::run(ds, fam, spec, pen, opt, init, Some(m))
}

/// Dispatches on `opt.mode`.
pub fn fit_with_mode(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    opt: &OptimizerConfig,
    init: Option<ParamState>,
) -> Result<FitResult> {
    match opt.mode {
        Mode::FullBatch => fit(ds, fam, spec, pen, opt, init),
        Mode::Svrg => fit_svrg(ds, fam, spec, pen, opt, init, None),
        Mode::BcdReweighted => fit_bcd_reweighted(ds, fam, opt.bcd_eps, pen, opt, init),
    }
}
