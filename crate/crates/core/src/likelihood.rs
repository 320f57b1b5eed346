//! Negative log-likelihoods for the supported regression families, as smooth
//! functions of the linear predictor `η = xᵀβ`.
//!
//! Values are averaged over observations (weighted mean when weights are
//! given). Normalizing constants such as `log(y!)` are kept so that values
//! are comparable across families.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gaussian,
    BernoulliLogit,
    PoissonLog,
    NegbinLog,
    Cauchy,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Gaussian,
        FamilyKind::BernoulliLogit,
        FamilyKind::PoissonLog,
        FamilyKind::NegbinLog,
        FamilyKind::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::BernoulliLogit => "bernoulli_logit",
            FamilyKind::PoissonLog => "poisson_log",
            FamilyKind::NegbinLog => "negbin_log",
            FamilyKind::Cauchy => "cauchy",
        }
    }

    /// The family with its default auxiliary parameter.
    pub fn default_family(self) -> Family {
        match self {
            FamilyKind::Gaussian => Family::Gaussian { sigma: 1.0 },
            FamilyKind::BernoulliLogit => Family::BernoulliLogit,
            FamilyKind::PoissonLog => Family::PoissonLog,
            FamilyKind::NegbinLog => Family::NegbinLog { alpha: 1.0 },
            FamilyKind::Cauchy => Family::Cauchy { scale: 1.0 },
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown family '{s}'")))
    }
}

/// Likelihood family with its auxiliary parameter.
///
/// Negative Binomial uses mean `μ = exp(η)` and variance `μ + μ²/α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Gaussian { sigma: f64 },
    BernoulliLogit,
    PoissonLog,
    NegbinLog { alpha: f64 },
    Cauchy { scale: f64 },
}

impl Family {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Family::Gaussian { .. } => FamilyKind::Gaussian,
            Family::BernoulliLogit => FamilyKind::BernoulliLogit,
            Family::PoissonLog => FamilyKind::PoissonLog,
            Family::NegbinLog { .. } => FamilyKind::NegbinLog,
            Family::Cauchy { .. } => FamilyKind::Cauchy,
        }
    }

    pub fn aux(&self) -> Option<f64> {
        match *self {
            Family::Gaussian { sigma } => Some(sigma),
            Family::NegbinLog { alpha } => Some(alpha),
            Family::Cauchy { scale } => Some(scale),
            _ => None,
        }
    }

    /// Whether the auxiliary parameter is estimated jointly (on the log scale).
    pub fn has_free_aux(&self) -> bool {
        matches!(self, Family::NegbinLog { .. })
    }

    /// Copy with the free auxiliary parameter replaced by `exp(log_aux)`.
    pub fn with_log_aux(&self, log_aux: f64) -> Family {
        match *self {
            Family::NegbinLog { .. } => Family::NegbinLog { alpha: log_aux.exp() },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.aux() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!(
                    "{} auxiliary parameter must be positive, got {v}",
                    self.kind().name()
                )));
            }
        }
        Ok(())
    }

    pub fn check_response(&self, y: ArrayView1<f64>) -> Result<()> {
        for (row, &v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidResponse { row, msg: format!("non-finite value {v}") });
            }
            match self {
                Family::BernoulliLogit if v != 0.0 && v != 1.0 => {
                    return Err(Error::InvalidResponse { row, msg: format!("expected 0 or 1, got {v}") });
                }
                Family::PoissonLog | Family::NegbinLog { .. } if v < 0.0 || v.fract() != 0.0 => {
                    return Err(Error::InvalidResponse {
                        row,
                        msg: format!("expected a nonnegative integer count, got {v}"),
                    });
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Per-observation loss and its derivative with respect to `η`.
    #[inline]
    pub fn loss_deriv(&self, y: f64, eta: f64) -> (f64, f64) {
        match *self {
            Family::Gaussian { sigma } => {
                let r = y - eta;
                let s2 = sigma * sigma;
                (0.5 * (2.0 * PI * s2).ln() + r * r / (2.0 * s2), -r / s2)
            }
            Family::BernoulliLogit => {
                let sp = eta.max(0.0) + (-eta.abs()).exp().ln_1p();
                let p = if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                };
                (sp - y * eta, p - y)
            }
            Family::PoissonLog => {
                let mu = eta.exp();
                (mu - y * eta + ln_gamma(y + 1.0), mu - y)
            }
            Family::NegbinLog { alpha } => {
                let mu = eta.exp();
                let log_a_mu = log_add_exp(alpha.ln(), eta);
                let ll = ln_gamma(y + alpha) - ln_gamma(alpha) - ln_gamma(y + 1.0)
                    + alpha * (alpha.ln() - log_a_mu)
                    + y * (eta - log_a_mu);
                (-ll, alpha * (mu - y) / (alpha + mu))
            }
            Family::Cauchy { scale } => {
                let r = y - eta;
                let z = r / scale;
                ((PI * scale).ln() + z.ln_1p_sq(), -2.0 * r / (scale * scale + r * r))
            }
        }
    }

    /// Derivative of the per-observation loss with respect to `log α`
    /// (Negative Binomial only; zero otherwise).
    #[inline]
    pub fn dloss_dlog_aux(&self, y: f64, eta: f64) -> f64 {
        match *self {
            Family::NegbinLog { alpha } => {
                let mu = eta.exp();
                let log_a_mu = log_add_exp(alpha.ln(), eta);
                let d_alpha = digamma(y + alpha) - digamma(alpha) + alpha.ln() - log_a_mu
                    + (mu - y) / (alpha + mu);
                -alpha * d_alpha
            }
            _ => 0.0,
        }
    }
}

trait Ln1pSq {
    fn ln_1p_sq(self) -> f64;
}

impl Ln1pSq for f64 {
    /// `ln(1 + z²)` without overflow for large `|z|`.
    #[inline]
    fn ln_1p_sq(self) -> f64 {
        let a = self.abs();
        if a > 1e150 {
            2.0 * a.ln()
        } else {
            (a * a).ln_1p()
        }
    }
}

#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[derive(Debug, Clone)]
pub struct LinearModelData {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub weights: Option<Array1<f64>>,
}

impl LinearModelData {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let data = Self { x, y, weights: None };
        data.validate()?;
        Ok(data)
    }

    pub fn with_weights(mut self, w: Array1<f64>) -> Result<Self> {
        self.weights = Some(w);
        self.validate()?;
        Ok(self)
    }

    pub fn n_obs(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_pred(&self) -> usize {
        self.x.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, p) = self.x.dim();
        if n == 0 || p == 0 {
            return Err(Error::dim(format!("design must be non-empty, got {n}x{p}")));
        }
        if self.y.len() != n {
            return Err(Error::dim(format!("response has {} rows, design has {n}", self.y.len())));
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("design contains non-finite entries".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::dim(format!("weights have {} rows, design has {n}", w.len())));
            }
            if w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || w.sum() <= 0.0 {
                return Err(Error::Data("weights must be nonnegative with positive total".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NllGradient {
    pub beta: Array1<f64>,
    /// `∂/∂ log α`, present for families with a free auxiliary parameter.
    pub log_aux: Option<f64>,
}

fn check_beta(data: &LinearModelData, beta: ArrayView1<f64>) -> Result<()> {
    if beta.len() != data.n_pred() {
        return Err(Error::dim(format!(
            "beta has length {}, design has {} columns",
            beta.len(),
            data.n_pred()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("beta contains non-finite entries"));
    }
    Ok(())
}

/// Mean negative log-likelihood.
pub fn nll(fam: &Family, data: &LinearModelData, beta: ArrayView1<f64>) -> Result<f64> {
    fam.validate()?;
    check_beta(data, beta)?;
    fam.check_response(data.y.view())?;
    let eta = data.x.dot(&beta);
    let (mut total, mut wsum) = (0.0, 0.0);
    for i in 0..eta.len() {
        let w = data.weights.as_ref().map_or(1.0, |w| w[i]);
        total += w * fam.loss_deriv(data.y[i], eta[i]).0;
        wsum += w;
    }
    Ok(total / wsum)
}

/// Analytic gradient of [`nll`].
pub fn grad_nll(fam: &Family, data: &LinearModelData, beta: ArrayView1<f64>) -> Result<NllGradient> {
    fam.validate()?;
    check_beta(data, beta)?;
    fam.check_response(data.y.view())?;
    let eta = data.x.dot(&beta);
    let n = eta.len();
    let mut d = Array1::zeros(n);
    let (mut wsum, mut daux) = (0.0, 0.0);
    for i in 0..n {
        let w = data.weights.as_ref().map_or(1.0, |w| w[i]);
        d[i] = w * fam.loss_deriv(data.y[i], eta[i]).1;
        if fam.has_free_aux() {
            daux += w * fam.dloss_dlog_aux(data.y[i], eta[i]);
        }
        wsum += w;
    }
    let g = data.x.t().dot(&d) / wsum;
    Ok(NllGradient { beta: g, log_aux: fam.has_free_aux().then_some(daux / wsum) })
}

/// Worst coordinate-wise discrepancy between [`grad_nll`] and central
/// differences with step `h`, measured as `|a − b| / max(1, |a|, |b|)`.
/// The `log α` coordinate is included for Negative Binomial.
pub fn finite_diff_check(fam: &Family, data: &LinearModelData, beta: ArrayView1<f64>, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::config(format!("finite-difference step must be positive, got {h}")));
    }
    let g = grad_nll(fam, data, beta)?;
    let mut worst = 0.0f64;
    let mut b = beta.to_owned();
    for j in 0..b.len() {
        let orig = b[j];
        b[j] = orig + h;
        let fp = nll(fam, data, b.view())?;
        b[j] = orig - h;
        let fm = nll(fam, data, b.view())?;
        b[j] = orig;
        worst = worst.max(rel_err(g.beta[j], (fp - fm) / (2.0 * h)));
    }
    if let (Some(ga), Some(aux)) = (g.log_aux, fam.aux()) {
        let la = aux.ln();
        let fp = nll(&fam.with_log_aux(la + h), data, beta)?;
        let fm = nll(&fam.with_log_aux(la - h), data, beta)?;
        worst = worst.max(rel_err(ga, (fp - fm) / (2.0 * h)));
    }
    Ok(worst)
}

pub(crate) fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}
