//! Smooth log-densities on the penalty weights λ (and group-level
//! hyperparameters γ) that encode structured sparsity.
//!
//! * `IndependentHalfCauchy`: `λ_p ~ C⁺(0, 1)` independently.
//! * `SparseGroup`: `γ_g ~ C⁺(0, 1)`, `λ_p | γ ~ N⁺(γ_{g(p)}, σ)` with the
//!   full truncated-normal normalizer.
//! * `OverlappingGroup`: `γ_g ~ C⁺(0, 1)`, `λ_p | γ ~ C(m_p, σ)` where `m_p`
//!   is a softmax smooth minimum of `γ` over `g(p)`.
//!
//! `σ` defaults to `1/√N` and the softmax temperature to `√P`.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::likelihood::rel_err;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    IndependentHalfCauchy,
    SparseGroup,
    OverlappingGroup,
}

impl PriorKind {
    pub const ALL: [PriorKind; 3] =
        [PriorKind::IndependentHalfCauchy, PriorKind::SparseGroup, PriorKind::OverlappingGroup];

    pub fn name(self) -> &'static str {
        match self {
            PriorKind::IndependentHalfCauchy => "independent_half_cauchy",
            PriorKind::SparseGroup => "sparse_group",
            PriorKind::OverlappingGroup => "overlapping_group",
        }
    }
}

impl std::str::FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" | "independent_half_cauchy" => Ok(PriorKind::IndependentHalfCauchy),
            "sparse_group" | "group" => Ok(PriorKind::SparseGroup),
            "overlapping_group" | "overlapping" => Ok(PriorKind::OverlappingGroup),
            _ => Err(Error::config(format!("unknown prior '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub groups: Option<GroupStructure>,
    /// Scale of the conditional λ density around its group location.
    pub group_scale: f64,
    pub softmax_temp: f64,
}

impl PriorSpec {
    pub fn independent() -> Self {
        Self { kind: PriorKind::IndependentHalfCauchy, groups: None, group_scale: 1.0, softmax_temp: 1.0 }
    }

    /// Group prior with the default scale `1/√n_obs` and temperature `√P`.
    pub fn grouped(kind: PriorKind, groups: GroupStructure, n_obs: usize) -> Result<Self> {
        let p = groups.n_pred() as f64;
        let spec = Self {
            kind,
            groups: Some(groups),
            group_scale: 1.0 / (n_obs.max(1) as f64).sqrt(),
            softmax_temp: p.sqrt(),
        };
        spec.validate(spec.groups.as_ref().map_or(0, |g| g.n_pred()))?;
        Ok(spec)
    }

    pub fn sparse_group(groups: GroupStructure, n_obs: usize) -> Result<Self> {
        Self::grouped(PriorKind::SparseGroup, groups, n_obs)
    }

    pub fn overlapping_group(groups: GroupStructure, n_obs: usize) -> Result<Self> {
        Self::grouped(PriorKind::OverlappingGroup, groups, n_obs)
    }

    /// Number of group-level hyperparameters γ.
    pub fn n_gamma(&self) -> usize {
        match self.kind {
            PriorKind::IndependentHalfCauchy => 0,
            _ => self.groups.as_ref().map_or(0, |g| g.n_groups()),
        }
    }

    pub fn validate(&self, n_pred: usize) -> Result<()> {
        if self.kind == PriorKind::IndependentHalfCauchy {
            return Ok(());
        }
        let groups = self
            .groups
            .as_ref()
            .ok_or_else(|| Error::config(format!("{} prior requires a group structure", self.kind.name())))?;
        if groups.n_pred() != n_pred {
            return Err(Error::dim(format!(
                "group structure covers {} predictors, model has {n_pred}",
                groups.n_pred()
            )));
        }
        if !groups.covers_all() {
            return Err(Error::config("every predictor must belong to at least one group"));
        }
        if self.kind == PriorKind::SparseGroup && !groups.is_partition() {
            return Err(Error::config("sparse_group prior requires disjoint groups; use overlapping_group"));
        }
        if !(self.group_scale > 0.0 && self.softmax_temp > 0.0) {
            return Err(Error::config("group_scale and softmax_temp must be positive"));
        }
        Ok(())
    }

    fn check_args(&self, lam: &[f64], gamma: &[f64]) -> Result<()> {
        self.validate(lam.len())?;
        if let Some(v) = lam.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::domain(format!("penalty weights must be positive, got {v}")));
        }
        if gamma.len() != self.n_gamma() {
            return Err(Error::dim(format!("expected {} group hyperparameters, got {}", self.n_gamma(), gamma.len())));
        }
        if let Some(v) = gamma.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::domain(format!("group hyperparameters must be positive, got {v}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorGradient {
    pub dlam: Vec<f64>,
    pub dgamma: Vec<f64>,
}

#[inline]
fn log_half_cauchy(x: f64) -> f64 {
    FRAC_2_PI.ln() - (x * x).ln_1p()
}

#[inline]
fn dlog_half_cauchy(x: f64) -> f64 {
    -2.0 * x / (1.0 + x * x)
}

/// `log Φ(x)` for the standard normal CDF.
fn log_norm_cdf(x: f64) -> f64 {
    (0.5 * erfc(-x / SQRT_2)).ln()
}

/// `φ(x)/Φ(x)`, evaluated stably for negative `x`.
fn inv_mills(x: f64) -> f64 {
    if x > -30.0 {
        let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        phi / (0.5 * erfc(-x / SQRT_2))
    } else {
        // asymptotic: φ/Φ ≈ −x (1 + 1/x² ...)
        -x / (1.0 - 1.0 / (x * x) + 3.0 / x.powi(4))
    }
}

/// Softmax smooth minimum `σ(−γ/T)ᵀγ`, together with the softmax weights.
fn smooth_min_weights(gamma_sub: &[f64], temp: f64) -> (f64, Vec<f64>) {
    let lo = gamma_sub.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = gamma_sub.iter().map(|g| (-(g - lo) / temp).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
    let m = w.iter().zip(gamma_sub).map(|(a, b)| a * b).sum::<f64>();
    (m.clamp(lo, gamma_sub.iter().cloned().fold(f64::NEG_INFINITY, f64::max)), w)
}

pub fn smooth_min(gamma_sub: &[f64], temp: f64) -> Result<f64> {
    if gamma_sub.is_empty() {
        return Err(Error::domain("smooth_min of an empty set"));
    }
    if !(temp > 0.0) {
        return Err(Error::config(format!("softmax temperature must be positive, got {temp}")));
    }
    Ok(smooth_min_weights(gamma_sub, temp).0)
}

fn gather(gamma: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&g| gamma[g]).collect()
}

pub fn log_prior(spec: &PriorSpec, lam: &[f64], gamma: &[f64]) -> Result<f64> {
    spec.check_args(lam, gamma)?;
    Ok(log_prior_unchecked(spec, lam, gamma))
}

pub(crate) fn log_prior_unchecked(spec: &PriorSpec, lam: &[f64], gamma: &[f64]) -> f64 {
    match spec.kind {
        PriorKind::IndependentHalfCauchy => lam.iter().map(|&l| log_half_cauchy(l)).sum(),
        PriorKind::SparseGroup => {
            let groups = spec.groups.as_ref().expect("validated");
            let s = spec.group_scale;
            let hyper: f64 = gamma.iter().map(|&g| log_half_cauchy(g)).sum();
            let norm_const = -(s * (2.0 * PI).sqrt()).ln();
            let body: f64 = lam
                .iter()
                .enumerate()
                .map(|(p, &l)| {
                    let gm = gamma[groups.groups_of(p)[0]];
                    let z = (l - gm) / s;
                    -0.5 * z * z + norm_const - log_norm_cdf(gm / s)
                })
                .sum();
            hyper + body
        }
        PriorKind::OverlappingGroup => {
            let groups = spec.groups.as_ref().expect("validated");
            let s = spec.group_scale;
            let hyper: f64 = gamma.iter().map(|&g| log_half_cauchy(g)).sum();
            let body: f64 = lam
                .iter()
                .enumerate()
                .map(|(p, &l)| {
                    let (m, _) = smooth_min_weights(&gather(gamma, groups.groups_of(p)), spec.softmax_temp);
                    let z = (l - m) / s;
                    -(PI * s).ln() - (z * z).ln_1p()
                })
                .sum();
            hyper + body
        }
    }
}

pub fn grad_log_prior(spec: &PriorSpec, lam: &[f64], gamma: &[f64]) -> Result<PriorGradient> {
    spec.check_args(lam, gamma)?;
    Ok(grad_log_prior_unchecked(spec, lam, gamma))
}

pub(crate) fn grad_log_prior_unchecked(spec: &PriorSpec, lam: &[f64], gamma: &[f64]) -> PriorGradient {
    let mut dlam = vec![0.0; lam.len()];
    let mut dgamma: Vec<f64> = gamma.iter().map(|&g| dlog_half_cauchy(g)).collect();
    match spec.kind {
        PriorKind::IndependentHalfCauchy => {
            for (d, &l) in dlam.iter_mut().zip(lam) {
                *d = dlog_half_cauchy(l);
            }
        }
        PriorKind::SparseGroup => {
            let groups = spec.groups.as_ref().expect("validated");
            let s = spec.group_scale;
            for (p, &l) in lam.iter().enumerate() {
                let g = groups.groups_of(p)[0];
                let z = (l - gamma[g]) / s;
                dlam[p] = -z / s;
                dgamma[g] += z / s - inv_mills(gamma[g] / s) / s;
            }
        }
        PriorKind::OverlappingGroup => {
            let groups = spec.groups.as_ref().expect("validated");
            let (s, temp) = (spec.group_scale, spec.softmax_temp);
            for (p, &l) in lam.iter().enumerate() {
                let idx = groups.groups_of(p);
                let sub = gather(gamma, idx);
                let (m, w) = smooth_min_weights(&sub, temp);
                let r = l - m;
                let dl = -2.0 * r / (s * s + r * r);
                dlam[p] = dl;
                for (k, &g) in idx.iter().enumerate() {
                    dgamma[g] += -dl * w[k] * (1.0 - (sub[k] - m) / temp);
                }
            }
        }
    }
    PriorGradient { dlam, dgamma }
}

/// Worst coordinate-wise discrepancy between [`grad_log_prior`] and central
/// differences over λ and γ, measured as `|a − b| / max(1, |a|, |b|)`. The
/// step for coordinate `x` is `h·max(x, 1e-2)`.
pub fn finite_diff_check(spec: &PriorSpec, lam: &[f64], gamma: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::config(format!("finite-difference step must lie in (0, 1), got {h}")));
    }
    let g = grad_log_prior(spec, lam, gamma)?;
    let mut worst = 0.0f64;
    let mut l = lam.to_vec();
    for j in 0..l.len() {
        let (orig, d) = (l[j], h * l[j].max(1e-2));
        l[j] = orig + d;
        let fp = log_prior(spec, &l, gamma)?;
        l[j] = orig - d;
        let fm = log_prior(spec, &l, gamma)?;
        l[j] = orig;
        worst = worst.max(rel_err(g.dlam[j], (fp - fm) / (2.0 * d)));
    }
    let mut gm = gamma.to_vec();
    for k in 0..gm.len() {
        let (orig, d) = (gm[k], h * gm[k].max(1e-2));
        gm[k] = orig + d;
        let fp = log_prior(spec, lam, &gm)?;
        gm[k] = orig - d;
        let fm = log_prior(spec, lam, &gm)?;
        gm[k] = orig;
        worst = worst.max(rel_err(g.dgamma[k], (fp - fm) / (2.0 * d)));
    }
    Ok(worst)
}
