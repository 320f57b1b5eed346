//! The joint MAP objective over `(β, λ, γ)` and the profiled penalty obtained
//! by minimizing the joint penalty over λ for a single coefficient.
//!
//! Scaling: the optimizer works with the objective divided by `τ`,
//!
//! ```text
//! F = (N/τ)·mean_nll(β) + Σ_p [λ_p|β_p| − a·log λ_p] − (1/τ)·log p(λ, γ)
//! ```
//!
//! with `a = 1/τ` by default. `N·mean_nll` is the summed NLL, so `τ = c·N`
//! gives the same minimizers as a per-observation strength `c` applied to the
//! mean NLL.

use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::model::data_term;
use crate::optimizer::ParamState;
use crate::prior::{log_prior, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub tau: f64,
    /// Coefficient of `−log λ` in the τ-divided objective.
    pub barrier_a: f64,
}

impl PenaltyConfig {
    pub fn new(tau: f64) -> Result<Self> {
        let cfg = Self { tau, barrier_a: 1.0 / tau };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `τ = c·N`.
    pub fn per_observation(c: f64, n_obs: usize) -> Result<Self> {
        Self::new(c * n_obs as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.barrier_a > 0.0 && self.barrier_a.is_finite()) {
            return Err(Error::config(format!("barrier coefficient must be positive, got {}", self.barrier_a)));
        }
        Ok(())
    }
}

/// τ-divided joint objective evaluated over all rows of `ds`.
pub fn joint_objective(
    state: &ParamState,
    cfg: &PenaltyConfig,
    spec: &PriorSpec,
    fam: &Family,
    ds: &Dataset,
) -> Result<f64> {
    cfg.validate()?;
    state.check_dims(ds.n_pred(), spec.n_gamma())?;
    let lam = state.lam.as_slice().expect("contiguous");
    let gamma = state.gamma.as_slice().expect("contiguous");
    let lp = log_prior(spec, lam, gamma)?;
    let fam = state.family(fam);
    let dt = data_term(&fam, ds, None, state.beta.view(), state.intercept, false);
    let pen: f64 = state
        .beta
        .iter()
        .zip(lam)
        .map(|(b, &l)| l * b.abs() - cfg.barrier_a * l.ln())
        .sum();
    Ok(ds.n_obs() as f64 / cfg.tau * dt.mean_nll + pen - lp / cfg.tau)
}

/// `ρ(λ) = −log p(λ)` for a univariate penalty-weight prior.
pub trait Rho {
    fn value(&self, lam: f64) -> f64;
    fn d1(&self, lam: f64) -> f64;
    fn d2(&self, lam: f64) -> f64;
}

/// Half-Cauchy(0, 1) prior on λ.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalfCauchyRho;

impl Rho for HalfCauchyRho {
    fn value(&self, lam: f64) -> f64 {
        (lam * lam).ln_1p() - std::f64::consts::FRAC_2_PI.ln()
    }
    fn d1(&self, lam: f64) -> f64 {
        2.0 * lam / (1.0 + lam * lam)
    }
    fn d2(&self, lam: f64) -> f64 {
        let q = 1.0 + lam * lam;
        2.0 * (1.0 - lam * lam) / (q * q)
    }
}

/// Exponential prior with the given rate. Rate 0 gives the flat (improper) ρ ≡ 0.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialRho {
    pub rate: f64,
}

impl Rho for ExponentialRho {
    fn value(&self, lam: f64) -> f64 {
        if self.rate > 0.0 {
            self.rate * lam - self.rate.ln()
        } else {
            0.0
        }
    }
    fn d1(&self, _lam: f64) -> f64 {
        self.rate
    }
    fn d2(&self, _lam: f64) -> f64 {
        0.0
    }
}

/// `g_τ(|β|) = min_{λ>0} τλ|β| − log λ + ρ(λ)`.
#[derive(Debug, Clone, Copy)]
pub struct ProfiledPenalty<R> {
    pub tau: f64,
    pub rho: R,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyDerivs {
    pub lam_star: f64,
    pub g: f64,
    pub gprime: f64,
    pub gsecond: f64,
}

const LAM_EPS: f64 = 1e-12;

impl<R: Rho> ProfiledPenalty<R> {
    pub fn new(tau: f64, rho: R) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::config(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { tau, rho })
    }

    /// Scale-free stationarity residual `1 − λ(τ|β| + ρ′(λ))`; positive
    /// below the minimizer, negative above it.
    fn residual(&self, lam: f64, abs_beta: f64) -> f64 {
        1.0 - lam * (self.tau * abs_beta + self.rho.d1(lam))
    }

    /// Bisection on `log λ` over `(ε, λ_hi]`.
    fn solve(&self, abs_beta: f64, lam_hi: f64) -> Option<f64> {
        let (mut lo, mut hi) = (LAM_EPS.ln(), lam_hi.ln());
        if self.residual(lo.exp(), abs_beta) <= 0.0 || self.residual(hi.exp(), abs_beta) > 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.residual(mid.exp(), abs_beta) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (l_lo, l_hi) = (lo.exp(), hi.exp());
        Some(if self.residual(l_lo, abs_beta).abs() <= self.residual(l_hi, abs_beta).abs() { l_lo } else { l_hi })
    }

    /// Optimal penalty weight: the root of `λ = 1/(τ|β| + ρ′(λ))`.
    pub fn lambda_star(&self, abs_beta: f64) -> Result<f64> {
        if !(abs_beta >= 0.0 && abs_beta.is_finite()) {
            return Err(Error::domain(format!("|beta| must be finite and nonnegative, got {abs_beta}")));
        }
        let lam_hi = 10f64.max(2.0 / (self.tau * abs_beta + LAM_EPS));
        let lam = self.solve(abs_beta, lam_hi).ok_or_else(|| {
            Error::Numerical(format!(
                "lambda_star: no sign change of the stationarity residual on ({LAM_EPS:e}, {lam_hi:e}] \
                 (tau = {}, |beta| = {abs_beta}; residual at ends {:.3e}, {:.3e})",
                self.tau,
                self.residual(LAM_EPS, abs_beta),
                self.residual(lam_hi, abs_beta)
            ))
        })?;
        let r = self.residual(lam, abs_beta);
        if r.abs() > 1e-10 {
            return Err(Error::Numerical(format!("lambda_star: residual {r:e} at lambda = {lam}")));
        }
        Ok(lam)
    }

    /// `g`, `g′ = τλ*` and `g″ = τ·∂λ*/∂|β| = −τ²/(1/λ*² + ρ″(λ*))`.
    pub fn value_grad(&self, abs_beta: f64) -> Result<PenaltyDerivs> {
        let l = self.lambda_star(abs_beta)?;
        let tau = self.tau;
        Ok(PenaltyDerivs {
            lam_star: l,
            g: tau * l * abs_beta - l.ln() + self.rho.value(l),
            gprime: tau * l,
            gsecond: -tau * tau / (1.0 / (l * l) + self.rho.d2(l)),
        })
    }

    /// Root of `1/λ = ρ′(λ)`; `τ·λ_a` is the thresholding level at the origin.
    pub fn lambda_a(&self) -> Result<f64> {
        let f = |l: f64| 1.0 - l * self.rho.d1(l);
        let (mut lo, mut hi) = (LAM_EPS, 1e12);
        if !(f(lo) > 0.0 && f(hi) < 0.0) {
            return Err(Error::Numerical(
                "lambda_a: 1/λ − ρ′(λ) has no sign change; ρ must be increasing with ρ′ bounded away from 0".into(),
            ));
        }
        while hi - lo > 1e-12 * hi.max(1.0) {
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `(|β|, |β| + g′(|β|))` over the grid.
    pub fn threshold_map(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        grid.iter().map(|&b| Ok((b, b + self.value_grad(b)?.gprime))).collect()
    }
}
