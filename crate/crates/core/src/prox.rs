//! Closed-form proximal operators for the variable-penalty ℓ1 function
//! `g(β, λ) = λ|β|`, optionally augmented with a logarithmic barrier `−a·log λ`.
//!
//! All operators act on a single `(β, λ)` block; the vector versions apply
//! them coordinate-wise since the penalty is separable.

use crate::error::{Error, Result};

/// Soft thresholding: `(|x| − s·lam)⁺ · sgn(x)`.
pub fn sto(x: f64, s: f64, lam: f64) -> Result<f64> {
    check_step(s)?;
    if lam < 0.0 {
        return Err(Error::domain(format!("soft threshold level must be nonnegative, got {lam}")));
    }
    Ok(shrink(x, s * lam))
}

#[inline]
pub(crate) fn shrink(x: f64, thresh: f64) -> f64 {
    let mag = x.abs() - thresh;
    if mag > 0.0 {
        mag.copysign(x)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxInput {
    pub beta0: f64,
    pub lam0: f64,
    pub s_beta: f64,
    pub s_lam: f64,
    /// Log-barrier coefficient; zero selects the barrier-free problem.
    pub a: f64,
}

impl ProxInput {
    pub fn new(beta0: f64, lam0: f64, s_beta: f64, s_lam: f64, a: f64) -> Self {
        Self { beta0, lam0, s_beta, s_lam, a }
    }

    /// Proximal cost at `(beta, lam)`. The barrier term is only present when `a > 0`.
    pub fn cost(&self, beta: f64, lam: f64) -> f64 {
        let db = beta - self.beta0;
        let dl = lam - self.lam0;
        let mut c = lam * beta.abs() + db * db / (2.0 * self.s_beta) + dl * dl / (2.0 * self.s_lam);
        if self.a > 0.0 {
            c -= self.a * lam.ln();
        }
        c
    }

    fn validate(&self) -> Result<()> {
        check_step(self.s_beta)?;
        check_step(self.s_lam)?;
        if !(self.beta0.is_finite() && self.lam0.is_finite() && self.a.is_finite()) {
            return Err(Error::domain("non-finite proximal input"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxOutput {
    pub beta_star: f64,
    pub lam_star: f64,
    pub cost: f64,
}

fn check_step(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(s))
    }
}

/// Dispatches on the barrier coefficient: `a == 0` uses [`prox_vp`], `a > 0`
/// uses [`prox_vp_log`].
pub fn prox(input: &ProxInput) -> Result<ProxOutput> {
    if input.a > 0.0 {
        prox_vp_log(input)
    } else {
        prox_vp(input)
    }
}

/// Proximal operator of `λ|β|` over `β ∈ ℝ, λ ≥ 0`.
///
/// For `s_β·s_λ < 1` the λ-marginal is convex and the minimizer is
/// `λ₀` if `λ₀ ≥ |β₀|/s_β`, else `(λ₀ − s_λ|β₀|)⁺ / (1 − s_β s_λ)`. Otherwise the
/// concave piece pushes λ to one of `{0, λ₀}`, and `λ₀` wins when
/// `λ₀/√s_λ ≥ |β₀|/√s_β` (ties resolve to `λ₀`, the β-sparse branch).
pub fn prox_vp(input: &ProxInput) -> Result<ProxOutput> {
    input.validate()?;
    if input.a != 0.0 {
        return Err(Error::domain("prox_vp handles a = 0 only; use prox_vp_log"));
    }
    let ProxInput { beta0, lam0, s_beta, s_lam, .. } = *input;
    let abs_b = beta0.abs();
    let prod = s_beta * s_lam;

    let lam_star = if prod < 1.0 {
        if lam0 >= abs_b / s_beta {
            lam0
        } else {
            (lam0 - s_lam * abs_b).max(0.0) / (1.0 - prod)
        }
    } else if lam0 >= 0.0 && lam0 / s_lam.sqrt() >= abs_b / s_beta.sqrt() {
        lam0
    } else {
        0.0
    };
    let beta_star = shrink(beta0, s_beta * lam_star);
    Ok(ProxOutput { beta_star, lam_star, cost: input.cost(beta_star, lam_star) })
}

/// The λ-part of [`prox_vp`] as a function of `lam0`, `aa = |β₀|/s_β` and
/// `b = s_β·s_λ ∈ (0, 1)`.
pub fn reduced_prox(lam0: f64, aa: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Regime(b));
    }
    if aa < 0.0 {
        return Err(Error::domain(format!("aa must be nonnegative, got {aa}")));
    }
    if lam0 >= aa {
        Ok(lam0)
    } else {
        Ok((lam0 - aa * b).max(0.0) / (1.0 - b))
    }
}

/// Proximal operator of `λ|β| − a·log λ` over `β ∈ ℝ, λ > 0`.
///
/// Every stationary point is enumerated and the cheapest one returned:
/// the `β = 0` point, whose λ is the positive root of `λ² − λ₀λ − a·s_λ = 0`,
/// plus up to two roots of `(1 − s_β s_λ)λ² + (s_λ|β₀| − λ₀)λ − a·s_λ = 0`
/// that leave `|β₀| − s_β λ > 0`. The λ-marginal is C¹ and blows up at
/// `λ → 0⁺`, so the global minimizer is always among these candidates.
pub fn prox_vp_log(input: &ProxInput) -> Result<ProxOutput> {
    input.validate()?;
    if input.a <= 0.0 {
        return Err(Error::domain("prox_vp_log requires a > 0; use prox_vp"));
    }
    Ok(prox_log_unchecked(input))
}

pub(crate) fn prox_log_unchecked(input: &ProxInput) -> ProxOutput {
    let ProxInput { beta0, lam0, s_beta, s_lam, a } = *input;
    let abs_b = beta0.abs();
    let c = -a * s_lam;

    // β = 0 branch: positive root of λ² − λ₀λ + c = 0 (c < 0, so exactly one).
    let disc0 = (lam0 * lam0 - 4.0 * c).sqrt();
    let lam_zero = if lam0 >= 0.0 {
        0.5 * (lam0 + disc0)
    } else {
        -2.0 * c / (disc0 - lam0)
    };
    let mut best = ProxOutput { beta_star: 0.0, lam_star: lam_zero, cost: input.cost(0.0, lam_zero) };

    if abs_b > 0.0 {
        let qa = 1.0 - s_beta * s_lam;
        let qb = s_lam * abs_b - lam0;
        for lam in quadratic_roots(qa, qb, c).into_iter().flatten() {
            if !(lam > 0.0 && lam.is_finite()) {
                continue;
            }
            let mag = abs_b - s_beta * lam;
            if mag <= 0.0 {
                continue;
            }
            let beta = mag.copysign(beta0);
            let cost = input.cost(beta, lam);
            if cost < best.cost {
                best = ProxOutput { beta_star: beta, lam_star: lam, cost };
            }
        }
    }
    best
}

/// Real roots of `qa·x² + qb·x + qc = 0`, computed without cancellation.
fn quadratic_roots(qa: f64, qb: f64, qc: f64) -> [Option<f64>; 2] {
    if qa == 0.0 {
        return if qb != 0.0 { [Some(-qc / qb), None] } else { [None, None] };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return [None, None];
    }
    let q = -0.5 * (qb + disc.sqrt().copysign(if qb == 0.0 { 1.0 } else { qb }));
    if q == 0.0 {
        return [Some(0.0), None];
    }
    [Some(q / qa), Some(qc / q)]
}

/// Applies the operator coordinate-wise, overwriting `beta` and `lam`.
pub fn prox_in_place(
    beta: &mut [f64],
    lam: &mut [f64],
    s_beta: &[f64],
    s_lam: &[f64],
    a: f64,
) -> Result<()> {
    let p = beta.len();
    if lam.len() != p || s_beta.len() != p || s_lam.len() != p {
        return Err(Error::dim("prox_in_place: slice lengths differ"));
    }
    for i in 0..p {
        let out = prox(&ProxInput::new(beta[i], lam[i], s_beta[i], s_lam[i], a))?;
        beta[i] = out.beta_star;
        lam[i] = out.lam_star;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sto_basic_values() {
        assert_eq!(sto(3.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(sto(0.5, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(sto(-3.0, 1.0, 1.0).unwrap(), -2.0);
        assert!(matches!(sto(1.0, 0.0, 1.0), Err(Error::InvalidStep(_))));
        assert!(matches!(sto(1.0, -2.0, 1.0), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn sto_zero_is_exact() {
        let z = sto(-0.25, 0.5, 0.5).unwrap();
        assert_eq!(z.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn prox_vp_zero_beta_keeps_lambda() {
        for &c in &[0.0, 0.3, 2.0, 17.0] {
            for &(sb, sl) in &[(0.1, 0.2), (1.0, 1.0), (3.0, 2.0)] {
                let out = prox_vp(&ProxInput::new(0.0, c, sb, sl, 0.0)).unwrap();
                assert_eq!(out.beta_star, 0.0);
                assert_eq!(out.lam_star, c);
            }
        }
    }

    #[test]
    fn prox_vp_tie_returns_lam0() {
        // s_β s_λ = 4, λ₀/√s_λ = |β₀|/√s_β exactly.
        let out = prox_vp(&ProxInput::new(1.0, 1.0, 2.0, 2.0, 0.0)).unwrap();
        assert_eq!(out.lam_star, 1.0);
        assert_eq!(out.beta_star, 0.0);
        let dual = ProxInput::new(1.0, 1.0, 2.0, 2.0, 0.0).cost(1.0, 0.0);
        assert!((out.cost - dual).abs() < 1e-15);
    }

    #[test]
    fn prox_vp_dual_sparsity() {
        // λ₀ < s_λ|β₀| in the convex regime: λ* = 0 and β passes through.
        let out = prox_vp(&ProxInput::new(2.0, 0.1, 0.5, 0.5, 0.0)).unwrap();
        assert_eq!(out.lam_star, 0.0);
        assert_eq!(out.beta_star, 2.0);
    }

    #[test]
    fn prox_rejects_bad_inputs() {
        assert!(matches!(prox_vp(&ProxInput::new(1.0, 1.0, 0.0, 1.0, 0.0)), Err(Error::InvalidStep(_))));
        assert!(matches!(prox_vp_log(&ProxInput::new(1.0, 1.0, 1.0, -1.0, 1.0)), Err(Error::InvalidStep(_))));
        assert!(prox_vp_log(&ProxInput::new(1.0, 1.0, 1.0, 1.0, 0.0)).is_err());
        assert!(prox_vp(&ProxInput::new(1.0, 1.0, 1.0, 1.0, 0.5)).is_err());
    }

    #[test]
    fn reduced_prox_branches() {
        assert_eq!(reduced_prox(2.0, 1.0, 0.5).unwrap(), 2.0);
        assert_eq!(reduced_prox(0.5, 1.0, 0.5).unwrap(), 0.0);
        assert!(matches!(reduced_prox(0.5, 1.0, 1.0), Err(Error::Regime(_))));
        assert!(matches!(reduced_prox(0.5, 1.0, 0.0), Err(Error::Regime(_))));
        let via_full = prox_vp(&ProxInput::new(1.0, 0.5, 1.0, 0.5, 0.0)).unwrap();
        assert_eq!(via_full.lam_star, 0.0);
    }

    #[test]
    fn reduced_prox_identity_limit() {
        for &lam0 in &[0.05, 0.4, 0.9, 1.5] {
            let mut prev = f64::INFINITY;
            for &b in &[1e-1, 1e-3, 1e-6] {
                let err = (reduced_prox(lam0, 1.0, b).unwrap() - lam0).abs();
                assert!(err <= prev + 1e-15);
                prev = err;
            }
            assert!(prev < 1e-5, "lam0={lam0} err={prev}");
        }
    }

    #[test]
    fn log_prox_zero_branch_value() {
        let out = prox_vp_log(&ProxInput::new(0.0, 1.0, 0.1, 0.1, 1.0)).unwrap();
        assert_eq!(out.beta_star, 0.0);
        assert!((out.lam_star - (1.0 + 1.4f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_prox_nonzero_branch_stationarity() {
        let input = ProxInput::new(10.0, 1.0, 0.1, 0.1, 1.0);
        let out = prox_vp_log(&input).unwrap();
        let resid = out.beta_star.abs() + (out.lam_star - input.lam0) / input.s_lam - input.a / out.lam_star;
        assert!(resid.abs() < 1e-10, "resid {resid}");
        assert!((out.beta_star - 9.968).abs() < 1e-3);
        assert!((out.lam_star - 0.3178).abs() < 1e-4);
    }

    #[test]
    fn log_prox_negative_lambda_input() {
        for &lam0 in &[-0.5, -5.0, -1e6] {
            let out = prox_vp_log(&ProxInput::new(1.0, lam0, 0.1, 0.1, 1.0)).unwrap();
            assert!(out.lam_star > 0.0, "lam0={lam0} gave {}", out.lam_star);
        }
    }

    #[test]
    fn quadratic_roots_cover_degenerate_cases() {
        assert_eq!(quadratic_roots(0.0, 2.0, -4.0), [Some(2.0), None]);
        assert_eq!(quadratic_roots(1.0, 0.0, 1.0), [None, None]);
        let [r1, r2] = quadratic_roots(1.0, -3.0, 2.0);
        let mut r = [r1.unwrap(), r2.unwrap()];
        r.sort_by(f64::total_cmp);
        assert_eq!(r, [1.0, 2.0]);
    }
}
