//! Monotone-descent check for plain (unpreconditioned) proximal gradient.
//!
//! With a step below `1/l`, where the smooth part's Hessian spectrum lies in
//! `[−l, l]`, the iteration is a descent method even though the penalty is
//! nonconvex. `l` is estimated by power iteration on finite-difference
//! Hessian-vector products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::Problem;
use super::{OptimizerConfig, ParamState};
use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::objective::PenaltyConfig;
use crate::prior::PriorSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentReport {
    pub step: f64,
    pub objective_trace: Vec<f64>,
    /// Iterations whose objective rose by more than `1e-12·max(1, |F|)`.
    pub violations: usize,
    pub max_increase: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn full_batch_problem<'a>(
    ds: &Dataset,
    fam: &Family,
    spec: &'a PriorSpec,
    pen: &PenaltyConfig,
) -> Result<Problem<'a>> {
    let opt = OptimizerConfig { holdout: Some(0), ..OptimizerConfig::default() };
    Problem::new(ds, fam, spec, pen, &opt)
}

fn smooth_gradient(prob: &Problem, x: &ParamState) -> Vec<f64> {
    let mut g = vec![0.0; prob.layout().len()];
    let data = prob.data(x, None, true);
    prob.smooth_grad(x, &data, &mut g);
    g
}

/// `x + h·v` in the flat layout (γ moves on the log scale).
fn shifted(prob: &Problem, x: &ParamState, v: &[f64], h: f64) -> ParamState {
    let lay = prob.layout();
    let mut y = x.clone();
    for j in 0..lay.p {
        y.beta[j] += h * v[j];
        y.lam[j] += h * v[lay.p + j];
    }
    for k in 0..lay.g {
        y.gamma[k] = (y.gamma[k].ln() + h * v[2 * lay.p + k]).exp();
    }
    let mut i = 2 * lay.p + lay.g;
    if lay.intercept {
        y.intercept += h * v[i];
        i += 1;
    }
    if lay.aux {
        if let Some(la) = y.log_aux.as_mut() {
            *la += h * v[i];
        }
    }
    y
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn estimate_on(prob: &Problem, x: &ParamState) -> f64 {
    let n = prob.layout().len();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let min_lam = x.lam.iter().cloned().fold(f64::INFINITY, f64::min);
    let h = 1e-5 * min_lam.min(1.0);
    let mut est = 0.0;
    for _ in 0..200 {
        let gp = smooth_gradient(prob, &shifted(prob, x, &v, h));
        let gm = smooth_gradient(prob, &shifted(prob, x, &v, -h));
        let hv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let nh = norm(&hv);
        if nh == 0.0 {
            return 0.0;
        }
        let converged = (nh - est).abs() <= 1e-10 * nh;
        est = nh;
        v = hv.into_iter().map(|a| a / nh).collect();
        if converged {
            break;
        }
    }
    est
}

/// Largest Hessian eigenvalue magnitude of the smooth part at `state`.
pub fn estimate_smoothness(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    state: &ParamState,
) -> Result<f64> {
    let prob = full_batch_problem(ds, fam, spec, pen)?;
    let lay = prob.layout();
    state.check_dims(lay.p, lay.g)?;
    Ok(estimate_on(&prob, state))
}

/// Runs `iters` iterations of proximal gradient with a constant step on
/// every coordinate, from `init` (default `β = 0, λ = 1, γ = 1`), and
/// records any objective increase.
pub fn descent_check(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    step: f64,
    iters: usize,
    init: Option<ParamState>,
) -> Result<DescentReport> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    let prob = full_batch_problem(ds, fam, spec, pen)?;
    let lay = prob.layout();
    let mut x = init.unwrap_or_else(|| ParamState::initial(lay.p, lay.g, fam));
    x.check_dims(lay.p, lay.g)?;
    let steps = vec![step; lay.len()];
    let mut grad = vec![0.0; lay.len()];
    let mut trace = Vec::with_capacity(iters + 1);
    let mut ev = prob.evaluate(&x, true);
    trace.push(ev.objective);
    let (mut violations, mut max_increase) = (0, f64::NEG_INFINITY);
    for _ in 0..iters {
        prob.smooth_grad(&x, &ev.data, &mut grad);
        prob.prox_step(&mut x, &grad, &steps);
        let next = prob.evaluate(&x, true);
        let inc = next.objective - ev.objective;
        max_increase = max_increase.max(inc);
        if !(inc <= 1e-12 * ev.objective.abs().max(1.0)) {
            violations += 1;
        }
        trace.push(next.objective);
        ev = next;
    }
    Ok(DescentReport { step, objective_trace: trace, violations, max_increase })
}
