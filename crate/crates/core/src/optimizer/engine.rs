use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::{ConvergedReason, FitResult, OptimizerConfig, ParamState};
use crate::design::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::Family;
use crate::model::{data_term, DataTerm};
use crate::objective::PenaltyConfig;
use crate::prior::{grad_log_prior_unchecked, log_prior_unchecked, PriorSpec};
use crate::prox::{prox_log_unchecked, ProxInput};

pub(super) fn holdout_count(n: usize, opt: &OptimizerConfig) -> usize {
    let h = opt.holdout_rows(n);
    if h >= n {
        0
    } else {
        h
    }
}

/// Seeded train/holdout split; both index lists sorted.
pub(crate) fn split_rows(n: usize, holdout: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    if holdout == 0 {
        return ((0..n).collect(), Vec::new());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut hold = idx[..holdout].to_vec();
    let mut train = idx[holdout..].to_vec();
    hold.sort_unstable();
    train.sort_unstable();
    (train, hold)
}

/// Training/holdout view of a problem plus everything needed to evaluate
/// the τ-divided objective.
pub(crate) struct Problem<'a> {
    pub train: Dataset,
    pub holdout: Option<Dataset>,
    pub fam: Family,
    pub spec: &'a PriorSpec,
    pub pen: PenaltyConfig,
}

pub(crate) struct Eval {
    pub objective: f64,
    pub data: DataTerm,
}

/// Smooth-part gradient laid out as `[β | λ | log γ | intercept? | log α?]`.
pub(crate) struct Layout {
    pub p: usize,
    pub g: usize,
    pub intercept: bool,
    pub aux: bool,
}

impl Layout {
    pub fn len(&self) -> usize {
        2 * self.p + self.g + self.intercept as usize + self.aux as usize
    }
    fn intercept_at(&self) -> usize {
        2 * self.p + self.g
    }
    fn aux_at(&self) -> usize {
        self.intercept_at() + self.intercept as usize
    }
}

impl<'a> Problem<'a> {
    pub fn new(
        ds: &Dataset,
        fam: &Family,
        spec: &'a PriorSpec,
        pen: &PenaltyConfig,
        opt: &OptimizerConfig,
    ) -> Result<Self> {
        ds.validate()?;
        fam.validate()?;
        fam.check_response(ds.y.view())?;
        spec.validate(ds.n_pred())?;
        pen.validate()?;
        opt.validate()?;
        let h = holdout_count(ds.n_obs(), opt);
        let (train, holdout) = if h == 0 {
            (ds.clone(), None)
        } else {
            let (tr, ho) = split_rows(ds.n_obs(), h, opt.seed);
            (ds.subset(&tr), Some(ds.subset(&ho)))
        };
        Ok(Self { train, holdout, fam: *fam, spec, pen: *pen })
    }

    pub fn layout(&self) -> Layout {
        Layout {
            p: self.train.n_pred(),
            g: self.spec.n_gamma(),
            intercept: self.train.intercept,
            aux: self.fam.has_free_aux(),
        }
    }

    pub fn n_train(&self) -> f64 {
        self.train.n_obs() as f64
    }

    pub fn data(&self, x: &ParamState, rows: Option<&[usize]>, grad: bool) -> DataTerm {
        data_term(&x.family(&self.fam), &self.train, rows, x.beta.view(), x.intercept, grad)
    }

    pub fn objective_from(&self, x: &ParamState, mean_nll: f64) -> f64 {
        let lam = x.lam.as_slice().expect("contiguous");
        let lp = log_prior_unchecked(self.spec, lam, x.gamma.as_slice().expect("contiguous"));
        let pen: f64 =
            x.beta.iter().zip(lam).map(|(b, &l)| l * b.abs() - self.pen.barrier_a * l.ln()).sum();
        self.n_train() / self.pen.tau * mean_nll + pen - lp / self.pen.tau
    }

    pub fn evaluate(&self, x: &ParamState, grad: bool) -> Eval {
        let data = self.data(x, None, grad);
        Eval { objective: self.objective_from(x, data.mean_nll), data }
    }

    pub fn heldout_nll(&self, x: &ParamState) -> Option<f64> {
        self.holdout
            .as_ref()
            .map(|h| data_term(&x.family(&self.fam), h, None, x.beta.view(), x.intercept, false).mean_nll)
    }

    /// Data-term part of the smooth gradient; prior coordinates are zeroed.
    pub fn data_grad(&self, data: &DataTerm, out: &mut [f64]) {
        let lay = self.layout();
        let scale = self.n_train() / self.pen.tau;
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..lay.p {
            out[j] = scale * data.grad_beta[j];
        }
        if lay.intercept {
            out[lay.intercept_at()] = scale * data.grad_intercept;
        }
        if lay.aux {
            out[lay.aux_at()] = scale * data.grad_log_aux;
        }
    }

    /// Adds the gradient of `−(1/τ)·log p(λ, γ)`, with γ on the log scale.
    pub fn add_prior_grad(&self, x: &ParamState, out: &mut [f64]) {
        let lay = self.layout();
        let inv_tau = 1.0 / self.pen.tau;
        let pg = grad_log_prior_unchecked(
            self.spec,
            x.lam.as_slice().expect("contiguous"),
            x.gamma.as_slice().expect("contiguous"),
        );
        for j in 0..lay.p {
            out[lay.p + j] -= inv_tau * pg.dlam[j];
        }
        for k in 0..lay.g {
            out[2 * lay.p + k] -= inv_tau * pg.dgamma[k] * x.gamma[k];
        }
    }

    /// Gradient used for the preconditioner scale: on λ coordinates the
    /// λ-partial `|β| − a/λ` of the nonsmooth term is added, so a coordinate
    /// whose smooth gradient vanishes does not get an unbounded prox step.
    pub fn scale_grad(&self, x: &ParamState, grad: &[f64], out: &mut [f64]) {
        let lay = self.layout();
        out.copy_from_slice(grad);
        for j in 0..lay.p {
            out[lay.p + j] += x.beta[j].abs() - self.pen.barrier_a / x.lam[j];
        }
    }

    pub fn smooth_grad(&self, x: &ParamState, data: &DataTerm, out: &mut [f64]) {
        self.data_grad(data, out);
        self.add_prior_grad(x, out);
    }

    /// `x ← prox(x − steps ⊙ dir)` with per-coordinate steps.
    pub fn prox_step(&self, x: &mut ParamState, dir: &[f64], steps: &[f64]) {
        let lay = self.layout();
        let a = self.pen.barrier_a;
        for j in 0..lay.p {
            let (sb, sl) = (steps[j], steps[lay.p + j]);
            let out = prox_log_unchecked(&ProxInput::new(
                x.beta[j] - sb * dir[j],
                x.lam[j] - sl * dir[lay.p + j],
                sb,
                sl,
                a,
            ));
            x.beta[j] = out.beta_star;
            x.lam[j] = out.lam_star;
        }
        for k in 0..lay.g {
            let i = 2 * lay.p + k;
            x.gamma[k] = (x.gamma[k].ln() - steps[i] * dir[i]).exp();
        }
        if lay.intercept {
            let i = lay.intercept_at();
            x.intercept -= steps[i] * dir[i];
        }
        if lay.aux {
            let i = lay.aux_at();
            if let Some(la) = x.log_aux.as_mut() {
                *la -= steps[i] * dir[i];
            }
        }
    }
}

fn state_is_finite(x: &ParamState) -> bool {
    x.beta.iter().chain(x.lam.iter()).chain(x.gamma.iter()).all(|v| v.is_finite())
        && x.intercept.is_finite()
        && x.log_aux.is_none_or(f64::is_finite)
}

/// Shared driver. `epoch = None` is full batch; `Some(m)` runs SVRG with `m`
/// inner steps per anchor. At the anchor itself the variance-reduced gradient
/// equals the full gradient, so the first inner step reuses it.
pub(super) fn run(
    ds: &Dataset,
    fam: &Family,
    spec: &PriorSpec,
    pen: &PenaltyConfig,
    opt: &OptimizerConfig,
    init: Option<ParamState>,
    epoch: Option<usize>,
) -> Result<FitResult> {
    let prob = Problem::new(ds, fam, spec, pen, opt)?;
    let lay = prob.layout();
    let mut x = init.unwrap_or_else(|| ParamState::initial(lay.p, lay.g, fam));
    x.check_dims(lay.p, lay.g)?;
    if fam.has_free_aux() && x.log_aux.is_none() {
        x.log_aux = Some(fam.aux().expect("free aux").ln());
    }
    if !ds.intercept {
        x.intercept = 0.0;
    }

    let n_train = prob.train.n_obs();
    let inner = epoch.unwrap_or(1);
    let batch = opt.minibatch.min(n_train);
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed.wrapping_add(0x5eed));
    let mut adam = Adam::new(lay.len(), opt.step, opt.adam_beta1, opt.adam_beta2, opt.adam_eps);
    let n = lay.len();
    let (mut grad, mut dir, mut steps) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut mu = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut sgrad = vec![0.0; n];

    let mut objective_trace = Vec::new();
    let mut heldout_trace = Vec::new();
    let mut best: Option<(f64, ParamState, f64, Option<f64>)> = None;
    let mut since = 0usize;
    let mut it = 0usize;
    let mut last_finite = x.clone();

    let reason = loop {
        let ev = prob.evaluate(&x, true);
        if !ev.objective.is_finite() || !state_is_finite(&x) {
            return Err(Error::Diverged { iteration: it, objective: ev.objective, last_state: Box::new(last_finite) });
        }
        last_finite = x.clone();
        objective_trace.push(ev.objective);
        let held = prob.heldout_nll(&x);
        if let Some(h) = held {
            heldout_trace.push(h);
        }
        let monitor = held.unwrap_or(ev.objective);
        if opt.progress_every > 0 && (it % opt.progress_every < inner) {
            eprintln!(
                "iter {it:>7}  objective {:.8e}  heldout_nll {}  nnz {}",
                ev.objective,
                held.map_or("-".to_string(), |h| format!("{h:.6e}")),
                x.nonzeros()
            );
        }
        // The initial state is not an iterate of this objective (it may be a
        // warm start from another τ), so it only counts when nothing else will.
        let eligible = it > 0 || opt.max_iters == 0;
        match &best {
            Some((b, ..)) if monitor >= *b => {}
            _ if !eligible => {}
            _ => {
                best = Some((monitor, x.clone(), ev.data.mean_nll, held));
                since = 0;
            }
        }
        if since >= opt.patience {
            break ConvergedReason::Patience;
        }
        if it >= opt.max_iters {
            break ConvergedReason::MaxIters;
        }

        prob.data_grad(&ev.data, &mut mu);
        let anchor = (inner > 1).then(|| x.clone());
        for k in 0..inner {
            if it >= opt.max_iters {
                break;
            }
            if k == 0 {
                grad.copy_from_slice(&mu);
            } else {
                let anchor = anchor.as_ref().expect("svrg anchor");
                let mut rows = index::sample(&mut rng, n_train, batch).into_vec();
                rows.sort_unstable();
                prob.data_grad(&prob.data(&x, Some(&rows), true), &mut grad);
                prob.data_grad(&prob.data(anchor, Some(&rows), true), &mut tmp);
                for i in 0..n {
                    grad[i] = grad[i] - tmp[i] + mu[i];
                }
            }
            prob.add_prior_grad(&x, &mut grad);
            prob.scale_grad(&x, &grad, &mut sgrad);
            adam.update(&grad, &sgrad, &mut dir, &mut steps);
            prob.prox_step(&mut x, &dir, &steps);
            it += 1;
            since += 1;
        }
    };

    let (_, state, train_nll, heldout_nll) = best.expect("at least one evaluation");
    Ok(FitResult { state, objective_trace, heldout_trace, iterations: it, converged_reason: reason, heldout_nll, train_nll })
}
