//! Random instances and finite-difference error measures for the gradient
//! checks.

use ndarray::{Array1, Array2};
use proxlasso_core::groups::GroupStructure;
use proxlasso_core::likelihood::{grad_nll, nll};
use proxlasso_core::prior::{grad_log_prior, log_prior};
use proxlasso_core::{Family, LinearModelData, PriorKind, PriorSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{central_diff, rel_err};

pub fn random_family(kind: usize, rng: &mut ChaCha8Rng) -> Family {
    match kind {
        0 => Family::Gaussian { sigma: rng.gen_range(0.5..2.0) },
        1 => Family::BernoulliLogit,
        2 => Family::PoissonLog,
        3 => Family::NegbinLog { alpha: rng.gen_range(0.5..5.0) },
        _ => Family::Cauchy { scale: rng.gen_range(0.5..2.0) },
    }
}

pub fn random_instance(fam: &Family, rng: &mut ChaCha8Rng) -> (LinearModelData, Array1<f64>) {
    let (n, p) = (20, 5);
    let x = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
    let y = Array1::from_shape_fn(n, |_| match fam {
        Family::BernoulliLogit => rng.gen_range(0..2) as f64,
        Family::PoissonLog | Family::NegbinLog { .. } => rng.gen_range(0..8) as f64,
        _ => rng.gen_range(-3.0..3.0),
    });
    let beta = Array1::from_shape_fn(p, |_| rng.gen_range(-0.7..0.7));
    (LinearModelData::new(x, y).unwrap(), beta)
}

/// Worst relative error of the analytic gradient against this file's own
/// central differences, including `log α` for Negative Binomial.
pub fn fd_error(fam: &Family, data: &LinearModelData, beta: &Array1<f64>) -> f64 {
    let g = grad_nll(fam, data, beta.view()).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..beta.len() {
        let f = |t: f64| {
            let mut b = beta.clone();
            b[j] = t;
            nll(fam, data, b.view()).unwrap()
        };
        worst = worst.max(rel_err(g.beta[j], central_diff(f, beta[j], 1e-6)));
    }
    if let Family::NegbinLog { alpha } = *fam {
        let f = |la: f64| nll(&Family::NegbinLog { alpha: la.exp() }, data, beta.view()).unwrap();
        worst = worst.max(rel_err(g.log_aux.unwrap(), central_diff(f, alpha.ln(), 1e-6)));
    }
    worst
}

pub fn random_prior(kind: PriorKind, rng: &mut ChaCha8Rng) -> (PriorSpec, Vec<f64>, Vec<f64>) {
    let p = 12;
    let n_obs = rng.gen_range(10..400);
    let spec = match kind {
        PriorKind::IndependentHalfCauchy => PriorSpec::independent(),
        PriorKind::SparseGroup => PriorSpec::sparse_group(GroupStructure::contiguous(p, 4).unwrap(), n_obs).unwrap(),
        PriorKind::OverlappingGroup => {
            let groups: Vec<Vec<usize>> = vec![(0..6).collect(), (4..10).collect(), (8..12).chain(0..2).collect(), vec![3, 7, 11]];
            PriorSpec::overlapping_group(GroupStructure::from_groups(p, &groups).unwrap(), n_obs).unwrap()
        }
    };
    let g = spec.n_gamma();
    let gamma: Vec<f64> = (0..g).map(|_| rng.gen_range(0.05..3.0)).collect();
    // λ near its group location so the tight conditional densities are
    // evaluated where their derivatives are O(1/σ²), not astronomically large.
    let lam: Vec<f64> = (0..p)
        .map(|j| match kind {
            PriorKind::IndependentHalfCauchy => rng.gen_range(0.01..5.0),
            _ => {
                let gi = spec.groups.as_ref().unwrap().groups_of(j)[0];
                (gamma[gi] + rng.gen_range(-2.0..2.0) * spec.group_scale).abs().max(1e-3)
            }
        })
        .collect();
    (spec, lam, gamma)
}

/// Worst relative error of the prior gradient (λ and γ) against central
/// differences.
pub fn prior_fd_error(spec: &PriorSpec, lam: &[f64], gamma: &[f64]) -> f64 {
    let g = grad_log_prior(spec, lam, gamma).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..lam.len() {
        let h = 1e-6 * lam[j].max(1e-2);
        let f = |t: f64| {
            let mut l = lam.to_vec();
            l[j] = t;
            log_prior(spec, &l, gamma).unwrap()
        };
        worst = worst.max(rel_err(g.dlam[j], central_diff(f, lam[j], h)));
    }
    for k in 0..gamma.len() {
        let h = 1e-6 * gamma[k];
        let f = |t: f64| {
            let mut gm = gamma.to_vec();
            gm[k] = t;
            log_prior(spec, lam, &gm).unwrap()
        };
        worst = worst.max(rel_err(g.dgamma[k], central_diff(f, gamma[k], h)));
    }
    worst
}
