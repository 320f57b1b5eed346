mod common;

use common::{cd_weighted_lasso, gaussian_design, lasso_baseline, least_squares};
use ndarray::{Array1, Array2};
use proxlasso_core::optimizer::{descent_check, estimate_smoothness, lambda_block_update, weighted_lasso};
use proxlasso_core::{
    fit, fit_bcd_reweighted, fit_svrg, generate, joint_objective, Dataset, Family, OptimizerConfig, ParamState,
    PenaltyConfig, PriorSpec, Structure, SynthSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAUSS: Family = Family::Gaussian { sigma: 1.0 };

fn toy(n: usize, p: usize, beta: &[f64], seed: u64) -> Dataset {
    let x = gaussian_design(n, p, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
    let b = Array1::from_iter((0..p).map(|j| beta.get(j).copied().unwrap_or(0.0)));
    let y = x.dot(&b) + Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(rand_distr::StandardNormal));
    Dataset::new(x, y).unwrap()
}

#[test]
fn objective_at_the_initial_state() {
    let ds = toy(50, 4, &[1.0], 1);
    let tau = 7.0;
    let state = ParamState::initial(4, 0, &GAUSS);
    let got = joint_objective(&state, &PenaltyConfig::new(tau).unwrap(), &PriorSpec::independent(), &GAUSS, &ds).unwrap();
    let mean_nll = ds.y.iter().map(|y| 0.5 * y * y).sum::<f64>() / 50.0 + 0.5 * (2.0 * std::f64::consts::PI).ln();
    let want = 50.0 / tau * mean_nll - 4.0 * (1.0 / std::f64::consts::PI).ln() / tau;
    assert!((got - want).abs() < 1e-10 * want.abs(), "{got} vs {want}");
}

#[test]
fn huge_tau_zeroes_every_coefficient() {
    let ds = toy(200, 10, &[2.0, -1.5, 1.0], 3);
    let pen = PenaltyConfig::new(1e6 * 200.0).unwrap();
    let opt = OptimizerConfig { max_iters: 2000, ..Default::default() };
    let res = fit(&ds, &GAUSS, &PriorSpec::independent(), &pen, &opt, None).unwrap();
    assert!(res.state.beta.iter().all(|b| *b == 0.0), "{:?}", res.state.beta);
}

#[test]
fn small_tau_approaches_least_squares() {
    let beta = [2.0, -1.5, 1.0, 0.5, -2.5];
    let ds = toy(2000, 5, &beta, 4);
    let x = match &ds.design {
        proxlasso_core::Design::Dense(x) => x.clone(),
        _ => unreachable!(),
    };
    let (ls, _) = least_squares(&x, &ds.y, false);
    let pen = PenaltyConfig::new(1e-6).unwrap();
    let opt = OptimizerConfig { step: 1e-3, holdout: Some(0), max_iters: 20_000, patience: 2000, ..Default::default() };
    let res = fit(&ds, &GAUSS, &PriorSpec::independent(), &pen, &opt, None).unwrap();
    let err = (&res.state.beta - &ls).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err < 1e-3, "max deviation from least squares {err}");
}

#[test]
fn fits_are_deterministic_and_keep_weights_positive() {
    let ds = toy(300, 8, &[1.0, 0.0, -2.0], 5);
    let pen = PenaltyConfig::per_observation(0.25, 300).unwrap();
    let opt = OptimizerConfig { max_iters: 1500, seed: 11, ..Default::default() };
    let spec = PriorSpec::independent();
    let a = fit(&ds, &GAUSS, &spec, &pen, &opt, None).unwrap();
    let b = fit(&ds, &GAUSS, &spec, &pen, &opt, None).unwrap();
    assert_eq!(a, b);
    assert!(a.state.lam.iter().all(|l| *l > 0.0));
    assert!(a.objective_trace.iter().all(|v| v.is_finite()));
    assert!(a.state.beta.iter().any(|b| *b == 0.0));
    let sa = fit_svrg(&ds, &GAUSS, &spec, &pen, &OptimizerConfig { minibatch: 64, ..opt.clone() }, None, None).unwrap();
    let sb = fit_svrg(&ds, &GAUSS, &spec, &pen, &OptimizerConfig { minibatch: 64, ..opt }, None, None).unwrap();
    assert_eq!(sa, sb);
    assert!(sa.state.lam.iter().all(|l| *l > 0.0));
}

#[test]
fn svrg_with_full_minibatch_and_one_inner_step_matches_full_batch() {
    let ds = toy(150, 6, &[1.0, -1.0], 6);
    let pen = PenaltyConfig::per_observation(0.05, 150).unwrap();
    let spec = PriorSpec::independent();
    let opt = OptimizerConfig { max_iters: 400, minibatch: 150, holdout: Some(0), seed: 3, ..Default::default() };
    let full = fit(&ds, &GAUSS, &spec, &pen, &opt, None).unwrap();
    let svrg = fit_svrg(&ds, &GAUSS, &spec, &pen, &opt, None, Some(1)).unwrap();
    assert_eq!(full.objective_trace, svrg.objective_trace);
    assert_eq!(full.state, svrg.state);
}

#[test]
fn lambda_block_identity_and_large_eps_limit() {
    let b = Array1::from(vec![0.0, 1e-12, -3.0, 7.5, 1e8]);
    for eps in [1e-3, 0.5, 10.0] {
        let l = lambda_block_update(&b, eps);
        for (bi, li) in b.iter().zip(&l) {
            assert!((li * (bi.abs() + eps) - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }
    assert!(lambda_block_update(&b, 1e12).iter().all(|l| *l < 1e-3));
}

#[test]
fn bcd_satisfies_lambda_stationarity() {
    let ds = toy(200, 8, &[2.0, 0.0, -1.0], 7);
    let pen = PenaltyConfig::new(5.0).unwrap();
    let opt = OptimizerConfig { max_iters: 200, ..Default::default() };
    let res = fit_bcd_reweighted(&ds, &GAUSS, 0.1, &pen, &opt, None).unwrap();
    for (b, l) in res.state.beta.iter().zip(&res.state.lam) {
        assert!((l * (b.abs() + 0.1) - 1.0).abs() <= 4.0 * f64::EPSILON);
    }
    assert_eq!(res.converged_reason, proxlasso_core::ConvergedReason::Tolerance);
}

#[test]
fn one_and_a_half_bcd_steps_match_adaptive_lasso() {
    let n = 200;
    let ds = toy(n, 6, &[2.0, -1.0, 0.5, 0.0, 0.0, 0.0], 8);
    let x = match &ds.design {
        proxlasso_core::Design::Dense(x) => x.clone(),
        _ => unreachable!(),
    };
    let (ls, _) = least_squares(&x, &ds.y, false);
    let tau = 2.0;
    let init = ParamState { beta: ls.clone(), lam: Array1::from_elem(6, 1.0), ..ParamState::initial(6, 0, &GAUSS) };
    // Half a step: the λ-block from the least-squares start; one step: the β-block.
    let lam = lambda_block_update(&init.beta, 0.0);
    let w: Vec<f64> = lam.to_vec();
    let lib = weighted_lasso(&ds, &GAUSS, tau, &w, Some(&ls), 0.0, 1e-13, 200_000).unwrap();
    assert!(lib.converged);
    // Gaussian σ = 1: (N/τ)·mean_nll = (1/τ)·Σ½r² + const.
    let (oracle, _) = cd_weighted_lasso(&x, &ds.y, tau, &w, false);
    let err = (&lib.beta - &oracle).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err < 1e-6, "{err}: {:?} vs {:?}", lib.beta, oracle);
    assert!(lib.beta.iter().any(|b| *b == 0.0));
}

#[test]
fn weighted_lasso_matches_coordinate_descent_with_intercept() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..5 {
        let ds = toy(120, 7, &[1.5, 0.0, -0.7], 20 + seed);
        let ds = Dataset { y: ds.y.mapv(|v| v + 3.0), ..ds }.with_intercept(true);
        let x = match &ds.design {
            proxlasso_core::Design::Dense(x) => x.clone(),
            _ => unreachable!(),
        };
        let w: Vec<f64> = (0..7).map(|_| rng.gen_range(0.1..3.0)).collect();
        let tau = rng.gen_range(1.0..20.0);
        let lib = weighted_lasso(&ds, &GAUSS, tau, &w, None, 0.0, 1e-13, 200_000).unwrap();
        let (oracle, b0) = cd_weighted_lasso(&x, &ds.y, tau, &w, true);
        let err = (&lib.beta - &oracle).iter().fold((lib.intercept - b0).abs(), |m, v| m.max(v.abs()));
        assert!(err < 1e-6, "seed {seed}: {err}");
    }
}

#[test]
fn descent_holds_at_half_inverse_smoothness() {
    let ds = toy(200, 10, &[1.0, -2.0, 0.5], 10);
    let pen = PenaltyConfig::per_observation(0.025, 200).unwrap();
    let spec = PriorSpec::independent();
    let init = ParamState::initial(10, 0, &GAUSS);
    let l = estimate_smoothness(&ds, &GAUSS, &spec, &pen, &init).unwrap();
    let rep = descent_check(&ds, &GAUSS, &spec, &pen, 0.5 / l, 1000, None).unwrap();
    assert!(rep.passed(), "{} violations, max increase {:e}", rep.violations, rep.max_increase);
    assert_eq!(rep.objective_trace.len(), 1001);
    assert!(rep.objective_trace.last().unwrap() < &rep.objective_trace[0]);
}

#[test]
fn descent_on_one_dimensional_quadratic() {
    // Single row x = 2, y = 3: smooth part (N/τ)·½(3 − 2β)² has curvature 4/τ in β.
    let ds = Dataset::new(Array2::from_elem((1, 1), 2.0), Array1::from(vec![3.0])).unwrap();
    let pen = PenaltyConfig::new(1.0).unwrap();
    let spec = PriorSpec::independent();
    let rep = descent_check(&ds, &GAUSS, &spec, &pen, 0.1, 1000, None).unwrap();
    assert!(rep.passed());
}

fn active_rel_err(syn: &proxlasso_core::Synthetic, b: &Array1<f64>) -> f64 {
    let s = syn.support();
    let num: f64 = s.iter().map(|&j| (b[j] - syn.beta[j]).powi(2)).sum();
    let den: f64 = s.iter().map(|&j| syn.beta[j].powi(2)).sum();
    (num / den).sqrt()
}

#[test]
fn keeps_the_true_support_and_beats_the_lasso() {
    let spec = SynthSpec::new(GAUSS, Structure::Independent, 200, 10, 3, 1);
    let syn = generate(&spec).unwrap();
    let ds = syn.dataset.clone();
    let pen = PenaltyConfig::per_observation(0.025, 200).unwrap();
    // A 20-row early-stopping holdout is too noisy at this size; judge the
    // penalized estimate itself.
    let opt = OptimizerConfig { max_iters: 10_000, seed: 1, holdout: Some(0), ..Default::default() };
    let res = fit(&ds, &GAUSS, &PriorSpec::independent(), &pen, &opt, None).unwrap();
    assert!(syn.support().iter().all(|&j| res.state.beta[j] != 0.0));
    let ours = active_rel_err(&syn, &res.state.beta);
    let best_lasso = active_rel_err(&syn, &lasso_baseline(&ds, &GAUSS));
    assert!(ours < best_lasso, "ours {ours}, best lasso {best_lasso}");
}

#[test]
fn recovers_the_exact_support_when_the_threshold_clears_the_noise() {
    // Null coefficients have least-squares noise ≈ 1/√N and τλ_a/N is the
    // threshold at the origin in coefficient units.
    let spec = SynthSpec::new(GAUSS, Structure::Independent, 200, 10, 3, 1);
    let syn = generate(&spec).unwrap();
    let pen = PenaltyConfig::per_observation(0.1, 200).unwrap();
    let opt = OptimizerConfig { max_iters: 10_000, seed: 1, ..Default::default() };
    let res = fit(&syn.dataset, &GAUSS, &PriorSpec::independent(), &pen, &opt, None).unwrap();
    let support: Vec<usize> = (0..10).filter(|&j| res.state.beta[j] != 0.0).collect();
    assert_eq!(support, syn.support());
}

#[test]
fn invalid_configurations_rejected() {
    let ds = toy(40, 3, &[1.0], 12);
    let pen = PenaltyConfig::new(1.0).unwrap();
    let spec = PriorSpec::independent();
    let bad = OptimizerConfig { step: 0.0, ..Default::default() };
    assert!(fit(&ds, &GAUSS, &spec, &pen, &bad, None).is_err());
    assert!(PenaltyConfig::new(-1.0).is_err());
    let wrong = ParamState::initial(5, 0, &GAUSS);
    assert!(fit(&ds, &GAUSS, &spec, &pen, &OptimizerConfig::default(), Some(wrong)).is_err());
    let bern = Dataset::new(Array2::zeros((3, 1)), Array1::from(vec![0.0, 2.0, 1.0])).unwrap();
    assert!(fit(&bern, &Family::BernoulliLogit, &spec, &pen, &OptimizerConfig::default(), None).is_err());
    assert!(fit_bcd_reweighted(&ds, &GAUSS, 0.0, &pen, &OptimizerConfig::default(), None).is_err());
}

#[test]
fn every_family_fits_without_error() {
    let n = 1000;
    let x = gaussian_design(n, 5, 13);
    let eta = x.column(0).mapv(|v| 0.8 * v) - x.column(1).mapv(|v| 0.5 * v);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let families = [
        (GAUSS, eta.mapv(|e| e + rng.gen_range(-1.0..1.0))),
        (Family::BernoulliLogit, eta.mapv(|e| (rng.gen::<f64>() < 1.0 / (1.0 + (-e).exp())) as u8 as f64)),
        (Family::PoissonLog, eta.mapv(|e| rand_distr::Distribution::sample(&rand_distr::Poisson::new(e.exp()).unwrap(), &mut rng))),
        (Family::NegbinLog { alpha: 2.0 }, eta.mapv(|e| rand_distr::Distribution::sample(&rand_distr::Poisson::new(e.exp()).unwrap(), &mut rng))),
        (Family::Cauchy { scale: 1.0 }, eta.mapv(|e| e + rng.gen_range(-1.0..1.0))),
    ];
    for (fam, y) in families {
        let ds = Dataset::new(x.clone(), y).unwrap().with_intercept(true);
        let pen = PenaltyConfig::per_observation(0.025, n).unwrap();
        let res = fit(&ds, &fam, &PriorSpec::independent(), &pen, &OptimizerConfig { max_iters: 1500, ..Default::default() }, None).unwrap();
        assert!(res.objective_trace.iter().all(|v| v.is_finite()), "{fam:?}");
        assert!(res.state.beta[0] > 0.3 && res.state.beta[1] < -0.1, "{fam:?}: {:?}", res.state.beta);
        assert_eq!(res.state.log_aux.is_some(), fam.has_free_aux());
    }
}
