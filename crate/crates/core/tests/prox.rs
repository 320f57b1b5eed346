mod common;

use common::{golden, grid_prox, prox_cost, random_prox_input};
use proptest::prelude::*;
use proxlasso_core::prox::prox_in_place;
use proxlasso_core::{prox, prox_vp, prox_vp_log, reduced_prox, sto, Error, ProxInput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn sto_matches_one_dimensional_grid() {
    for &(x, s, lam) in &[(3.0, 1.0, 1.0), (0.5, 1.0, 1.0), (-3.0, 1.0, 1.0), (1.7, 0.3, 2.0)] {
        let (u, _) = golden(|u: f64| lam * u.abs() + (u - x).powi(2) / (2.0 * s), -5.0, 5.0, 200);
        let got = sto(x, s, lam).unwrap();
        assert!((got - u).abs() < 1e-7, "sto({x},{s},{lam}) = {got}, grid {u}");
    }
    assert_eq!(sto(3.0, 1.0, 1.0).unwrap(), 2.0);
    assert_eq!(sto(-3.0, 1.0, 1.0).unwrap(), -2.0);
}

#[test]
fn prox_vp_worked_examples() {
    let cases = [
        ((1.0, 1.0, 0.5, 0.5), (2.0 / 3.0, 2.0 / 3.0)),
        ((1.0, 2.0, 1.0, 0.5), (0.0, 2.0)),
        ((0.0, 0.7, 0.4, 1.9), (0.0, 0.7)),
        ((1.0, 3.0, 2.0, 2.0), (0.0, 3.0)),
    ];
    for ((b0, l0, sb, sl), (eb, el)) in cases {
        let inp = ProxInput::new(b0, l0, sb, sl, 0.0);
        let out = prox_vp(&inp).unwrap();
        assert!((out.beta_star - eb).abs() < 1e-12 && (out.lam_star - el).abs() < 1e-12, "{inp:?} → {out:?}");
        let (gb, gl, gc) = grid_prox(&inp);
        assert!((out.cost - gc).abs() < 1e-9, "{inp:?}: cost {} vs grid {gc} at ({gb}, {gl})", out.cost);
    }
}

#[test]
fn prox_vp_log_worked_examples() {
    let z = prox_vp_log(&ProxInput::new(0.0, 1.0, 0.1, 0.1, 1.0)).unwrap();
    assert_eq!(z.beta_star, 0.0);
    assert!((z.lam_star - (1.0 + 1.4f64.sqrt()) / 2.0).abs() < 1e-12);

    let inp = ProxInput::new(10.0, 1.0, 0.1, 0.1, 1.0);
    let nz = prox_vp_log(&inp).unwrap();
    assert!((nz.beta_star - 9.968).abs() < 1e-3 && (nz.lam_star - 0.3178).abs() < 1e-4, "{nz:?}");
    let resid = nz.beta_star.abs() + (nz.lam_star - 1.0) / 0.1 - 1.0 / nz.lam_star;
    assert!(resid.abs() < 1e-6);
    let (_, _, gc) = grid_prox(&inp);
    assert!((nz.cost - gc).abs() < 1e-9);

    let neg = prox_vp_log(&ProxInput::new(1.0, -0.5, 0.1, 0.1, 1.0)).unwrap();
    assert!(neg.lam_star > 0.0);
    let (_, _, gc) = grid_prox(&ProxInput::new(1.0, -0.5, 0.1, 0.1, 1.0));
    assert!((neg.cost - gc).abs() < 1e-9);
}

#[test]
fn oracle_agreement_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..300 {
        let a = [0.0, 0.1, 1.0][k % 3];
        let inp = random_prox_input(&mut rng, a);
        let out = prox(&inp).unwrap();
        let (_, _, gc) = grid_prox(&inp);
        assert!(out.cost <= gc + 1e-6, "{inp:?}: closed form {} above grid {gc}", out.cost);
        assert!(out.cost >= gc - 1e-6, "{inp:?}: closed form {} below grid {gc}", out.cost);
        assert!((out.cost - prox_cost(&inp, out.beta_star, out.lam_star)).abs() <= 1e-12 * out.cost.abs().max(1.0));
    }
}

#[test]
fn tie_goes_to_the_beta_sparse_branch() {
    // s_β = s_λ = 2, λ₀/√2 = |β₀|/√2.
    let out = prox_vp(&ProxInput::new(1.5, 1.5, 2.0, 2.0, 0.0)).unwrap();
    assert_eq!(out.lam_star, 1.5);
    assert_eq!(out.beta_star, 0.0);
}

#[test]
fn dual_sparsity_zeroes_the_weight() {
    let out = prox_vp(&ProxInput::new(4.0, 0.5, 1.0, 0.5, 0.0)).unwrap();
    assert_eq!(out.lam_star, 0.0);
    assert_eq!(out.beta_star, 4.0);
}

#[test]
fn reduced_prox_examples_and_limit() {
    assert_eq!(reduced_prox(2.0, 1.0, 0.5).unwrap(), 2.0);
    assert_eq!(reduced_prox(0.5, 1.0, 0.5).unwrap(), 0.0);
    let full = prox_vp(&ProxInput::new(1.0, 0.5, 1.0, 0.5, 0.0)).unwrap();
    assert_eq!(full.lam_star, 0.0);
    for &l0 in &[0.0, 0.3, 1.0, 2.5] {
        let errs: Vec<f64> = [1e-1, 1e-3, 1e-6].iter().map(|&b| (reduced_prox(l0, 1.2, b).unwrap() - l0).abs()).collect();
        assert!(errs[0] >= errs[1] && errs[1] >= errs[2] && errs[2] < 1e-5, "{l0}: {errs:?}");
    }
    assert!(matches!(reduced_prox(1.0, 1.0, 1.0), Err(Error::Regime(_))));
    assert!(matches!(reduced_prox(1.0, 1.0, 0.0), Err(Error::Regime(_))));
}

#[test]
fn reduced_prox_agrees_with_full_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let inp = random_prox_input(&mut rng, 0.0);
        let b = inp.s_beta * inp.s_lam;
        if b >= 1.0 {
            continue;
        }
        let r = reduced_prox(inp.lam0, inp.beta0.abs() / inp.s_beta, b).unwrap();
        let full = prox_vp(&inp).unwrap();
        assert!((r - full.lam_star).abs() <= 1e-12 * r.abs().max(1.0), "{inp:?}");
    }
}

#[test]
fn invalid_steps_rejected() {
    for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(prox_vp(&ProxInput::new(1.0, 1.0, bad, 1.0, 0.0)), Err(Error::InvalidStep(_))));
        assert!(matches!(prox_vp_log(&ProxInput::new(1.0, 1.0, 1.0, bad, 1.0)), Err(Error::InvalidStep(_))));
    }
    assert!(prox_vp_log(&ProxInput::new(1.0, 1.0, 1.0, 1.0, 0.0)).is_err());
    assert!(prox_vp(&ProxInput::new(1.0, 1.0, 1.0, 1.0, 0.5)).is_err());
}

fn any_input() -> impl Strategy<Value = ProxInput> {
    (-5.0..5.0f64, -1.0..5.0f64, -3.0..0.48f64, -3.0..0.48f64, prop_oneof![Just(0.0), Just(0.1), Just(1.0)])
        .prop_map(|(b, l, sb, sl, a)| ProxInput::new(b, l, 10f64.powf(sb), 10f64.powf(sl), a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn shrinkage_and_sign(inp in any_input()) {
        let out = prox(&inp).unwrap();
        prop_assert!(out.beta_star.abs() <= inp.beta0.abs());
        prop_assert!(out.beta_star == 0.0 || out.beta_star.signum() == inp.beta0.signum());
        prop_assert!(out.lam_star >= 0.0);
        let expect = (inp.beta0.abs() - inp.s_beta * out.lam_star).max(0.0).copysign(inp.beta0);
        prop_assert!((out.beta_star - expect).abs() <= 1e-12 * inp.beta0.abs().max(1.0));
    }

    #[test]
    fn barrier_keeps_weight_positive(inp in any_input()) {
        if inp.a > 0.0 {
            prop_assert!(prox_vp_log(&inp).unwrap().lam_star > 0.0);
        }
    }

    #[test]
    fn coordinatewise_equals_scalar(inputs in prop::collection::vec(any_input(), 1..20), a in prop_oneof![Just(0.0), Just(0.5)]) {
        let mut beta: Vec<f64> = inputs.iter().map(|i| i.beta0).collect();
        let mut lam: Vec<f64> = inputs.iter().map(|i| i.lam0).collect();
        let sb: Vec<f64> = inputs.iter().map(|i| i.s_beta).collect();
        let sl: Vec<f64> = inputs.iter().map(|i| i.s_lam).collect();
        prox_in_place(&mut beta, &mut lam, &sb, &sl, a).unwrap();
        for (k, i) in inputs.iter().enumerate() {
            let one = prox(&ProxInput { a, ..*i }).unwrap();
            prop_assert_eq!(beta[k].to_bits(), one.beta_star.to_bits());
            prop_assert_eq!(lam[k].to_bits(), one.lam_star.to_bits());
        }
    }
}
