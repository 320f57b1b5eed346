//! Brute-force oracles shared by the integration suites. None of them call
//! into the closed-form operators or solvers they are used to check.

#![allow(dead_code)]

pub mod fd;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use proxlasso_core::ProxInput;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let cands = [(lo, f(lo)), (x1, f1), (x2, f2), (hi, f(hi))];
    cands.into_iter().fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
}

/// Raw proximal cost `λ|β| − a·ln λ + (β−β₀)²/(2s_β) + (λ−λ₀)²/(2s_λ)`.
pub fn prox_cost(inp: &ProxInput, beta: f64, lam: f64) -> f64 {
    let barrier = if inp.a > 0.0 { -inp.a * lam.ln() } else { 0.0 };
    lam * beta.abs()
        + barrier
        + (beta - inp.beta0).powi(2) / (2.0 * inp.s_beta)
        + (lam - inp.lam0).powi(2) / (2.0 * inp.s_lam)
}

/// Minimum over β of the prox cost at fixed λ, found by golden section on the
/// segment between 0 and β₀ (the cost is convex in β there and increasing
/// outside it).
fn inner_beta(inp: &ProxInput, lam: f64) -> (f64, f64) {
    let (lo, hi) = if inp.beta0 >= 0.0 { (0.0, inp.beta0) } else { (inp.beta0, 0.0) };
    if hi - lo == 0.0 {
        return (0.0, prox_cost(inp, 0.0, lam));
    }
    golden(|b| prox_cost(inp, b, lam), lo, hi, 90)
}

/// Grid oracle for the joint prox: λ on a mixed log/linear grid over a box
/// that provably contains the minimizer, β minimized per λ, then the best
/// grid cell is polished by golden section in λ. Returns `(β, λ, cost)`.
pub fn grid_prox(inp: &ProxInput) -> (f64, f64, f64) {
    // For λ beyond the positive root of λ² − λ₀λ − a·s_λ the λ-derivative of
    // the cost is positive for every β.
    let root = 0.5 * (inp.lam0 + (inp.lam0 * inp.lam0 + 4.0 * inp.a * inp.s_lam).sqrt());
    let hi = root.max(0.0) + 1e-3;
    let lo = if inp.a > 0.0 { 1e-300 } else { 0.0 };
    let mut grid: Vec<f64> = Vec::new();
    if inp.a == 0.0 {
        grid.push(0.0);
    }
    for k in 0..=240 {
        let v = 10f64.powf(-12.0 + 12.0 * k as f64 / 240.0) * hi;
        grid.push(v);
    }
    let n_lin = 4000;
    for k in 1..=n_lin {
        grid.push(hi * k as f64 / n_lin as f64);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let profile = |l: f64| inner_beta(inp, l).1;
    let vals: Vec<f64> = grid.iter().map(|&l| profile(l)).collect();
    let (kbest, _) = vals.iter().enumerate().fold((0, f64::INFINITY), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
    let mut best = (grid[kbest], vals[kbest]);
    let left = if kbest == 0 { lo } else { grid[kbest - 1] };
    let right = if kbest + 1 == grid.len() { hi } else { grid[kbest + 1] };
    let polished = golden(profile, left.max(lo), right, 120);
    if polished.1 < best.1 {
        best = polished;
    }
    let (b, c) = inner_beta(inp, best.0);
    (b, best.0, c)
}

/// Random prox input in the ranges used by the oracle suites.
pub fn random_prox_input(rng: &mut ChaCha8Rng, a: f64) -> ProxInput {
    let log_s = |r: &mut ChaCha8Rng| 10f64.powf(r.gen_range(-3.0..3f64.log10()));
    ProxInput::new(rng.gen_range(-5.0..5.0), rng.gen_range(-1.0..5.0), log_s(rng), log_s(rng), a)
}

/// Cyclic coordinate descent for
/// `(1/τ)·Σᵢ ½(yᵢ − b₀ − xᵢβ)² + Σⱼ wⱼ|βⱼ|` with an unpenalized intercept.
pub fn cd_weighted_lasso(x: &Array2<f64>, y: &Array1<f64>, tau: f64, w: &[f64], intercept: bool) -> (Array1<f64>, f64) {
    let (n, p) = x.dim();
    let mut beta = Array1::<f64>::zeros(p);
    let mut b0 = 0.0;
    let mut r = y.clone();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    for _sweep in 0..100_000 {
        let mut change: f64 = 0.0;
        if intercept {
            let m = r.sum() / n as f64;
            b0 += m;
            r.mapv_inplace(|v| v - m);
            change = change.max(m.abs());
        }
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let xj = x.column(j);
            let rho = xj.dot(&r) + col_sq[j] * beta[j];
            let t = tau * w[j];
            let new = if w[j].is_infinite() {
                0.0
            } else if rho > t {
                (rho - t) / col_sq[j]
            } else if rho < -t {
                (rho + t) / col_sq[j]
            } else {
                0.0
            };
            let d = new - beta[j];
            if d != 0.0 {
                r.scaled_add(-d, &xj);
                beta[j] = new;
                change = change.max(d.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    (beta, b0)
}

/// Ordinary least squares (with optional intercept) via nalgebra's SVD.
pub fn least_squares(x: &Array2<f64>, y: &Array1<f64>, intercept: bool) -> (Array1<f64>, f64) {
    let (n, p) = x.dim();
    let k = p + intercept as usize;
    let a = DMatrix::from_fn(n, k, |i, j| if j < p { x[[i, j]] } else { 1.0 });
    let b = DVector::from_iterator(n, y.iter().copied());
    let sol = a.svd(true, true).solve(&b, 1e-14).expect("svd solve");
    let beta = Array1::from_iter((0..p).map(|j| sol[j]));
    (beta, if intercept { sol[p] } else { 0.0 })
}

/// Gaussian design with iid N(0,1) entries.
pub fn gaussian_design(n: usize, p: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn((n, p), || rng.sample::<f64, _>(rand_distr::StandardNormal))
}

/// Central-difference derivative.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `|a − b| / max(1, |a|, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Fixed-λ Lasso baseline: fits a warm-started 30-point log grid of τ over
/// `[1e-3·N, N]` on the first 80% of rows and returns the coefficients at the
/// τ with the lowest mean NLL on the last 20%.
pub fn lasso_baseline(ds: &proxlasso_core::Dataset, fam: &proxlasso_core::Family) -> Array1<f64> {
    use proxlasso_core::model::data_term;
    use proxlasso_core::optimizer::fit_lasso;
    let n = ds.n_obs();
    let n_val = n / 5;
    let train: Vec<usize> = (0..n - n_val).collect();
    let val: Vec<usize> = (n - n_val..n).collect();
    let (dtr, dva) = (ds.subset(&train), ds.subset(&val));
    let mut best = (f64::INFINITY, Array1::zeros(ds.n_pred()));
    let mut warm: Option<Array1<f64>> = None;
    for tau in proxlasso_core::path::log_grid(1e-3 * n as f64, n as f64, 30).into_iter().rev() {
        let sol = fit_lasso(&dtr, fam, tau, warm.as_ref()).expect("lasso fit");
        let h = data_term(fam, &dva, None, sol.beta.view(), sol.intercept, false).mean_nll;
        if h < best.0 {
            best = (h, sol.beta.clone());
        }
        warm = Some(sol.beta);
    }
    best.1
}
