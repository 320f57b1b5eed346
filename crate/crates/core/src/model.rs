//! Evaluation of the data term (mean NLL and its gradients) over a
//! [`Dataset`], including the unpenalized intercept and the log-scale
//! auxiliary parameter.

use ndarray::{Array1, ArrayView1};

use crate::design::Dataset;
use crate::likelihood::Family;

#[derive(Debug, Clone, PartialEq)]
pub struct DataTerm {
    pub mean_nll: f64,
    pub grad_beta: Array1<f64>,
    pub grad_intercept: f64,
    pub grad_log_aux: f64,
}

/// Mean NLL (and optionally its gradient) over `rows` (all rows when `None`).
/// `fam` must already carry the current auxiliary parameter.
pub fn data_term(
    fam: &Family,
    ds: &Dataset,
    rows: Option<&[usize]>,
    beta: ArrayView1<f64>,
    intercept: f64,
    with_grad: bool,
) -> DataTerm {
    let p = beta.len();
    let mut grad = Array1::zeros(if with_grad { p } else { 0 });
    let (mut total, mut wsum, mut g0, mut gaux) = (0.0, 0.0, 0.0, 0.0);
    let free_aux = with_grad && fam.has_free_aux();
    ds.design.for_each_block(rows, |block, off| {
        let eta = block.dot(&beta);
        let mut d = Array1::zeros(if with_grad { eta.len() } else { 0 });
        for k in 0..eta.len() {
            let r = rows.map_or(off + k, |idx| idx[off + k]);
            let w = ds.weights.as_ref().map_or(1.0, |w| w[r]);
            let e = eta[k] + intercept;
            let (l, dl) = fam.loss_deriv(ds.y[r], e);
            total += w * l;
            wsum += w;
            if with_grad {
                d[k] = w * dl;
                g0 += w * dl;
                if free_aux {
                    gaux += w * fam.dloss_dlog_aux(ds.y[r], e);
                }
            }
        }
        if with_grad {
            grad += &block.t().dot(&d);
        }
    });
    if with_grad {
        grad /= wsum;
    }
    DataTerm { mean_nll: total / wsum, grad_beta: grad, grad_intercept: g0 / wsum, grad_log_aux: gaux / wsum }
}

/// Linear predictor for `rows`.
pub fn linear_predictor(ds: &Dataset, rows: Option<&[usize]>, beta: ArrayView1<f64>, intercept: f64) -> Array1<f64> {
    let n = rows.map_or(ds.n_obs(), |r| r.len());
    let mut out = Array1::zeros(n);
    ds.design.for_each_block(rows, |block, off| {
        let eta = block.dot(&beta);
        for k in 0..eta.len() {
            out[off + k] = eta[k] + intercept;
        }
    });
    out
}
