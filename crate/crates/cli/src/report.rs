//! JSON documents written by `fit` and `simulate`. Field names and types are
//! pinned by the files in `schema/`.

use proxlasso_core::{ConvergedReason, Family, Mode, SynthSpec};
use serde::{Deserialize, Serialize};

pub const FIT_REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub schema_version: u32,
    /// Fitted family; a free auxiliary parameter holds its estimate.
    pub family: Family,
    pub prior: String,
    pub mode: Mode,
    pub tau: f64,
    pub n_obs: usize,
    pub n_pred: usize,
    /// Original scale.
    pub intercept: f64,
    pub coefficients: Vec<Coefficient>,
    /// Names of the coefficients that are exactly zero.
    pub zero_coefficients: Vec<String>,
    pub nonzero_count: usize,
    pub gamma: Vec<f64>,
    pub train_nll: f64,
    pub heldout_nll: Option<f64>,
    /// Joint objective over all rows; absent in bcd mode, which minimizes a
    /// different objective.
    pub objective: Option<f64>,
    pub iterations: usize,
    pub converged_reason: ConvergedReason,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub name: String,
    /// Original column scale.
    pub value: f64,
    /// Scale the model was fitted on.
    pub fitted_value: f64,
    pub lambda: f64,
}

/// Sidecar written next to a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truth {
    pub spec: SynthSpec,
    /// Columns of the generated design, in coefficient order.
    pub column_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub support: Vec<usize>,
    /// Group file written alongside, relative to the truth file.
    pub groups_file: Option<String>,
    /// Whether the fit should expand the CSV columns to second order.
    pub second_order: bool,
}
