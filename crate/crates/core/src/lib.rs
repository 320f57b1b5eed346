//! Sparse regression with jointly estimated per-coefficient penalty weights.
//!
//! Coefficients `β` and positive penalty weights `λ` are fitted together by
//! proximal gradient on
//!
//! ```text
//! F(β, λ, γ) = (N/τ)·mean_nll(β) + Σ_p [λ_p|β_p| − a·log λ_p] − (1/τ)·log p(λ, γ)
//! ```
//!
//! where the prior `p(λ, γ)` couples weights within groups. The nonsmooth
//! part `λ|β| − a·log λ` has a closed-form joint proximal operator
//! ([`prox_vp`], [`prox_vp_log`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod groups;
pub mod likelihood;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod path;
pub mod prior;
pub mod prox;
pub mod synth;

pub use design::{load_csv, Dataset, Design, DesignSpec, ExpansionMap, Scaling};
pub use error::{Error, Result};
pub use groups::GroupStructure;
pub use likelihood::{Family, FamilyKind, LinearModelData};
pub use objective::{joint_objective, PenaltyConfig, ProfiledPenalty};
pub use optimizer::{
    fit, fit_bcd_reweighted, fit_svrg, fit_with_mode, ConvergedReason, FitResult, Mode, OptimizerConfig,
    ParamState,
};
pub use path::{run_path, PathConfig, PathResult};
pub use prior::{PriorKind, PriorSpec};
pub use prox::{prox, prox_vp, prox_vp_log, reduced_prox, sto, ProxInput, ProxOutput};
pub use synth::{generate, SynthSpec, Structure, Synthetic};
