//! Numerical evaluation of grand Lebesgue, grand sequence, small Lebesgue and
//! grand Wiener amalgam norms for closed-form functions on finite intervals.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`] and [`expr`] describe the measure space and the function corpus,
//! * [`closed_form`] and [`quadrature`] evaluate `∫ |f|^r` exactly or adaptively,
//! * [`optimize`] is the ε-sweep used by every sup/inf over exponents,
//! * [`grandnorm`], [`amalgam`] and [`smalldual`] build the norms themselves,
//! * [`verify`] runs the inequality checks and produces [`verify::CheckReport`]s.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amalgam;
pub mod closed_form;
pub mod error;
pub mod expr;
pub mod grandnorm;
pub mod optimize;
pub mod quadrature;
pub mod smalldual;
pub mod space;
pub mod verify;

pub use amalgam::{
    amalgam_norm, amalgam_norm_with, control_curve, diagonal_ratio, AmalgamOptions,
    AmalgamOutcome, ControlCurve, LocalNorm,
};
pub use error::{Error, Result};
pub use expr::{FunctionExpr, SequenceData};
pub use grandnorm::{
    eps_inf_conjugate, grand_norm, grand_seq_norm, lebesgue_norm, phi, EvalPath, GrandExponent, NormOptions,
    NormOutcome, NormValue, SmallBound,
};
pub use optimize::SweepOptions;
pub use quadrature::{integrate_power_mean, QuadratureOptions, QuadratureResult};
pub use smalldual::{
    associate_lower_bound, associate_upper_bound, dual_amalgam_upper, holder_pairing,
    pairing_integral, small_norm_upper, Decomposition, PairingReport,
};
pub use space::{MeasureSpace, Region, Subinterval, Window, WindowMode};
pub use verify::{
    acn_tail, check_bf_properties, check_strictness, claim_selected, default_corpus, default_probes, run_suite,
    tally, vanishing_functional, CheckReport, NamedFunction, SuiteConfig, Verdict, CLAIMS, TOLERANCE,
};
