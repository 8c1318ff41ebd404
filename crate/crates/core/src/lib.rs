//! Pairwise error probability of space-time codes over spatially correlated
//! single-keyhole MIMO channels: closed-form high-SNR asymptotics, the
//! eigenvalue criterion for beneficial transmit correlation, and Monte Carlo
//! estimators to check both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod channel;
pub mod design;
pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod reference;
pub mod verify;

pub use asymptotics::{
    constructed_pep_asymptote, pep_asymptotic, pep_asymptotic_distinct, pep_asymptotic_identical,
    pep_lower_bound_independent, AsymptoticPep, Regime, SnrNormalization,
};
pub use channel::{
    pep_mc_conditional, pep_mc_plain, pep_mc_semianalytic, Estimator, McRun, PepEstimate, QuadratureSpec,
};
pub use design::{
    construct_improving_correlation, criterion_check, lemma1_mc_check, ostbc_scan, theorem2_check,
    ConstructedCorrelation, CriterionReport, CriterionRow, CriterionVerdict, Theorem2Verdict,
};
pub use error::{CorrelationViolation, Error, Result};
pub use model::{
    difference_from_gram, effective_spectrum, validate_correlation, CorrelationMatrix, EffectiveSpectrum,
    GramMatrix, SnrGrid, SystemDims,
};
pub use numerics::{ComplexMatrix, RngStream};
