//! Covariance-matrix toolkit for Gaussian states and one-sided Gaussian channels.
//!
//! Conventions: quadratures ordered `(q1, p1, q2, p2, ...)`, hbar = 1, vacuum
//! variance 1/2. A one-sided channel is a pair of real 2x2 matrices `(f, g)`
//! acting on one mode as `σ ↦ (1 ⊕ f) σ (1 ⊕ f)ᵀ + (0 ⊕ g)`, and it turns every
//! pure entangled input separable exactly when `4 det g ≥ (det f + 1)²`.

// `!(x >= lo)` is used on purpose so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod error;
pub mod separability;
pub mod states;
pub mod symplectic;
pub mod verifier;

pub use channels::{
    amplifier, apply_one_sided, classical_noise, classify, erase_to_vacuum, make_channel,
    phase_conjugate, pure_loss, ChannelVerdict, GaussianChannel, VerdictKind,
};
pub use error::{Error, Result};
pub use separability::{
    log_negativity, ppt_separable, two_mode_separable, SeparabilityMethod, SeparabilityVerdict,
};
pub use states::{blocks, is_pure, tmss, vacuum, PureStateSpec, TwoModeBlocks};
pub use symplectic::{
    congruence, is_physical, partial_transpose, symplectic_eigenvalues, symplectic_form,
    CovarianceMatrix, EulerAngles, SymplecticForm, SymplecticMatrix,
};
pub use verifier::{
    crosscheck_physicality, sweep_entanglement_ratio, verify_detf_zero, verify_proposition,
    TrialConfig, VerificationReport,
};
