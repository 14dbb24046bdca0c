//! Separability tests and logarithmic negativity.
//!
//! Verdict margins are signed so that a positive margin means separable.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::states::blocks;
use crate::symplectic::{partial_transpose, symplectic_eigenvalues, CovarianceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparabilityMethod {
    DeterminantForm,
    PptForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub separable: bool,
    /// Slack of the deciding inequality; `separable` iff `margin >= -tol`.
    pub margin: f64,
    pub method: SeparabilityMethod,
}

/// Slack of `det α + det β - 2 det γ ≤ 4 det σ + 1/4`.
pub fn two_mode_separability_slack(cm: &CovarianceMatrix) -> Result<f64> {
    let b = blocks(cm)?;
    let lhs = b.alpha.determinant() + b.beta.determinant() - 2.0 * b.gamma.determinant();
    let rhs = 4.0 * cm.matrix().determinant() + 0.25;
    Ok(rhs - lhs)
}

/// Two-mode separability from block determinants.
pub fn two_mode_separable(cm: &CovarianceMatrix, tol: f64) -> Result<SeparabilityVerdict> {
    let margin = two_mode_separability_slack(cm)?;
    Ok(SeparabilityVerdict {
        separable: margin >= -tol,
        margin,
        method: SeparabilityMethod::DeterminantForm,
    })
}

/// Smallest symplectic eigenvalue of the CM partially transposed on `mode`.
pub fn min_pt_symplectic_eigenvalue(cm: &CovarianceMatrix, mode: usize) -> Result<f64> {
    let pt = partial_transpose(cm, mode)?;
    let nu = symplectic_eigenvalues(&pt)?;
    Ok(nu[0])
}

/// PPT test across `{mode} | rest`, decisive for that bipartition.
pub fn ppt_separable(cm: &CovarianceMatrix, mode: usize, tol: f64) -> Result<SeparabilityVerdict> {
    let margin = min_pt_symplectic_eigenvalue(cm, mode)? - 0.5;
    Ok(SeparabilityVerdict {
        separable: margin >= -tol,
        margin,
        method: SeparabilityMethod::PptForm,
    })
}

/// `max(0, -ln(2 ν̃_min))` across `{mode} | rest`.
pub fn log_negativity(cm: &CovarianceMatrix, mode: usize) -> Result<f64> {
    let nu = min_pt_symplectic_eigenvalue(cm, mode)?;
    Ok((-(2.0 * nu).ln()).max(0.0))
}

/// Two-mode physicality in determinant form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantPhysicality {
    pub physical: bool,
    /// Slack of `det α + det β + 2 det γ ≤ 4 det σ + 1/4`.
    pub slack: f64,
    pub det_sigma: f64,
    pub blocks_physical: bool,
    pub positive_definite: bool,
}

fn one_mode_physical(m: &nalgebra::Matrix2<f64>, tol: f64) -> bool {
    m[(0, 0)] > 0.0 && m[(1, 1)] > 0.0 && m.determinant() >= 0.25 - tol
}

/// Physicality of a two-mode CM without eigenvalues.
///
/// The block inequality alone also admits CMs whose two symplectic eigenvalues
/// are both below 1/2 (e.g. `0.8 · tmss(r)` for large `r`) and indefinite
/// matrices, so positive definiteness (leading principal minors) and
/// `det σ ≥ 1/16` are required as well.
pub fn determinant_physicality(cm: &CovarianceMatrix, tol: f64) -> Result<DeterminantPhysicality> {
    let b = blocks(cm)?;
    let m = cm.matrix();
    let det_sigma = m.determinant();
    let slack = 4.0 * det_sigma + 0.25
        - (b.alpha.determinant() + b.beta.determinant() + 2.0 * b.gamma.determinant());
    let blocks_physical = one_mode_physical(&b.alpha, tol) && one_mode_physical(&b.beta, tol);
    let positive_definite = (1..=4).all(|k| m.view((0, 0), (k, k)).determinant() > 0.0);
    let physical =
        blocks_physical && positive_definite && det_sigma >= 1.0 / 16.0 - tol && slack >= -tol;
    Ok(DeterminantPhysicality {
        physical,
        slack,
        det_sigma,
        blocks_physical,
        positive_definite,
    })
}
