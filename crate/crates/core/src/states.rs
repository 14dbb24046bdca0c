//! Gaussian state families and two-mode block decomposition.

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{
    direct_sum, random_symplectic_with, symplectic_eigenvalues, to_dynamic, CovarianceMatrix,
    EulerAngles, SymplecticMatrix, VACUUM_VARIANCE,
};

/// Tolerance on symplectic eigenvalues for [`is_pure`].
pub const PURITY_TOL: f64 = 1e-8;

/// Two-mode squeezed vacuum with squeeze parameter `r`.
pub fn tmss(r: f64) -> Result<CovarianceMatrix> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "r",
            value: r,
            expected: "finite and >= 0",
        });
    }
    let c = 0.5 * r.cosh();
    let s = 0.5 * r.sinh();
    #[rustfmt::skip]
    let values = [
        c,   0.0, s,   0.0,
        0.0, c,   0.0, -s,
        s,   0.0, c,   0.0,
        0.0, -s,  0.0, c,
    ];
    CovarianceMatrix::from_row_slice(2, &values)
}

pub fn vacuum(n_modes: usize) -> Result<CovarianceMatrix> {
    if n_modes == 0 {
        return Err(Error::ParameterOutOfRange {
            name: "n_modes",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let dim = 2 * n_modes;
    CovarianceMatrix::new(DMatrix::identity(dim, dim) * VACUUM_VARIANCE)
}

/// `[[alpha, gamma], [gammaᵀ, beta]]` decomposition of a two-mode CM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeBlocks {
    pub alpha: Matrix2<f64>,
    pub beta: Matrix2<f64>,
    pub gamma: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn reassemble(&self) -> CovarianceMatrix {
        let mut m = DMatrix::zeros(4, 4);
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.alpha);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.gamma);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.gamma.transpose());
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.beta);
        CovarianceMatrix::new(m).expect("4x4 is a valid two-mode shape")
    }
}

pub fn blocks(cm: &CovarianceMatrix) -> Result<TwoModeBlocks> {
    if cm.n_modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            found: cm.n_modes(),
        });
    }
    Ok(TwoModeBlocks {
        alpha: cm.block(0, 0)?,
        beta: cm.block(1, 1)?,
        gamma: cm.block(0, 1)?,
    })
}

/// True when every symplectic eigenvalue is the vacuum value within
/// [`PURITY_TOL`], widened to `ε·cond(σ)` for ill-conditioned matrices
/// (deep random mixers reach cond ~ 1e10, beyond any solver's 1e-8).
pub fn is_pure(cm: &CovarianceMatrix) -> bool {
    let sv = cm.matrix().singular_values();
    let tol = PURITY_TOL.max(f64::EPSILON * sv.max() / sv.min());
    symplectic_eigenvalues(cm)
        .is_ok_and(|nu| nu.iter().all(|v| (v - VACUUM_VARIANCE).abs() <= tol))
}

/// A pure state written as local symplectics acting on a squeezed pair.
///
/// Two modes: `local_ops = [S_A, S_B]` and no mixer. More modes: `local_ops = [S_B]`
/// and `global_mixer` seeds the random symplectic on the first `N - 1` modes.
/// The channel-side mode is always the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureStateSpec {
    pub n_modes: usize,
    pub squeeze_r: f64,
    pub local_ops: Vec<EulerAngles>,
    pub global_mixer: Option<u64>,
}

impl PureStateSpec {
    pub fn two_mode(squeeze_r: f64, local_a: EulerAngles, local_b: EulerAngles) -> Self {
        Self {
            n_modes: 2,
            squeeze_r,
            local_ops: vec![local_a, local_b],
            global_mixer: None,
        }
    }

    /// `mixer = None` means the identity on the first `N - 1` modes.
    pub fn n_mode(
        n_modes: usize,
        squeeze_r: f64,
        local_b: EulerAngles,
        mixer: Option<u64>,
    ) -> Self {
        Self {
            n_modes,
            squeeze_r,
            local_ops: vec![local_b],
            global_mixer: mixer,
        }
    }

    /// Squeeze uniform on `r_range`, random local operations and mixer.
    pub fn random<R: Rng + ?Sized>(n_modes: usize, r_range: (f64, f64), rng: &mut R) -> Self {
        let squeeze_r = if r_range.0 == r_range.1 {
            r_range.0
        } else {
            rng.random_range(r_range.0..=r_range.1)
        };
        if n_modes == 2 {
            let a = EulerAngles::random(rng);
            let b = EulerAngles::random(rng);
            Self::two_mode(squeeze_r, a, b)
        } else {
            let b = EulerAngles::random(rng);
            let mixer = rng.random::<u64>();
            Self::n_mode(n_modes, squeeze_r, b, Some(mixer))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.squeeze_r >= 0.0) || !self.squeeze_r.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "squeeze_r must be finite and non-negative, got {}",
                self.squeeze_r
            )));
        }
        match self.n_modes {
            0 | 1 => Err(Error::InvalidSpec(
                "a pure entangled input needs at least two modes".into(),
            )),
            2 if self.local_ops.len() != 2 => Err(Error::InvalidSpec(
                "two-mode spec needs exactly two local operations".into(),
            )),
            n if n > 2 && self.local_ops.len() != 1 => Err(Error::InvalidSpec(
                "N-mode spec needs exactly one local operation on the last mode".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Builds the covariance matrix for this spec.
    pub fn realize(&self) -> Result<CovarianceMatrix> {
        if self.n_modes == 2 {
            random_pure_two_mode(self)
        } else {
            random_pure_n_mode(self)
        }
    }
}

/// `(S_A ⊕ S_B) tmss(r) (S_A ⊕ S_B)ᵀ`.
pub fn random_pure_two_mode(spec: &PureStateSpec) -> Result<CovarianceMatrix> {
    spec.validate()?;
    if spec.n_modes != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            found: spec.n_modes,
        });
    }
    let sa = spec.local_ops[0].symplectic();
    let sb = spec.local_ops[1].symplectic();
    sa.direct_sum(&sb).transform(&tmss(spec.squeeze_r)?)
}

/// `(S_{A,N-1} ⊕ S_B) [vacuum(N-2) ⊕ tmss(r)]` with `B` the last mode.
pub fn random_pure_n_mode(spec: &PureStateSpec) -> Result<CovarianceMatrix> {
    spec.validate()?;
    if spec.n_modes < 3 {
        return Err(Error::InvalidSpec(format!(
            "N-mode construction needs at least 3 modes, got {}",
            spec.n_modes
        )));
    }
    let n = spec.n_modes;
    let core = direct_sum(vacuum(n - 2)?.matrix(), tmss(spec.squeeze_r)?.matrix());
    let mixer = match spec.global_mixer {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            random_symplectic_with(n - 1, &mut rng)
        }
        None => SymplecticMatrix::identity(n - 1),
    };
    let sb = SymplecticMatrix::from_matrix_unchecked(to_dynamic(&spec.local_ops[0].matrix()));
    mixer
        .direct_sum(&sb)
        .transform(&CovarianceMatrix::new(core)?)
}
