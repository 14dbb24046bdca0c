//! Phase-space linear algebra.
//!
//! Quadratures are ordered `(q1, p1, q2, p2, ...)` and the vacuum has
//! variance 1/2 in every quadrature (hbar = 1).

use std::f64::consts::TAU;

use nalgebra::{Cholesky, Complex, DMatrix, Matrix2, Schur, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance of each vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Relative tolerance used when pairing the moduli of the eigenvalues of `Ω σ`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Symmetric `2N x 2N` matrix of quadrature second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `data`, replacing it with its symmetric part.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::OddDimension(rows));
        }
        Ok(Self {
            n_modes: rows / 2,
            data: symmetrize(data),
        })
    }

    pub fn from_row_slice(n_modes: usize, values: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if values.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries given for a {dim}x{dim} matrix",
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| self.data[(i, j)])
            .collect()
    }

    /// The 2x2 block coupling `row_mode` to `col_mode`.
    pub fn block(&self, row_mode: usize, col_mode: usize) -> Result<Matrix2<f64>> {
        self.check_mode(row_mode)?;
        self.check_mode(col_mode)?;
        Ok(self
            .data
            .fixed_view::<2, 2>(2 * row_mode, 2 * col_mode)
            .into_owned())
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            Err(Error::ModeOutOfRange {
                mode,
                n_modes: self.n_modes,
            })
        } else {
            Ok(())
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.amax()
    }
}

/// Block-diagonal symplectic form with per-mode blocks `[[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    data: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

pub fn symplectic_form(n_modes: usize) -> SymplecticForm {
    let dim = 2 * n_modes;
    let mut data = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        data[(2 * k, 2 * k + 1)] = 1.0;
        data[(2 * k + 1, 2 * k)] = -1.0;
    }
    SymplecticForm { n_modes, data }
}

/// Real `2N x 2N` matrix with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n_modes: usize,
    data: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Checks the symplectic condition to `tol` (max-abs residual).
    pub fn new(data: DMatrix<f64>, tol: f64) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::OddDimension(rows));
        }
        let residual = symplectic_residual(&data);
        if !(residual <= tol) {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(Self::from_matrix_unchecked(data))
    }

    pub(crate) fn from_matrix_unchecked(data: DMatrix<f64>) -> Self {
        Self {
            n_modes: data.nrows() / 2,
            data,
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Max-abs entry of `S Ω Sᵀ - Ω`.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.data)
    }

    pub fn determinant(&self) -> f64 {
        self.data.determinant()
    }

    pub fn direct_sum(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        Self::from_matrix_unchecked(direct_sum(&self.data, &other.data))
    }

    /// Product `self * other`, itself symplectic.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-mode and {}-mode symplectics",
                self.n_modes, other.n_modes
            )));
        }
        Ok(Self::from_matrix_unchecked(&self.data * &other.data))
    }

    /// `S σ Sᵀ`.
    pub fn transform(&self, cm: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        CovarianceMatrix::new(congruence(&self.data, cm.matrix())?)
    }
}

fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let omega = symplectic_form(s.nrows() / 2);
    (s * omega.matrix() * s.transpose() - omega.matrix()).amax()
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

pub(crate) fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// `a · b · aᵀ`, symmetrized.
pub fn congruence(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if b.nrows() != b.ncols() {
        return Err(Error::NotSquare {
            rows: b.nrows(),
            cols: b.ncols(),
        });
    }
    if a.ncols() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "congruence of {}x{} by {}x{}",
            b.nrows(),
            b.ncols(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(symmetrize(a * b * a.transpose()))
}

/// Symplectic eigenvalues in ascending order, one per mode.
///
/// For positive definite `σ = L Lᵀ` these are the moduli of the eigenvalues
/// `±iν` of the antisymmetric matrix `Lᵀ Ω L`, obtained from a Hermitian
/// eigensolver. Other symmetric matrices go through the eigenvalues of `Ω σ`
/// from a real Schur decomposition. Moduli are paired with relative tolerance
/// [`PAIRING_TOL`].
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let omega = symplectic_form(cm.n_modes());
    let mut moduli: Vec<f64> = match Cholesky::new(cm.matrix().clone()) {
        Some(chol) => {
            let l = chol.l();
            let anti = l.transpose() * omega.matrix() * &l;
            let dim = cm.dim();
            let herm = DMatrix::from_fn(dim, dim, |i, j| {
                Complex::new(0.0, 0.5 * (anti[(i, j)] - anti[(j, i)]))
            });
            SymmetricEigen::try_new(herm, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?
                .eigenvalues
                .iter()
                .map(|v| v.abs())
                .collect()
        }
        None => {
            let h = omega.matrix() * cm.matrix();
            Schur::try_new(h, f64::EPSILON, 10_000)
                .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?
                .complex_eigenvalues()
                .iter()
                .map(|z| z.norm())
                .collect()
        }
    };
    moduli.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(cm.n_modes());
    for pair in moduli.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Eigensolver("non-finite eigenvalue".into()));
        }
        let scale = a.max(b).max(1.0);
        if (b - a).abs() > PAIRING_TOL * scale {
            return Err(Error::Eigensolver(format!(
                "unpaired eigenvalue moduli {a:.12e} and {b:.12e}"
            )));
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

/// Smallest eigenvalue of the Hermitian matrix `σ + (i/2) Ω`.
///
/// Non-negative exactly when `σ` satisfies the uncertainty principle.
pub fn physicality_margin(cm: &CovarianceMatrix) -> Result<f64> {
    let omega = symplectic_form(cm.n_modes());
    let dim = cm.dim();
    let herm = DMatrix::from_fn(dim, dim, |i, j| {
        Complex::new(cm.matrix()[(i, j)], 0.5 * omega.matrix()[(i, j)])
    });
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.min())
}

pub fn is_physical(cm: &CovarianceMatrix, tol: f64) -> bool {
    physicality_margin(cm).is_ok_and(|m| m >= -tol)
}

/// Flips the sign of the `p` quadrature of `mode`: `Λ σ Λ`.
pub fn partial_transpose(cm: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    let p = 2 * mode + 1;
    let mut data = cm.matrix().clone();
    for k in 0..cm.dim() {
        if k != p {
            data[(p, k)] = -data[(p, k)];
            data[(k, p)] = -data[(k, p)];
        }
    }
    Ok(CovarianceMatrix {
        n_modes: cm.n_modes(),
        data,
    })
}

/// Parameters of the one-mode decomposition `R(θ) · diag(eˢ, e⁻ˢ) · R(φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub theta: f64,
    pub squeeze: f64,
    pub phi: f64,
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        theta: 0.0,
        squeeze: 0.0,
        phi: 0.0,
    };

    /// Largest squeeze magnitude drawn by [`EulerAngles::random`].
    pub const MAX_RANDOM_SQUEEZE: f64 = 1.5;

    pub fn new(theta: f64, squeeze: f64, phi: f64) -> Self {
        Self {
            theta,
            squeeze,
            phi,
        }
    }

    /// Angles uniform on `[0, 2π)`, squeeze uniform on `[-1.5, 1.5]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            theta: rng.random_range(0.0..TAU),
            squeeze: rng.random_range(-Self::MAX_RANDOM_SQUEEZE..=Self::MAX_RANDOM_SQUEEZE),
            phi: rng.random_range(0.0..TAU),
        }
    }

    pub fn matrix(&self) -> Matrix2<f64> {
        rotation(self.theta)
            * Matrix2::new(self.squeeze.exp(), 0.0, 0.0, (-self.squeeze).exp())
            * rotation(self.phi)
    }

    pub fn symplectic(&self) -> SymplecticMatrix {
        one_mode_symplectic(self.theta, self.squeeze, self.phi)
    }
}

pub(crate) fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub(crate) fn to_dynamic(m: &Matrix2<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]])
}

/// One-mode symplectic `R(θ) · diag(eˢ, e⁻ˢ) · R(φ)`.
pub fn one_mode_symplectic(theta: f64, squeeze: f64, phi: f64) -> SymplecticMatrix {
    let m = EulerAngles::new(theta, squeeze, phi).matrix();
    SymplecticMatrix::from_matrix_unchecked(to_dynamic(&m))
}

/// Embeds a one-mode symplectic on `mode` of an `n_modes` system.
pub fn embed_one_mode(n_modes: usize, mode: usize, s: &Matrix2<f64>) -> Result<SymplecticMatrix> {
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange { mode, n_modes });
    }
    let mut data = DMatrix::identity(2 * n_modes, 2 * n_modes);
    data.fixed_view_mut::<2, 2>(2 * mode, 2 * mode).copy_from(s);
    Ok(SymplecticMatrix::from_matrix_unchecked(data))
}

/// Beam splitter mixing modes `first` and `first + 1` with mixing angle `angle`.
pub fn beam_splitter(n_modes: usize, first: usize, angle: f64) -> Result<SymplecticMatrix> {
    if first + 1 >= n_modes {
        return Err(Error::ModeOutOfRange {
            mode: first + 1,
            n_modes,
        });
    }
    let (s, c) = angle.sin_cos();
    let mut data = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let (a, b) = (2 * first, 2 * first + 2);
    for k in 0..2 {
        data[(a + k, a + k)] = c;
        data[(a + k, b + k)] = s;
        data[(b + k, a + k)] = -s;
        data[(b + k, b + k)] = c;
    }
    Ok(SymplecticMatrix::from_matrix_unchecked(data))
}

/// Random symplectic from a layered circuit of depth `n_modes`.
///
/// Each layer applies a random Euler symplectic to every mode followed by a
/// brickwork of nearest-neighbour beam splitters (even pairs on even layers,
/// odd pairs on odd layers). For one mode this is a single Euler symplectic.
pub fn random_symplectic_with<R: Rng + ?Sized>(n_modes: usize, rng: &mut R) -> SymplecticMatrix {
    assert!(n_modes >= 1, "n_modes must be positive");
    let dim = 2 * n_modes;
    let mut acc = DMatrix::<f64>::identity(dim, dim);
    for layer in 0..n_modes {
        let mut locals = DMatrix::<f64>::zeros(dim, dim);
        for mode in 0..n_modes {
            let m = EulerAngles::random(rng).matrix();
            locals
                .fixed_view_mut::<2, 2>(2 * mode, 2 * mode)
                .copy_from(&m);
        }
        acc = locals * acc;
        let mut first = layer % 2;
        while first + 1 < n_modes {
            let bs = beam_splitter(n_modes, first, rng.random_range(0.0..TAU))
                .expect("pair index in range");
            acc = bs.matrix() * acc;
            first += 2;
        }
    }
    SymplecticMatrix::from_matrix_unchecked(acc)
}

pub fn random_symplectic(n_modes: usize, seed: u64) -> SymplecticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(n_modes, &mut rng)
}
