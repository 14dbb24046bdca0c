//! One-sided single-mode Gaussian channels in `(f, g)` form.
//!
//! A channel acting on mode `B` maps `σ ↦ (1 ⊕ f) σ (1 ⊕ f)ᵀ + (0 ⊕ g)`.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{congruence, rotation, CovarianceMatrix};

/// Margin band inside which a verdict is reported as [`VerdictKind::Boundary`].
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Maximum allowed `|g01 - g10|`.
pub const NOISE_SYMMETRY_TOL: f64 = 1e-12;

/// Tolerance used by the catalog constructors.
const CATALOG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianChannel {
    f: Matrix2<f64>,
    g: Matrix2<f64>,
}

impl GaussianChannel {
    /// Skips validation. Use [`make_channel`] for anything that will be applied.
    pub fn new_unchecked(f: Matrix2<f64>, g: Matrix2<f64>) -> Self {
        Self { f, g }
    }

    pub fn from_row_major(f: [f64; 4], g: [f64; 4]) -> (Matrix2<f64>, Matrix2<f64>) {
        (
            Matrix2::new(f[0], f[1], f[2], f[3]),
            Matrix2::new(g[0], g[1], g[2], g[3]),
        )
    }

    pub fn f(&self) -> &Matrix2<f64> {
        &self.f
    }

    pub fn g(&self) -> &Matrix2<f64> {
        &self.g
    }

    pub fn f_row_major(&self) -> [f64; 4] {
        [
            self.f[(0, 0)],
            self.f[(0, 1)],
            self.f[(1, 0)],
            self.f[(1, 1)],
        ]
    }

    pub fn g_row_major(&self) -> [f64; 4] {
        [
            self.g[(0, 0)],
            self.g[(0, 1)],
            self.g[(1, 0)],
            self.g[(1, 1)],
        ]
    }

    pub fn det_f(&self) -> f64 {
        self.f.determinant()
    }

    pub fn det_g(&self) -> f64 {
        self.g.determinant()
    }

    /// `4 det g - (det f - 1)²`; non-negative for every valid channel.
    pub fn physicality_margin(&self) -> f64 {
        let d = self.det_f() - 1.0;
        4.0 * self.det_g() - d * d
    }

    /// Smallest eigenvalue of `g + (i/2)(Ω - f Ω fᵀ)`.
    ///
    /// For 2x2 matrices `f Ω fᵀ = det f · Ω`, so the Hermitian matrix is
    /// `[[g00, g01 + ik], [g01 - ik, g11]]` with `k = (1 - det f) / 2`.
    pub fn complete_positivity_margin(&self) -> f64 {
        let k = 0.5 * (1.0 - self.det_f());
        let (a, b, c) = (
            self.g[(0, 0)],
            0.5 * (self.g[(0, 1)] + self.g[(1, 0)]),
            self.g[(1, 1)],
        );
        let half_trace = 0.5 * (a + c);
        let radius = (0.25 * (a - c) * (a - c) + b * b + k * k).sqrt();
        half_trace - radius
    }

    /// `4 det g - (det f + 1)²`; non-negative for disentangling channels.
    pub fn separability_margin(&self) -> f64 {
        let d = self.det_f() + 1.0;
        4.0 * self.det_g() - d * d
    }
}

/// Validates `(f, g)` as a Gaussian channel.
///
/// Requires `g` symmetric, the determinant condition `4 det g ≥ (det f - 1)²`
/// and positivity of `g + (i/2)(Ω - f Ω fᵀ)`, each to within `tol`.
pub fn make_channel(f: Matrix2<f64>, g: Matrix2<f64>, tol: f64) -> Result<GaussianChannel> {
    if f.iter().chain(g.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NotAChannel("non-finite entry".into()));
    }
    let asym = (g[(0, 1)] - g[(1, 0)]).abs();
    if asym > NOISE_SYMMETRY_TOL {
        return Err(Error::AsymmetricNoise(asym));
    }
    let sym = 0.5 * (g[(0, 1)] + g[(1, 0)]);
    let g = Matrix2::new(g[(0, 0)], sym, sym, g[(1, 1)]);
    let ch = GaussianChannel { f, g };
    let det_margin = ch.physicality_margin();
    if det_margin < -tol {
        return Err(Error::NotAChannel(format!(
            "4 det g - (det f - 1)^2 = {det_margin:.6e} < 0"
        )));
    }
    let cp_margin = ch.complete_positivity_margin();
    if cp_margin < -tol {
        return Err(Error::NotAChannel(format!(
            "g + (i/2)(Ω - fΩfᵀ) has eigenvalue {cp_margin:.6e} < 0"
        )));
    }
    Ok(ch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Disentangling,
    Preserving,
    Boundary,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictKind::Disentangling => "Disentangling",
            VerdictKind::Preserving => "Preserving",
            VerdictKind::Boundary => "Boundary",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelVerdict {
    pub kind: VerdictKind,
    /// `4 det g - (det f + 1)²`.
    pub margin: f64,
}

impl ChannelVerdict {
    /// Binary reading of the criterion; equality counts as separable.
    pub fn is_disentangling(&self) -> bool {
        !matches!(self.kind, VerdictKind::Preserving)
    }
}

pub fn classify(ch: &GaussianChannel, tol: f64) -> ChannelVerdict {
    let margin = ch.separability_margin();
    let kind = if margin > tol {
        VerdictKind::Disentangling
    } else if margin < -tol {
        VerdictKind::Preserving
    } else {
        VerdictKind::Boundary
    };
    ChannelVerdict { kind, margin }
}

/// Applies `ch` to `mode` of `cm`.
pub fn apply_one_sided(
    cm: &CovarianceMatrix,
    ch: &GaussianChannel,
    mode: usize,
) -> Result<CovarianceMatrix> {
    cm.check_mode(mode)?;
    let dim = cm.dim();
    let mut t = DMatrix::<f64>::identity(dim, dim);
    t.fixed_view_mut::<2, 2>(2 * mode, 2 * mode)
        .copy_from(&ch.f);
    let mut out = congruence(&t, cm.matrix())?;
    let mut block = out.fixed_view_mut::<2, 2>(2 * mode, 2 * mode);
    block += ch.g;
    CovarianceMatrix::new(out)
}

fn out_of_range(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::ParameterOutOfRange {
        name,
        value,
        expected,
    }
}

/// Pure loss with transmissivity `eta`.
pub fn pure_loss(eta: f64) -> Result<GaussianChannel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(out_of_range("eta", eta, "0 <= eta <= 1"));
    }
    make_channel(
        Matrix2::identity() * eta.sqrt(),
        Matrix2::identity() * (0.5 * (1.0 - eta)),
        CATALOG_TOL,
    )
}

/// Phase-insensitive quantum-limited amplifier.
pub fn amplifier(gain: f64) -> Result<GaussianChannel> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(out_of_range("gain", gain, "finite and >= 1"));
    }
    make_channel(
        Matrix2::identity() * gain.sqrt(),
        Matrix2::identity() * (0.5 * (gain - 1.0)),
        CATALOG_TOL,
    )
}

/// Additive classical Gaussian noise of variance `n` per quadrature.
pub fn classical_noise(n: f64) -> Result<GaussianChannel> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(out_of_range("n", n, "finite and >= 0"));
    }
    make_channel(Matrix2::identity(), Matrix2::identity() * n, CATALOG_TOL)
}

/// Quantum-limited phase conjugator.
pub fn phase_conjugate(gain: f64) -> Result<GaussianChannel> {
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(out_of_range("gain", gain, "finite and >= 1"));
    }
    make_channel(
        Matrix2::new(1.0, 0.0, 0.0, -1.0) * gain.sqrt(),
        Matrix2::identity() * (0.5 * (gain + 1.0)),
        CATALOG_TOL,
    )
}

/// Replaces the mode with vacuum.
pub fn erase_to_vacuum() -> Result<GaussianChannel> {
    make_channel(Matrix2::zeros(), Matrix2::identity() * 0.5, CATALOG_TOL)
}

/// Identity channel (`f = 1`, `g = 0`).
pub fn identity() -> GaussianChannel {
    GaussianChannel::new_unchecked(Matrix2::identity(), Matrix2::zeros())
}

/// Upper bound of the amplitude `a` in random channel draws.
pub const RANDOM_F_AMPLITUDE: f64 = 2.0;
/// Upper bound of each eigenvalue of `g` in random channel draws.
pub const RANDOM_G_EIGENVALUE: f64 = 3.0;

fn random_noise<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<f64> {
    let q = rotation(rng.random_range(0.0..TAU));
    let d = Matrix2::new(
        rng.random_range(0.0..=RANDOM_G_EIGENVALUE),
        0.0,
        0.0,
        rng.random_range(0.0..=RANDOM_G_EIGENVALUE),
    );
    let g = q * d * q.transpose();
    let off = 0.5 * (g[(0, 1)] + g[(1, 0)]);
    Matrix2::new(g[(0, 0)], off, off, g[(1, 1)])
}

/// Random valid channel.
///
/// `f = a R(θ) diag(1, ±1) R(φ)` with `a ∈ [0, 2]`, `g = Q diag(g1, g2) Qᵀ` with
/// `g1, g2 ∈ [0, 3]`; invalid pairs are redrawn.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, tol: f64) -> GaussianChannel {
    loop {
        let a = rng.random_range(0.0..=RANDOM_F_AMPLITUDE);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let f = rotation(rng.random_range(0.0..TAU))
            * Matrix2::new(a, 0.0, 0.0, a * sign)
            * rotation(rng.random_range(0.0..TAU));
        let g = random_noise(rng);
        if let Ok(ch) = make_channel(f, g, tol) {
            return ch;
        }
    }
}

/// Random valid channel with a rank-one `f` (so `det f = 0` up to rounding).
pub fn random_rank_deficient_channel<R: Rng + ?Sized>(rng: &mut R, tol: f64) -> GaussianChannel {
    let a = rng.random_range(0.0..=RANDOM_F_AMPLITUDE);
    let f = rotation(rng.random_range(0.0..TAU))
        * Matrix2::new(a, 0.0, 0.0, 0.0)
        * rotation(rng.random_range(0.0..TAU));
    loop {
        let g = random_noise(rng);
        if let Ok(ch) = make_channel(f, g, tol) {
            return ch;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{blocks, tmss, vacuum};
    use crate::symplectic::is_physical;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_channel_is_valid() {
        let ch = make_channel(Matrix2::identity(), Matrix2::zeros(), 1e-12).unwrap();
        assert_eq!(ch.physicality_margin(), 0.0);
    }

    #[test]
    fn negative_noise_is_rejected() {
        let err = make_channel(Matrix2::identity(), Matrix2::identity() * -0.1, 1e-12);
        assert!(matches!(err, Err(Error::NotAChannel(_))));
    }

    #[test]
    fn asymmetric_noise_is_rejected() {
        let err = make_channel(Matrix2::identity(), Matrix2::new(1.0, 0.1, 0.0, 1.0), 1e-12);
        assert!(matches!(err, Err(Error::AsymmetricNoise(_))));
    }

    #[test]
    fn half_loss_saturates_determinant_condition() {
        let ch = make_channel(
            Matrix2::identity() * 0.5f64.sqrt(),
            Matrix2::identity() * 0.25,
            1e-12,
        )
        .unwrap();
        assert_abs_diff_eq!(4.0 * ch.det_g(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(ch.physicality_margin(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn negative_definite_noise_passes_determinant_but_not_positivity() {
        // det g = 1 > 0 but g is negative definite.
        let ch = GaussianChannel::new_unchecked(Matrix2::identity(), Matrix2::identity() * -1.0);
        assert!(ch.physicality_margin() >= 0.0);
        assert!(ch.complete_positivity_margin() < 0.0);
        assert!(make_channel(*ch.f(), *ch.g(), 1e-12).is_err());
    }

    #[test]
    fn positivity_implies_determinant_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let f = Matrix2::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let a = rng.random_range(-1.0..3.0);
            let c = rng.random_range(-1.0..3.0);
            let b = rng.random_range(-2.0..2.0);
            let ch = GaussianChannel::new_unchecked(f, Matrix2::new(a, b, b, c));
            if ch.complete_positivity_margin() >= 0.0 {
                assert!(ch.physicality_margin() >= -1e-12);
            }
        }
    }

    #[test]
    fn pure_loss_is_preserving() {
        for k in 1..=10 {
            let eta = k as f64 / 10.0;
            let ch = pure_loss(eta).unwrap();
            let v = classify(&ch, BOUNDARY_TOL);
            assert_eq!(v.kind, VerdictKind::Preserving, "eta = {eta}");
            assert_abs_diff_eq!(
                v.margin,
                (1.0 - eta).powi(2) - (1.0 + eta).powi(2),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pure_loss_one_is_identity() {
        assert_eq!(pure_loss(1.0).unwrap(), identity());
    }

    #[test]
    fn classical_noise_unit_is_boundary() {
        let v = classify(&classical_noise(1.0).unwrap(), BOUNDARY_TOL);
        assert_eq!(v.kind, VerdictKind::Boundary);
        assert!(v.is_disentangling());
        assert_eq!(v.margin, 0.0);
    }

    #[test]
    fn phase_conjugate_is_disentangling() {
        for gain in [1.0, 1.5, 2.0, 5.0] {
            let ch = phase_conjugate(gain).unwrap();
            assert_abs_diff_eq!(ch.det_f(), -gain, epsilon = 1e-12);
            let v = classify(&ch, BOUNDARY_TOL);
            assert!(v.is_disentangling());
            assert_abs_diff_eq!(
                v.margin,
                (gain + 1.0).powi(2) - (1.0 - gain).powi(2),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn erase_to_vacuum_is_boundary_disentangling() {
        let ch = erase_to_vacuum().unwrap();
        assert_eq!(ch.det_f(), 0.0);
        assert_eq!(4.0 * ch.det_g(), 1.0);
        let v = classify(&ch, BOUNDARY_TOL);
        assert_eq!(v.kind, VerdictKind::Boundary);
        assert!(v.is_disentangling());
    }

    #[test]
    fn amplifier_two_saturates_and_preserves() {
        let ch = amplifier(2.0).unwrap();
        assert_abs_diff_eq!(4.0 * ch.det_g(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ch.physicality_margin(), 0.0, epsilon = 1e-12);
        assert_eq!(classify(&ch, BOUNDARY_TOL).kind, VerdictKind::Preserving);
    }

    #[test]
    fn catalog_rejects_bad_parameters() {
        assert!(pure_loss(1.5).is_err());
        assert!(pure_loss(-0.1).is_err());
        assert!(amplifier(0.5).is_err());
        assert!(classical_noise(-1.0).is_err());
        assert!(phase_conjugate(0.9).is_err());
    }

    #[test]
    fn identity_channel_leaves_state_unchanged() {
        let cm = tmss(1.0).unwrap();
        assert_eq!(apply_one_sided(&cm, &identity(), 1).unwrap(), cm);
        assert_eq!(apply_one_sided(&cm, &identity(), 0).unwrap(), cm);
    }

    #[test]
    fn pure_loss_on_tmss() {
        let cm = tmss(1.0).unwrap();
        let out = apply_one_sided(&cm, &pure_loss(0.5).unwrap(), 1).unwrap();
        let b_in = blocks(&cm).unwrap();
        let b_out = blocks(&out).unwrap();
        let expected_beta = Matrix2::identity() * (0.5 * 0.5 * 1.0f64.cosh() + 0.25);
        assert_abs_diff_eq!(b_out.beta, expected_beta, epsilon = 1e-15);
        assert_abs_diff_eq!(b_out.gamma, b_in.gamma * 0.5f64.sqrt(), epsilon = 1e-15);
        assert_eq!(b_out.alpha, b_in.alpha);
    }

    #[test]
    fn apply_rejects_bad_mode() {
        let err = apply_one_sided(&vacuum(2).unwrap(), &identity(), 2);
        assert!(matches!(err, Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn random_channels_span_both_signs_of_det_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut pos, mut neg, mut dis, mut pres) = (0, 0, 0, 0);
        for _ in 0..2000 {
            let ch = random_channel(&mut rng, 1e-12);
            assert!(ch.physicality_margin() >= -1e-12);
            if ch.det_f() > 0.0 {
                pos += 1
            } else {
                neg += 1
            }
            match classify(&ch, BOUNDARY_TOL).kind {
                VerdictKind::Disentangling => dis += 1,
                VerdictKind::Preserving => pres += 1,
                VerdictKind::Boundary => {}
            }
        }
        assert!(pos > 200 && neg > 200, "{pos} {neg}");
        assert!(dis > 200 && pres > 200, "{dis} {pres}");
    }

    #[test]
    fn rank_deficient_channels_have_zero_det_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let ch = random_rank_deficient_channel(&mut rng, 1e-12);
            assert!(ch.det_f().abs() < 1e-12);
            assert!(classify(&ch, BOUNDARY_TOL).is_disentangling());
        }
    }

    #[test]
    fn valid_channels_keep_states_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let ch = random_channel(&mut rng, 1e-12);
            let r = rng.random_range(0.0..2.0);
            let out = apply_one_sided(&tmss(r).unwrap(), &ch, 1).unwrap();
            assert!(is_physical(&out, 1e-9));
        }
    }
}
