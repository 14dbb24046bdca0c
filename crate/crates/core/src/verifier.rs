//! Randomized verification of the channel separability criterion.
//!
//! Every trial draws from its own ChaCha stream (`stream = trial index`) of the
//! master seed, so trials are independent of execution order and run in
//! parallel. Reports are assembled in trial order.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    apply_one_sided, classify, random_channel, random_rank_deficient_channel, GaussianChannel,
    VerdictKind,
};
use crate::error::{Error, Result};
use crate::separability::{
    determinant_physicality, log_negativity, ppt_separable, two_mode_separable, SeparabilityVerdict,
};
use crate::states::{tmss, PureStateSpec};
use crate::symplectic::{physicality_margin, random_symplectic_with, CovarianceMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Campaign {
    Prop1,
    Detf0,
    Physicality,
    InputIndependence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFilter {
    Any,
    PreservingOnly,
    DisentanglingOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n_trials: usize,
    pub seed: u64,
    pub n_modes: usize,
    pub r_range: (f64, f64),
    /// Half-width of the band around zero inside which margins are not judged.
    pub boundary_exclusion: f64,
    /// Tolerance passed to channel validation when sampling.
    pub channel_tol: f64,
    pub channel_filter: ChannelFilter,
    /// Adds random thermal noise to the inputs. Outside the criterion's
    /// hypothesis, so such reports are marked exploratory.
    pub mixed_inputs: bool,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            n_trials: 10_000,
            seed: 42,
            n_modes: 2,
            r_range: (0.1, 2.0),
            boundary_exclusion: 1e-9,
            channel_tol: 1e-12,
            channel_filter: ChannelFilter::Any,
            mixed_inputs: false,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if !(2..=6).contains(&self.n_modes) {
            return bad(format!("n_modes must be in 2..=6, got {}", self.n_modes));
        }
        let (lo, hi) = self.r_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad(format!(
                "r_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            ));
        }
        if !(self.boundary_exclusion >= 0.0) || !(self.channel_tol >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }

    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// Row-major `(f, g)` pair as stored in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub f: [f64; 4],
    pub g: [f64; 4],
}

impl From<&GaussianChannel> for ChannelRecord {
    fn from(ch: &GaussianChannel) -> Self {
        Self {
            f: ch.f_row_major(),
            g: ch.g_row_major(),
        }
    }
}

/// A judged trial where the prediction and the oracle disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<ChannelRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<PureStateSpec>,
    /// Row-major input matrix, for campaigns without a state spec.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<f64>>,
    pub predicted: bool,
    pub oracle: bool,
    pub predicted_margin: f64,
    pub oracle_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub campaign: Campaign,
    pub seed: u64,
    pub n_modes: usize,
    pub trials_run: usize,
    pub trials_excluded_boundary: usize,
    pub mismatches: Vec<Mismatch>,
    pub pass: bool,
    pub exploratory: bool,
}

impl VerificationReport {
    fn assemble(
        campaign: Campaign,
        seed: u64,
        n_modes: usize,
        exploratory: bool,
        outcomes: Vec<Outcome>,
    ) -> Self {
        let trials_run = outcomes.len();
        let mut excluded = 0;
        let mut mismatches = Vec::new();
        for outcome in outcomes {
            match outcome {
                Outcome::Agree => {}
                Outcome::Excluded => excluded += 1,
                Outcome::Mismatch(m) => mismatches.push(*m),
            }
        }
        mismatches.sort_by_key(|m| m.trial);
        Self {
            campaign,
            seed,
            n_modes,
            trials_run,
            trials_excluded_boundary: excluded,
            pass: mismatches.is_empty(),
            mismatches,
            exploratory,
        }
    }

    pub fn trials_judged(&self) -> usize {
        self.trials_run - self.trials_excluded_boundary
    }
}

enum Outcome {
    Agree,
    Excluded,
    Mismatch(Box<Mismatch>),
}

/// Separability of the output across `{last mode} | rest`: block determinants
/// for two modes, partial transpose otherwise.
pub fn output_separability(out: &CovarianceMatrix, tol: f64) -> Result<SeparabilityVerdict> {
    if out.n_modes() == 2 {
        two_mode_separable(out, tol)
    } else {
        ppt_separable(out, out.n_modes() - 1, tol)
    }
}

/// Whether the oracle margin falls in the exclusion band.
///
/// Only the two-mode determinant slack is excluded this way. With more modes
/// the decoupled pure modes contribute partially transposed symplectic
/// eigenvalues of exactly 1/2, so every separable output has a PPT margin of
/// zero; there the oracle decides with tolerance `boundary_exclusion` instead.
fn state_margin_ambiguous(oracle: &SeparabilityVerdict, cfg: &TrialConfig) -> bool {
    cfg.n_modes == 2 && oracle.margin.abs() <= cfg.boundary_exclusion
}

fn sample_channel<R: Rng + ?Sized>(cfg: &TrialConfig, rng: &mut R) -> GaussianChannel {
    loop {
        let ch = random_channel(rng, cfg.channel_tol);
        let kind = classify(&ch, cfg.boundary_exclusion).kind;
        let keep = match cfg.channel_filter {
            ChannelFilter::Any => true,
            ChannelFilter::PreservingOnly => kind == VerdictKind::Preserving,
            ChannelFilter::DisentanglingOnly => kind == VerdictKind::Disentangling,
        };
        if keep {
            return ch;
        }
    }
}

fn sample_input<R: Rng + ?Sized>(
    cfg: &TrialConfig,
    rng: &mut R,
) -> Result<(PureStateSpec, CovarianceMatrix)> {
    let spec = PureStateSpec::random(cfg.n_modes, cfg.r_range, rng);
    let mut cm = spec.realize()?;
    if cfg.mixed_inputs {
        let extra = rng.random_range(0.0..0.5);
        let dim = cm.dim();
        cm = CovarianceMatrix::new(cm.matrix() + DMatrix::identity(dim, dim) * extra)?;
    }
    Ok((spec, cm))
}

fn prop1_trial(cfg: &TrialConfig, trial: usize) -> Result<Outcome> {
    let mut rng = cfg.trial_rng(trial);
    let ch = sample_channel(cfg, &mut rng);
    let (spec, cm) = sample_input(cfg, &mut rng)?;
    let out = apply_one_sided(&cm, &ch, cfg.n_modes - 1)?;
    let verdict = classify(&ch, cfg.boundary_exclusion);
    let oracle = output_separability(&out, cfg.boundary_exclusion)?;
    if verdict.kind == VerdictKind::Boundary || state_margin_ambiguous(&oracle, cfg) {
        return Ok(Outcome::Excluded);
    }
    if verdict.is_disentangling() == oracle.separable {
        return Ok(Outcome::Agree);
    }
    Ok(Outcome::Mismatch(Box::new(Mismatch {
        trial,
        channel: Some((&ch).into()),
        state: Some(spec),
        matrix: None,
        predicted: verdict.is_disentangling(),
        oracle: oracle.separable,
        predicted_margin: verdict.margin,
        oracle_margin: oracle.margin,
    })))
}

fn run_trials<F>(n: usize, trial: F) -> Result<Vec<Outcome>>
where
    F: Fn(usize) -> Result<Outcome> + Sync + Send,
{
    (0..n).into_par_iter().map(trial).collect()
}

/// Compares the channel criterion with the output-state oracle on random
/// (channel, pure entangled input) pairs.
pub fn verify_proposition(cfg: &TrialConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let outcomes = run_trials(cfg.n_trials, |t| prop1_trial(cfg, t))?;
    Ok(VerificationReport::assemble(
        Campaign::Prop1,
        cfg.seed,
        cfg.n_modes,
        cfg.mixed_inputs,
        outcomes,
    ))
}

/// Channels with rank-one `f` must disentangle every input.
///
/// Outputs sit on or near the separability boundary here, so a trial only
/// fails when the oracle slack drops below `-boundary_exclusion`.
pub fn verify_detf_zero_with(cfg: &TrialConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let outcomes = run_trials(cfg.n_trials, |trial| {
        let mut rng = cfg.trial_rng(trial);
        let ch = random_rank_deficient_channel(&mut rng, cfg.channel_tol);
        let (spec, cm) = sample_input(cfg, &mut rng)?;
        let out = apply_one_sided(&cm, &ch, cfg.n_modes - 1)?;
        let verdict = classify(&ch, cfg.boundary_exclusion);
        let oracle = output_separability(&out, cfg.boundary_exclusion)?;
        if oracle.separable && verdict.is_disentangling() {
            Ok(Outcome::Agree)
        } else {
            Ok(Outcome::Mismatch(Box::new(Mismatch {
                trial,
                channel: Some((&ch).into()),
                state: Some(spec),
                matrix: None,
                predicted: verdict.is_disentangling(),
                oracle: oracle.separable,
                predicted_margin: verdict.margin,
                oracle_margin: oracle.margin,
            })))
        }
    })?;
    Ok(VerificationReport::assemble(
        Campaign::Detf0,
        cfg.seed,
        cfg.n_modes,
        cfg.mixed_inputs,
        outcomes,
    ))
}

pub fn verify_detf_zero(n_trials: usize, seed: u64) -> Result<VerificationReport> {
    verify_detf_zero_with(&TrialConfig {
        n_trials,
        seed,
        ..TrialConfig::default()
    })
}

/// For each random channel, checks that the oracle verdict is the same for
/// every random pure entangled input. `cfg.n_trials` is the number of channels.
pub fn verify_input_independence(
    cfg: &TrialConfig,
    inputs_per_channel: usize,
) -> Result<VerificationReport> {
    cfg.validate()?;
    if inputs_per_channel == 0 {
        return Err(Error::InvalidSpec(
            "inputs_per_channel must be at least 1".into(),
        ));
    }
    let per_channel: Vec<(usize, Option<Mismatch>)> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|c| -> Result<(usize, Option<Mismatch>)> {
            let mut rng = cfg.trial_rng(c);
            let ch = sample_channel(cfg, &mut rng);
            let mut excluded = 0;
            let mut first: Option<SeparabilityVerdict> = None;
            for _ in 0..inputs_per_channel {
                let (spec, cm) = sample_input(cfg, &mut rng)?;
                let out = apply_one_sided(&cm, &ch, cfg.n_modes - 1)?;
                let oracle = output_separability(&out, cfg.boundary_exclusion)?;
                if state_margin_ambiguous(&oracle, cfg) {
                    excluded += 1;
                    continue;
                }
                match first {
                    None => first = Some(oracle),
                    Some(f) if f.separable != oracle.separable => {
                        return Ok((
                            excluded,
                            Some(Mismatch {
                                trial: c,
                                channel: Some((&ch).into()),
                                state: Some(spec),
                                matrix: None,
                                predicted: f.separable,
                                oracle: oracle.separable,
                                predicted_margin: f.margin,
                                oracle_margin: oracle.margin,
                            }),
                        ));
                    }
                    Some(_) => {}
                }
            }
            Ok((excluded, None))
        })
        .collect::<Result<_>>()?;

    let mut excluded = 0;
    let mut mismatches = Vec::new();
    for (ex, m) in per_channel {
        excluded += ex;
        mismatches.extend(m);
    }
    mismatches.sort_by_key(|m| m.trial);
    Ok(VerificationReport {
        campaign: Campaign::InputIndependence,
        seed: cfg.seed,
        n_modes: cfg.n_modes,
        trials_run: cfg.n_trials * inputs_per_channel,
        trials_excluded_boundary: excluded,
        pass: mismatches.is_empty(),
        mismatches,
        exploratory: cfg.mixed_inputs,
    })
}

/// Random symmetric 4x4 matrix drawn from a mix of physical and unphysical
/// constructions.
pub fn random_two_mode_matrix<R: Rng + ?Sized>(rng: &mut R) -> CovarianceMatrix {
    let williamson = |rng: &mut R, lo1: f64, hi1: f64, lo2: f64, hi2: f64| {
        let n1 = rng.random_range(lo1..hi1);
        let n2 = rng.random_range(lo2..hi2);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![n1, n1, n2, n2]));
        let s = random_symplectic_with(2, rng);
        CovarianceMatrix::new(s.matrix() * d * s.matrix().transpose()).expect("4x4")
    };
    match rng.random_range(0..5u8) {
        0 => williamson(rng, 0.5, 2.0, 0.5, 2.0),
        1 => williamson(rng, 0.2, 0.5, 0.5, 2.0),
        2 => williamson(rng, 0.2, 0.5, 0.2, 0.5),
        3 => {
            let b = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.5..1.5));
            let shift = rng.random_range(0.0..2.0);
            CovarianceMatrix::new(&b + b.transpose() + DMatrix::identity(4, 4) * shift)
                .expect("4x4")
        }
        _ => {
            // Physical-looking local blocks with an arbitrary correlation block.
            let a = rng.random_range(0.5..2.0);
            let b = rng.random_range(0.5..2.0);
            let g = DMatrix::from_fn(2, 2, |_, _| rng.random_range(-2.5..2.5));
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).fill_diagonal(a);
            m.view_mut((2, 2), (2, 2)).fill_diagonal(b);
            m.view_mut((0, 2), (2, 2)).copy_from(&g);
            m.view_mut((2, 0), (2, 2)).copy_from(&g.transpose());
            CovarianceMatrix::new(m).expect("4x4")
        }
    }
}

/// Determinant-form physicality versus the positivity of `σ + (i/2)Ω`.
pub fn crosscheck_physicality(n_trials: usize, seed: u64) -> Result<VerificationReport> {
    let cfg = TrialConfig {
        n_trials,
        seed,
        ..TrialConfig::default()
    };
    cfg.validate()?;
    let excl = cfg.boundary_exclusion;
    let outcomes = run_trials(n_trials, |trial| {
        let mut rng = cfg.trial_rng(trial);
        let cm = random_two_mode_matrix(&mut rng);
        let psd_margin = physicality_margin(&cm)?;
        let det_form = determinant_physicality(&cm, 0.0)?;
        let near = |v: f64| v.abs() <= excl;
        if near(psd_margin) || near(det_form.slack) || near(det_form.det_sigma - 1.0 / 16.0) {
            return Ok(Outcome::Excluded);
        }
        let oracle = psd_margin >= 0.0;
        if oracle == det_form.physical {
            return Ok(Outcome::Agree);
        }
        Ok(Outcome::Mismatch(Box::new(Mismatch {
            trial,
            channel: None,
            state: None,
            matrix: Some(cm.to_row_major()),
            predicted: det_form.physical,
            oracle,
            predicted_margin: det_form.slack,
            oracle_margin: psd_margin,
        })))
    })?;
    Ok(VerificationReport::assemble(
        Campaign::Physicality,
        seed,
        2,
        false,
        outcomes,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub e_in: f64,
    pub e_out: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    /// Set when the channel disentangles; `e_out` is then identically zero.
    pub degenerate: bool,
}

impl Sweep {
    /// `max(ratio) - min(ratio)`.
    pub fn ratio_spread(&self) -> f64 {
        let (lo, hi) = self
            .rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| {
                (lo.min(row.ratio), hi.max(row.ratio))
            });
        if self.rows.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// Default squeeze grid used by the sweep: 0.1, 0.2, ..., 2.0.
pub fn default_r_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 10.0).collect()
}

/// Log-negativity of `tmss(r)` before and after `ch` acts on the second mode.
pub fn sweep_entanglement_ratio(ch: &GaussianChannel, r_grid: &[f64]) -> Result<Sweep> {
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "r",
                value: r,
                expected: "finite and > 0",
            });
        }
        let input = tmss(r)?;
        let e_in = log_negativity(&input, 1)?;
        let e_out = log_negativity(&apply_one_sided(&input, ch, 1)?, 1)?;
        rows.push(SweepRow {
            r,
            e_in,
            e_out,
            ratio: e_out / e_in,
        });
    }
    Ok(Sweep {
        rows,
        degenerate: classify(ch, crate::channels::BOUNDARY_TOL).is_disentangling(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{erase_to_vacuum, identity, make_channel, pure_loss};
    use crate::separability::two_mode_separable;
    use crate::states::{tmss, vacuum};
    use crate::symplectic::is_physical;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;

    fn small(n_modes: usize, n_trials: usize, seed: u64) -> TrialConfig {
        TrialConfig {
            n_trials,
            seed,
            n_modes,
            ..TrialConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small(2, 0, 1).validate().is_err());
        assert!(small(7, 10, 1).validate().is_err());
        let mut cfg = small(2, 10, 1);
        cfg.r_range = (0.0, 1.0);
        assert!(cfg.validate().is_err());
        assert!(verify_proposition(&small(2, 0, 1)).is_err());
    }

    #[test]
    fn prop1_small_two_mode() {
        let report = verify_proposition(&small(2, 500, 7)).unwrap();
        assert_eq!(report.trials_run, 500);
        assert!(report.pass, "{:?}", report.mismatches);
    }

    #[test]
    fn prop1_small_three_mode() {
        let report = verify_proposition(&small(3, 200, 8)).unwrap();
        assert!(report.pass, "{:?}", report.mismatches);
    }

    #[test]
    fn preserving_channels_keep_every_output_entangled() {
        let mut cfg = small(2, 300, 9);
        cfg.channel_filter = ChannelFilter::PreservingOnly;
        let report = verify_proposition(&cfg).unwrap();
        assert!(report.pass);
        for trial in 0..cfg.n_trials {
            let mut rng = cfg.trial_rng(trial);
            let ch = sample_channel(&cfg, &mut rng);
            let (_, cm) = sample_input(&cfg, &mut rng).unwrap();
            let out = apply_one_sided(&cm, &ch, 1).unwrap();
            assert!(!two_mode_separable(&out, 0.0).unwrap().separable);
        }
    }

    #[test]
    fn report_invariant_pass_iff_no_mismatch() {
        let report = verify_proposition(&small(2, 50, 3)).unwrap();
        assert_eq!(report.pass, report.mismatches.is_empty());
    }

    #[test]
    fn erase_to_vacuum_disentangles_strong_squeezing() {
        let out = apply_one_sided(&tmss(2.0).unwrap(), &erase_to_vacuum().unwrap(), 1).unwrap();
        let v = two_mode_separable(&out, 1e-9).unwrap();
        assert!(v.separable);
    }

    #[test]
    fn minimal_rank_one_channel_disentangles() {
        let ch = make_channel(
            Matrix2::new(1.0, 0.0, 0.0, 0.0),
            Matrix2::identity() * 0.5,
            1e-12,
        )
        .unwrap();
        for k in 1..=20 {
            let out = apply_one_sided(&tmss(k as f64 * 0.1).unwrap(), &ch, 1).unwrap();
            assert!(two_mode_separable(&out, 1e-9).unwrap().separable);
        }
    }

    #[test]
    fn detf0_small_campaign() {
        let report = verify_detf_zero(300, 5).unwrap();
        assert!(report.pass, "{:?}", report.mismatches);
    }

    #[test]
    fn physicality_crosscheck_small() {
        let report = crosscheck_physicality(2000, 17).unwrap();
        assert!(report.pass, "{:?}", report.mismatches.first());
    }

    #[test]
    fn physicality_generator_hits_both_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let physical = (0..1000)
            .filter(|_| is_physical(&random_two_mode_matrix(&mut rng), 0.0))
            .count();
        assert!(physical > 100 && physical < 900, "{physical}");
    }

    #[test]
    fn input_independence_small() {
        let report = verify_input_independence(&small(2, 20, 4), 20).unwrap();
        assert!(report.pass);
        assert_eq!(report.trials_run, 400);
    }

    #[test]
    fn sweep_identity_ratio_is_one() {
        let sweep = sweep_entanglement_ratio(&identity(), &[0.5, 1.0]).unwrap();
        assert!(!sweep.degenerate);
        for row in &sweep.rows {
            assert_abs_diff_eq!(row.ratio, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sweep_pure_loss_ratio_varies() {
        let sweep =
            sweep_entanglement_ratio(&pure_loss(0.5).unwrap(), &[0.2, 0.5, 1.0, 1.5, 2.0]).unwrap();
        assert!(sweep.ratio_spread() > 0.01);
    }

    #[test]
    fn sweep_small_r_goes_to_zero_together() {
        let sweep = sweep_entanglement_ratio(&pure_loss(0.5).unwrap(), &[1e-4]).unwrap();
        let row = sweep.rows[0];
        assert!(row.e_in < 1e-3 && row.e_out < 1e-3);
    }

    #[test]
    fn sweep_disentangling_channel_is_degenerate() {
        let ch = crate::channels::phase_conjugate(2.0).unwrap();
        let sweep = sweep_entanglement_ratio(&ch, &default_r_grid()).unwrap();
        assert!(sweep.degenerate);
        assert!(sweep.rows.iter().all(|row| row.e_out == 0.0));
    }

    #[test]
    fn sweep_rejects_non_positive_r() {
        assert!(sweep_entanglement_ratio(&identity(), &[0.0]).is_err());
    }

    #[test]
    fn output_separability_dispatches_on_mode_count() {
        let v = output_separability(&vacuum(3).unwrap(), 1e-9).unwrap();
        assert_eq!(v.method, crate::separability::SeparabilityMethod::PptForm);
        let v = output_separability(&vacuum(2).unwrap(), 1e-9).unwrap();
        assert_eq!(
            v.method,
            crate::separability::SeparabilityMethod::DeterminantForm
        );
    }
}
