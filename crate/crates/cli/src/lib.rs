//! File formats and subcommand implementations for the `gaussent` binary.
//!
//! Commands write their primary output to `out` and diagnostics to `err`, and
//! return the process exit code. Exit codes: 0 success (or `Preserving` for
//! `classify`), 1 failed verification, 2 `Disentangling`, 3 `Boundary`,
//! 64 usage, 65 malformed input file, 66 invalid channel, 67 mode out of
//! range, 74 I/O failure.

pub mod format;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use gaussent::channels::{
    apply_one_sided, classify, make_channel, GaussianChannel, VerdictKind, BOUNDARY_TOL,
};
use gaussent::separability::{
    determinant_physicality, log_negativity, ppt_separable, two_mode_separable,
};
use gaussent::symplectic::{is_physical, physicality_margin, CovarianceMatrix};
use gaussent::verifier::{
    crosscheck_physicality, default_r_grid, sweep_entanglement_ratio, verify_detf_zero_with,
    verify_input_independence, verify_proposition, ChannelFilter, TrialConfig, VerificationReport,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

pub use format::format_sig;

pub const SCHEMA_VERSION: &str = "1";
pub const ORDERING: &str = "q1p1q2p2";
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Symmetry tolerance applied when loading a state file.
pub const LOAD_SYMMETRY_TOL: f64 = 1e-9;
/// Tolerance for channel validation when loading a channel file.
pub const CHANNEL_TOL: f64 = 1e-12;
/// Tolerance for physicality and separability verdicts printed by commands.
pub const VERDICT_TOL: f64 = 1e-9;

pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const DISENTANGLING: i32 = 2;
    pub const BOUNDARY: i32 = 3;
    pub const USAGE: i32 = 64;
    pub const MALFORMED: i32 = 65;
    pub const INVALID_CHANNEL: i32 = 66;
    pub const MODE_OUT_OF_RANGE: i32 = 67;
    pub const IO: i32 = 74;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("invalid channel in {path}: {reason}")]
    InvalidChannel { path: PathBuf, reason: String },
    #[error("mode {mode} out of range for {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] gaussent::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Malformed { .. } => exit::MALFORMED,
            CliError::InvalidChannel { .. } => exit::INVALID_CHANNEL,
            CliError::ModeOutOfRange { .. } => exit::MODE_OUT_OF_RANGE,
            CliError::Io { .. } => exit::IO,
            CliError::Core(gaussent::Error::ModeOutOfRange { .. }) => exit::MODE_OUT_OF_RANGE,
            CliError::Core(gaussent::Error::InvalidSpec(_)) => exit::USAGE,
            CliError::Core(_) => exit::MALFORMED,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, reason: impl Into<String>) -> CliError {
    CliError::Malformed {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Covariance matrix on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub schema_version: String,
    pub n_modes: usize,
    pub ordering: String,
    pub vacuum_variance: f64,
    /// Row-major `2N x 2N` entries.
    pub matrix: Vec<f64>,
}

impl StateFile {
    pub fn from_cm(cm: &CovarianceMatrix) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            n_modes: cm.n_modes(),
            ordering: ORDERING.into(),
            vacuum_variance: VACUUM_VARIANCE,
            matrix: cm.to_row_major(),
        }
    }

    /// Checks the header fields and symmetry, then builds the matrix.
    pub fn to_cm(&self) -> std::result::Result<CovarianceMatrix, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {:?}",
                self.schema_version
            ));
        }
        if self.ordering != ORDERING {
            return Err(format!(
                "ordering must be {ORDERING:?}, got {:?}",
                self.ordering
            ));
        }
        if self.vacuum_variance != VACUUM_VARIANCE {
            return Err(format!(
                "vacuum_variance must be {VACUUM_VARIANCE}, got {}",
                self.vacuum_variance
            ));
        }
        if self.n_modes == 0 {
            return Err("n_modes must be positive".into());
        }
        let dim = 2 * self.n_modes;
        if self.matrix.len() != dim * dim {
            return Err(format!(
                "matrix has {} entries, expected {}",
                self.matrix.len(),
                dim * dim
            ));
        }
        if self.matrix.iter().any(|v| !v.is_finite()) {
            return Err("matrix has non-finite entries".into());
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let (a, b) = (self.matrix[i * dim + j], self.matrix[j * dim + i]);
                if (a - b).abs() > LOAD_SYMMETRY_TOL {
                    return Err(format!("matrix not symmetric at ({i}, {j}): {a} vs {b}"));
                }
            }
        }
        CovarianceMatrix::from_row_slice(self.n_modes, &self.matrix).map_err(|e| e.to_string())
    }
}

/// Channel `(f, g)` on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub schema_version: String,
    pub f: [f64; 4],
    pub g: [f64; 4],
}

impl ChannelFile {
    pub fn from_channel(ch: &GaussianChannel) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            f: ch.f_row_major(),
            g: ch.g_row_major(),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| malformed(path, e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn load_state(path: &Path) -> Result<CovarianceMatrix> {
    let file: StateFile = read_json(path)?;
    file.to_cm().map_err(|reason| malformed(path, reason))
}

pub fn save_state(path: &Path, cm: &CovarianceMatrix) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_cm(cm)).expect("state serializes");
    write_text(path, &(text + "\n"))
}

/// Loads a channel. With `validate = false` the pair is returned as-is so it
/// can be inspected; it must not be applied.
pub fn load_channel(path: &Path, validate: bool) -> Result<GaussianChannel> {
    let file: ChannelFile = read_json(path)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(malformed(
            path,
            format!("unsupported schema_version {:?}", file.schema_version),
        ));
    }
    if file.f.iter().chain(&file.g).any(|v| !v.is_finite()) {
        return Err(malformed(path, "non-finite entries"));
    }
    let (f, g) = GaussianChannel::from_row_major(file.f, file.g);
    if !validate {
        return Ok(GaussianChannel::new_unchecked(f, g));
    }
    make_channel(f, g, CHANNEL_TOL).map_err(|e| CliError::InvalidChannel {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn save_channel(path: &Path, ch: &GaussianChannel) -> Result<()> {
    let text =
        serde_json::to_string_pretty(&ChannelFile::from_channel(ch)).expect("channel serializes");
    write_text(path, &(text + "\n"))
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("json serializes");
    writeln!(out, "{text}").map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn warn(err: &mut dyn Write, msg: &str) {
    let _ = writeln!(err, "warning: {msg}");
}

/// `classify`: prints the verdict record; exit code encodes the verdict.
pub fn run_classify(channel: &Path, validate: bool, out: &mut dyn Write) -> Result<i32> {
    let ch = load_channel(channel, validate)?;
    let verdict = classify(&ch, BOUNDARY_TOL);
    let valid = make_channel(*ch.f(), *ch.g(), CHANNEL_TOL).is_ok();
    emit(
        out,
        &json!({
            "kind": verdict.kind,
            "margin": verdict.margin,
            "det_f": ch.det_f(),
            "det_g": ch.det_g(),
            "physicality_margin": ch.physicality_margin(),
            "complete_positivity_margin": ch.complete_positivity_margin(),
            "valid": valid,
        }),
    )?;
    Ok(match verdict.kind {
        VerdictKind::Preserving => exit::OK,
        VerdictKind::Disentangling => exit::DISENTANGLING,
        VerdictKind::Boundary => exit::BOUNDARY,
    })
}

fn check_mode(cm: &CovarianceMatrix, mode: usize) -> Result<()> {
    if mode >= cm.n_modes() {
        Err(CliError::ModeOutOfRange {
            mode,
            n_modes: cm.n_modes(),
        })
    } else {
        Ok(())
    }
}

/// Verdict record shared by `evolve` and `check`.
fn state_report(cm: &CovarianceMatrix, mode: Option<usize>) -> Result<serde_json::Value> {
    let margin = physicality_margin(cm)?;
    let physical = margin >= -VERDICT_TOL;
    let mut record = json!({
        "n_modes": cm.n_modes(),
        "physical": physical,
        "physicality_margin": margin,
    });
    if cm.n_modes() == 2 {
        let d = determinant_physicality(cm, VERDICT_TOL)?;
        record["determinant_form"] = json!({
            "physical": d.physical,
            "slack": d.slack,
            "det_sigma": d.det_sigma,
        });
    }
    if !physical {
        record["separability"] = serde_json::Value::Null;
        record["ppt"] = serde_json::Value::Null;
        record["log_negativity"] = serde_json::Value::Null;
        return Ok(record);
    }
    record["separability"] = if cm.n_modes() == 2 {
        serde_json::to_value(two_mode_separable(cm, VERDICT_TOL)?).expect("verdict serializes")
    } else {
        serde_json::Value::Null
    };
    let split = mode.unwrap_or(cm.n_modes() - 1);
    record["ppt"] = if cm.n_modes() >= 2 && (mode.is_some() || cm.n_modes() > 2) {
        let mut v = serde_json::to_value(ppt_separable(cm, split, VERDICT_TOL)?)
            .expect("verdict serializes");
        v["mode"] = json!(split);
        v
    } else {
        serde_json::Value::Null
    };
    record["log_negativity"] = if cm.n_modes() >= 2 {
        json!({ "mode": split, "value": log_negativity(cm, split)? })
    } else {
        serde_json::Value::Null
    };
    Ok(record)
}

/// `evolve`: applies the channel to `mode` (default: last mode) and writes the
/// output state file.
pub fn run_evolve(
    state: &Path,
    channel: &Path,
    mode: Option<usize>,
    out_path: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let cm = load_state(state)?;
    let ch = load_channel(channel, true)?;
    let mode = mode.unwrap_or(cm.n_modes() - 1);
    check_mode(&cm, mode)?;
    if !is_physical(&cm, VERDICT_TOL) {
        warn(err, "input state violates the uncertainty principle");
    }
    let evolved = apply_one_sided(&cm, &ch, mode)?;
    save_state(out_path, &evolved)?;
    let mut record = state_report(&evolved, Some(mode))?;
    record["channel_verdict"] =
        serde_json::to_value(classify(&ch, BOUNDARY_TOL)).expect("verdict serializes");
    record["output"] = json!(out_path.display().to_string());
    emit(out, &record)?;
    Ok(exit::OK)
}

/// `check`: physicality, separability and log-negativity of a state file.
pub fn run_check(state: &Path, mode: Option<usize>, out: &mut dyn Write) -> Result<i32> {
    let cm = load_state(state)?;
    if let Some(m) = mode {
        check_mode(&cm, m)?;
    }
    emit(out, &state_report(&cm, mode)?)?;
    Ok(exit::OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CampaignArg {
    Prop1,
    Detf0,
    Physicality,
    Independence,
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub campaign: CampaignArg,
    pub trials: usize,
    pub seed: u64,
    pub modes: usize,
    pub inputs_per_channel: usize,
    pub filter: ChannelFilter,
    pub mixed_inputs: bool,
    pub out: Option<PathBuf>,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        Self {
            campaign: CampaignArg::Prop1,
            trials: 10_000,
            seed: 42,
            modes: 2,
            inputs_per_channel: 100,
            filter: ChannelFilter::Any,
            mixed_inputs: false,
            out: None,
        }
    }
}

pub fn run_verification(args: &VerifyArgs) -> Result<VerificationReport> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if !(2..=6).contains(&args.modes) {
        return Err(CliError::Usage("--modes must be between 2 and 6".into()));
    }
    let cfg = TrialConfig {
        n_trials: args.trials,
        seed: args.seed,
        n_modes: args.modes,
        channel_filter: args.filter,
        mixed_inputs: args.mixed_inputs,
        ..TrialConfig::default()
    };
    let report = match args.campaign {
        CampaignArg::Prop1 => verify_proposition(&cfg)?,
        CampaignArg::Detf0 => verify_detf_zero_with(&cfg)?,
        CampaignArg::Physicality => crosscheck_physicality(args.trials, args.seed)?,
        CampaignArg::Independence => verify_input_independence(&cfg, args.inputs_per_channel)?,
    };
    Ok(report)
}

/// `verify`: runs a campaign and writes the report; exit 0 iff it passes.
pub fn run_verify(args: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let report = run_verification(args)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &args.out {
        Some(path) => write_text(path, &text)?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e))?,
    }
    let _ = writeln!(
        err,
        "{} trials, {} excluded at boundary, {} mismatches: {}",
        report.trials_run,
        report.trials_excluded_boundary,
        report.mismatches.len(),
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.pass {
        exit::OK
    } else {
        exit::VERIFY_FAILED
    })
}

/// Parses a comma-separated squeeze grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("bad --r-grid {text:?}: {e}")))?;
    if grid.is_empty() || grid.iter().any(|r| *r <= 0.0 || !r.is_finite()) {
        return Err(CliError::Usage(
            "--r-grid values must be finite and > 0".into(),
        ));
    }
    Ok(grid)
}

pub fn sweep_csv(ch: &GaussianChannel, grid: &[f64]) -> Result<(String, bool)> {
    let sweep = sweep_entanglement_ratio(ch, grid)?;
    let mut csv = String::from("r,E_in,E_out,ratio\n");
    for row in &sweep.rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(row.r, 12),
            format_sig(row.e_in, 12),
            format_sig(row.e_out, 12),
            format_sig(row.ratio, 12)
        ));
    }
    Ok((csv, sweep.degenerate))
}

/// `sweep`: log-negativity table of `tmss(r)` through the channel.
pub fn run_sweep(
    channel: &Path,
    grid: Option<&[f64]>,
    out_csv: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let ch = load_channel(channel, true)?;
    let default = default_r_grid();
    let grid = grid.unwrap_or(&default);
    let (csv, degenerate) = sweep_csv(&ch, grid)?;
    if degenerate {
        warn(
            err,
            "channel is disentangling: every output is separable and E_out is zero",
        );
    }
    match out_csv {
        Some(path) => write_text(path, &csv)?,
        None => out
            .write_all(csv.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e))?,
    }
    Ok(exit::OK)
}
