use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gaussent::verifier::ChannelFilter;
use gaussent_cli::{exit, parse_grid, CampaignArg, CliError, VerifyArgs};

#[derive(Parser)]
#[command(
    name = "gaussent",
    version,
    about = "Gaussian states and one-sided Gaussian channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a channel as entanglement preserving or disentangling.
    Classify {
        channel: PathBuf,
        /// Skip channel validation (inspection only).
        #[arg(long)]
        no_validate: bool,
    },
    /// Apply a channel to one mode of a state.
    Evolve {
        state: PathBuf,
        channel: PathBuf,
        /// Mode the channel acts on (default: last mode).
        #[arg(long)]
        mode: Option<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Report physicality, separability and log-negativity of a state.
    Check {
        state: PathBuf,
        /// Bipartition `{mode} | rest` for the PPT test and log-negativity.
        #[arg(long)]
        mode: Option<usize>,
    },
    /// Run a randomized verification campaign.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        modes: usize,
        #[arg(long, value_enum, default_value_t = Campaign::Prop1)]
        campaign: Campaign,
        /// Inputs per channel for the independence campaign.
        #[arg(long, default_value_t = 100)]
        inputs_per_channel: usize,
        #[arg(long, value_enum, default_value_t = Filter::Any)]
        filter: Filter,
        /// Also draw mixed input states (exploratory).
        #[arg(long)]
        mixed_inputs: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Tabulate log-negativity of a squeezed pair through the channel.
    Sweep {
        channel: PathBuf,
        /// Comma-separated squeeze values (default 0.1..2.0 step 0.1).
        #[arg(long)]
        r_grid: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Campaign {
    Prop1,
    Detf0,
    Physicality,
    Independence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Filter {
    Any,
    Preserving,
    Disentangling,
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    match cli.command {
        Command::Classify {
            channel,
            no_validate,
        } => gaussent_cli::run_classify(&channel, !no_validate, &mut out),
        Command::Evolve {
            state,
            channel,
            mode,
            out: path,
        } => gaussent_cli::run_evolve(&state, &channel, mode, &path, &mut out, &mut err),
        Command::Check { state, mode } => gaussent_cli::run_check(&state, mode, &mut out),
        Command::Verify {
            trials,
            seed,
            modes,
            campaign,
            inputs_per_channel,
            filter,
            mixed_inputs,
            out: path,
        } => {
            let args = VerifyArgs {
                campaign: match campaign {
                    Campaign::Prop1 => CampaignArg::Prop1,
                    Campaign::Detf0 => CampaignArg::Detf0,
                    Campaign::Physicality => CampaignArg::Physicality,
                    Campaign::Independence => CampaignArg::Independence,
                },
                trials,
                seed,
                modes,
                inputs_per_channel,
                filter: match filter {
                    Filter::Any => ChannelFilter::Any,
                    Filter::Preserving => ChannelFilter::PreservingOnly,
                    Filter::Disentangling => ChannelFilter::DisentanglingOnly,
                },
                mixed_inputs,
                out: path,
            };
            gaussent_cli::run_verify(&args, &mut out, &mut err)
        }
        Command::Sweep {
            channel,
            r_grid,
            out: path,
        } => {
            let grid = r_grid.as_deref().map(parse_grid).transpose()?;
            gaussent_cli::run_sweep(
                &channel,
                grid.as_deref(),
                path.as_deref(),
                &mut out,
                &mut err,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { 0 });
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        let _ = writeln!(io::stderr(), "error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
