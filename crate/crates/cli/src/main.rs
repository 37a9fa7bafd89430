use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod figures;
mod output;
mod plot;

use figures::FigureId;
use output::Format;

/// Worker-count override for parallel sweeps.
const WORKERS_ENV: &str = "CROSSMAG_WORKERS";

/// Probe response of a cross-cavity magnomechanical system.
///
/// σ-valued flags (`--sigma`, sweep bounds on a σ axis) are in units of ω_b.
#[derive(Debug, Parser)]
#[command(name = "crossmag", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML parameter file; defaults apply to anything it leaves out
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render an SVG plot
    #[arg(long, global = true)]
    svg: bool,
    /// Pin the effective magnon–phonon coupling, in units of ω_b
    #[arg(long, global = true, value_name = "X", allow_negative_numbers = true)]
    gmb_override: Option<f64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Pinned,
    Selfconsistent,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the driven steady state
    Steady,
    /// Absorption, dispersion and transmission against σ
    Spectrum(SpectrumArgs),
    /// Transmission group delay against σ
    Delay(DelayArgs),
    /// Two-dimensional sweep of one observable
    Sweep2d(Sweep2dArgs),
    /// Cross-check the closed forms against independent solvers
    Verify(VerifyArgs),
    /// Reproduce a canned figure
    Fig {
        #[arg(value_enum)]
        id: FigureId,
    },
}

#[derive(Debug, Args)]
struct ProbeArgs {
    /// Amplitude ratio of the cavity-2 probe
    #[arg(long)]
    xi: Option<f64>,
    /// Relative probe phase (rad)
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
}

#[derive(Debug, Args)]
struct SigmaAxisArgs {
    /// First σ node, in units of ω_b
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    /// Last σ node, in units of ω_b
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    /// Number of σ nodes
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    axis: SigmaAxisArgs,
    /// Observable whose extrema are located
    #[arg(long, default_value = "absorption")]
    observable: crossmag::Observable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Analytic,
    Fd,
}

#[derive(Debug, Args)]
struct DelayArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    axis: SigmaAxisArgs,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Layout {
    /// One row per node
    Long,
    /// axis2 down, axis1 across
    Matrix,
}

#[derive(Debug, Args)]
struct Sweep2dArgs {
    #[command(flatten)]
    probe: ProbeArgs,
    /// Fixed σ for sweeps that do not scan it, in units of ω_b
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long)]
    axis1: Option<crossmag::AxisKind>,
    #[arg(long, allow_negative_numbers = true)]
    axis1_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    axis1_stop: Option<f64>,
    #[arg(long)]
    axis1_count: Option<usize>,
    #[arg(long)]
    axis2: Option<crossmag::AxisKind>,
    #[arg(long, allow_negative_numbers = true)]
    axis2_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    axis2_stop: Option<f64>,
    #[arg(long)]
    axis2_count: Option<usize>,
    #[arg(long)]
    observable: Option<crossmag::Observable>,
    #[arg(long, value_enum, default_value_t = Layout::Long)]
    layout: Layout,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Draws that also run the time-domain leg (default: all)
    #[arg(long)]
    time_domain_draws: Option<usize>,
}

/// Outcome of a successful dispatch.
enum Status {
    Ok,
    VerificationFailed,
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_workers().and_then(|()| commands::run(&cli));
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
