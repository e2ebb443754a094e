use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dtd_moments::commands::{self, FitArgs, Model, SimulateArgs};
use dtd_moments::validate::Dist;
use dtd_moments::{Error, ExitStatus, Result};
use dtd_moments_core::encoding::Shell;
use dtd_moments_core::SchemeSpec;

const UNITS: &str = "Units are fixed: b-values in ms/µm², diffusivities in µm²/ms, \
V[D_iso] in µm⁴/ms². File formats are described in FORMATS.md.\n\n\
Exit codes: 0 success, 2 usage or config error, 3 input or infeasible phantom, \
4 convergence or experiment failure, 5 validation failure.";

#[derive(Parser)]
#[command(name = "dtdm", version, about = "Matrix moments of diffusion tensor distributions", long_about = None, after_help = UNITS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect acquisition schemes.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Simulate signals of a phantom or an nc-mv-Gamma distribution.
    #[command(after_help = UNITS)]
    Simulate(SimulateCmd),
    /// Fit a signal model to a signal file.
    #[command(after_help = UNITS)]
    Fit(FitCmd),
    /// Compare finite-difference moments of the MGF with the closed forms.
    #[command(name = "validate-moments", after_help = UNITS)]
    ValidateMoments(ValidateCmd),
    /// Run a Monte-Carlo experiment described by a config file.
    #[command(after_help = UNITS)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Write a scheme CSV (header n_acq,b,b_delta,theta,phi,bxx,byy,bzz,byz,bxz,bxy).
    #[command(after_help = UNITS)]
    Gen(SchemeGen),
    /// Print a per-shell summary of a scheme CSV.
    Show {
        file: PathBuf,
    },
}

#[derive(Args)]
struct SchemeGen {
    /// The built-in 100-point scheme: b ∈ {0.1, 0.7, 1.4, 2.0} ms/µm² × b_delta ∈ {−0.5, 0, 1}.
    #[arg(long, conflicts_with = "shell")]
    default: bool,
    /// A shell as `b:b_delta:count` (b in ms/µm²); repeatable.
    #[arg(long, value_parser = parse_shell)]
    shell: Vec<Shell>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_shell(s: &str) -> std::result::Result<Shell, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [b, bd, n] = parts[..] else {
        return Err(format!("expected b:b_delta:count, got `{s}`"));
    };
    Ok(Shell {
        b: b.trim().parse().map_err(|_| format!("bad b `{b}`"))?,
        b_delta: bd.trim().parse().map_err(|_| format!("bad b_delta `{bd}`"))?,
        count: n.trim().parse().map_err(|_| format!("bad count `{n}`"))?,
    })
}

fn parse_snr(s: &str) -> std::result::Result<f64, String> {
    let v = match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => f64::INFINITY,
        t => t.parse::<f64>().map_err(|_| format!("`{s}` is not a number or inf"))?,
    };
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("SNR must be positive, got {s}"))
    }
}

#[derive(Args)]
struct SimulateCmd {
    /// Phantom config (key = value; see FORMATS.md).
    #[arg(short, long)]
    config: PathBuf,
    /// Scheme CSV; overrides the config's `scheme` key.
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Signal-to-noise ratio of the b = 0 signal, or `inf` for noiseless signals.
    #[arg(long, default_value = "inf", value_parser = parse_snr)]
    snr: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Signal CSV (n_acq,signal); stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mvgamma,
    Cov,
    Dti,
}

#[derive(Args)]
struct FitCmd {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Signal CSV (n_acq,signal).
    #[arg(long)]
    signals: PathBuf,
    /// Scheme CSV.
    #[arg(long)]
    scheme: PathBuf,
    /// Number of mv-Gamma starts.
    #[arg(long, default_value_t = 5)]
    starts: usize,
    /// Seed of the start perturbations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Levenberg-Marquardt iteration cap per start.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Fit JSON; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Gamma,
    Gaussian,
}

#[derive(Args)]
struct ValidateCmd {
    #[arg(long, value_enum)]
    dist: DistArg,
    /// Number of random parameter sets.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentCmd {
    /// Experiment config (key = value; see FORMATS.md).
    config: PathBuf,
    /// Output directory; defaults to `<config stem>_out` next to the config.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (0 uses every core). Results do not depend on it.
    #[arg(short, long, default_value_t = 0)]
    jobs: usize,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scheme(SchemeCmd::Gen(g)) => {
            let spec = if g.default {
                SchemeSpec::default_scheme()
            } else if !g.shell.is_empty() {
                SchemeSpec { shells: g.shell }
            } else {
                return Err(Error::Usage("scheme gen needs --default or at least one --shell".into()));
            };
            commands::scheme_gen(&spec, g.output.as_deref())?;
        }
        Command::Scheme(SchemeCmd::Show { file }) => print!("{}", commands::scheme_show(&file)?),
        Command::Simulate(s) => {
            commands::simulate(&SimulateArgs {
                config: &s.config,
                scheme: s.scheme.as_deref(),
                snr: s.snr,
                seed: s.seed,
                out: s.output.as_deref(),
            })?;
        }
        Command::Fit(f) => {
            commands::fit(&FitArgs {
                model: match f.model {
                    ModelArg::Mvgamma => Model::MvGamma,
                    ModelArg::Cov => Model::Cov,
                    ModelArg::Dti => Model::Dti,
                },
                signals: &f.signals,
                scheme: &f.scheme,
                starts: f.starts,
                seed: f.seed,
                max_iter: f.max_iter,
                out: f.output.as_deref(),
            })?;
        }
        Command::ValidateMoments(v) => {
            let dist = match v.dist {
                DistArg::Gamma => Dist::Gamma,
                DistArg::Gaussian => Dist::Gaussian,
            };
            commands::validate(dist, v.trials, v.seed, v.output.as_deref())?;
        }
        Command::Experiment(e) => {
            let report = commands::experiment(&e.config, e.output.as_deref(), e.jobs)?;
            print!("{}", commands::report_table(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(ExitStatus::Success.code()),
        Err(e) => {
            eprintln!("dtdm: {e}");
            ExitCode::from(e.status().code())
        }
    }
}
