use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use rose_cli::commands::{self, AnalyzeArgs, Output};
use rose_cli::config::{output_dir, RunConfig};
use rose_cli::CliError;

/// Executable model of MERGE-based syntax over oscillatory and spiking codes.
///
/// Exit codes: 0 ok, 2 config or input error, 3 decode failure, 4
/// integration failure. Output goes to --out, else the config's
/// output_dir, else $ROSE_OUT_DIR, else ./rose-out.
#[derive(Parser)]
#[command(name = "rose", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a derivation script and print the labeled tree as canonical JSON.
    Derive {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode the configured derivation into a bundle directory.
    Encode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a bundle directory back into a tree.
    Decode {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode, decode and write report.json.
    Roundtrip {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the coupled four-level simulation.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupling and synchrony metrics for trace and phase CSV files.
    Analyze {
        /// `t,value` CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// CSV with one phase column per oscillator (`e_*`, e.g. a trajectory).
        #[arg(long)]
        phases: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        f_low: f64,
        #[arg(long, default_value_t = 60.0)]
        f_high: f64,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage on a bundled example.
    Demo {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<Output, CliError> {
    let out = |flag: &Option<PathBuf>, cfg: Option<&RunConfig>| output_dir(flag.as_deref(), cfg);
    match command {
        Command::Derive { script, lexicon, out: o } => commands::cmd_derive(&script, &lexicon, &out(&o, None)),
        Command::Encode { config, out: o } => {
            let cfg = RunConfig::load(&config)?;
            commands::cmd_encode(&cfg, &out(&o, Some(&cfg)))
        }
        Command::Decode { bundle, lexicon, out: o } => commands::cmd_decode(&bundle, &lexicon, &out(&o, None)),
        Command::Roundtrip { config, out: o } => {
            let cfg = RunConfig::load(&config)?;
            commands::cmd_roundtrip(&cfg, &out(&o, Some(&cfg)))
        }
        Command::Simulate { config, out: o } => {
            let cfg = RunConfig::load(&config)?;
            commands::cmd_simulate(&cfg, &out(&o, Some(&cfg)))
        }
        Command::Analyze { trace, phases, f_low, f_high, plot, out: o } => {
            let args = AnalyzeArgs {
                trace: trace.as_deref(),
                phases: phases.as_deref(),
                f_low,
                f_high,
                plot,
            };
            commands::cmd_analyze(&args, &out(&o, None))
        }
        Command::Demo { out: o } => commands::cmd_demo(&out(&o, None)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            return ExitCode::from(2);
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments");
            eprintln!("error[config]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(o) => {
            let _ = std::io::stdout().write_all(o.stdout.as_bytes());
            let _ = std::io::stderr().write_all(o.stderr.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
