use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ductsr::sr::Target;
use ductsr_cli::{cmd_filter, cmd_fit, cmd_generate, cmd_report, CliError, RunConfig, EXIT_OK, EXIT_UNSAT};

#[derive(Parser)]
#[command(
    name = "ductsr",
    version,
    about = "Duct-flow data, symbolic regression and equation filtering"
)]
struct Cli {
    /// Run configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true, value_parser = parse_pair)]
    set: Vec<(String, String)>,
    /// Output directory (default: $DUCTSR_OUT or ./ductsr-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed for the search.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the flow cases and write train.csv, test.csv and cases.csv.
    Generate,
    /// Search for equations and write the frontier as JSON and facts.
    Fit {
        #[arg(long, value_parser = parse_target)]
        target: Target,
        /// Directory holding train.csv (default: the output directory).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Select equations from a facts file under a constraint program.
    Filter {
        #[arg(long)]
        facts: PathBuf,
        /// Constraint program (default: constraint keys of the run config).
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Score one frontier equation and write plot data.
    Report {
        #[arg(long)]
        frontier: PathBuf,
        #[arg(long)]
        id: usize,
        /// Directory holding train.csv and test.csv (default: the output directory).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Regressed column; inferred from `frontier_<t>.json` when omitted.
        #[arg(long, value_parser = parse_target)]
        target: Option<Target>,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse()
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut overrides = cli.set;
    if let Some(out) = &cli.out {
        overrides.push(("out_dir".into(), out.display().to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Command::Fit {
        iterations: Some(n), ..
    } = &cli.command
    {
        overrides.push(("n_iterations".into(), n.to_string()));
    }
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Generate => {
            cmd_generate(&cfg, &mut stdout)?;
        }
        Command::Fit { target, data, .. } => {
            let dir = data.unwrap_or_else(|| cfg.out_dir.clone());
            cmd_fit(&cfg, target, &dir, &mut stdout)?;
        }
        Command::Filter { facts, constraints } => {
            let sel = cmd_filter(&cfg, &facts, constraints.as_deref(), &mut stdout)?;
            if !sel.is_sat() {
                return Ok(EXIT_UNSAT);
            }
        }
        Command::Report {
            frontier,
            id,
            data,
            target,
        } => {
            let dir = data.unwrap_or_else(|| cfg.out_dir.clone());
            cmd_report(&cfg, &frontier, id, &dir, target, &mut stdout)?;
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
