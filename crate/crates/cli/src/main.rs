use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use ultralab_cli::acceptance::{self, CRITERIA};
use ultralab_cli::commands;
use ultralab_cli::{parse_config, CliError, ExperimentConfig, Overrides};

/// Finite-level ultrafunction laboratory.
#[derive(Parser)]
#[command(name = "ultralab", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    level: Option<i32>,
    /// Inclusive level range such as `4..9`.
    #[arg(long, global = true, value_name = "MIN..MAX")]
    levels: Option<String>,
    /// Physical domain `a,b`.
    #[arg(long, global = true, value_name = "A,B", allow_hyphen_values = true, value_parser = parse_domain)]
    domain: Option<Domain>,
    #[arg(long, global = true)]
    pad: Option<f64>,
    /// Consistency order of the derivative (2 or 4).
    #[arg(long, global = true)]
    p: Option<usize>,
    /// Bandwidth of the derivative.
    #[arg(long, global = true)]
    w: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Set any config key, e.g. `--set state.sigma=0.2` or
    /// `--set 'potential={kind="harmonic", omega=2.0}'`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective config as canonical TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Clone, Copy)]
struct Domain([f64; 2]);

fn parse_domain(s: &str) -> Result<Domain, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("domain `{s}` must look like `0,1`"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("domain `{s}`: {e}"));
    Ok(Domain([parse(a)?, parse(b)?]))
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the seven axioms at one level; writes axioms.json.
    Axioms,
    /// Full spectrum of the configured observable; writes spectrum.csv and
    /// eigenvector_<j>.csv.
    Spectrum,
    /// Heat or Schrödinger evolution; writes evolution.csv and traces.csv.
    Evolve,
    /// Measurement distribution of the configured state; writes
    /// measurement.json.
    Measure,
    /// Commutator expectations on deltas and on the configured state;
    /// writes commutator.json.
    Commutator,
    /// Level scan of a quantity with its fitted exponent; writes refine.csv
    /// and refine.json.
    Refine {
        /// poincare, consistency or energy.
        #[arg(long)]
        quantity: Option<String>,
    },
    /// Numerosity of `naturals` or of a comma-separated finite set.
    Numerosity {
        #[arg(value_name = "SET", allow_hyphen_values = true)]
        elements: String,
    },
    /// Evaluate a Euclidean-number expression such as `st(3 + 5*a^-1)`.
    ScalarEval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Run acceptance criteria (all by default); writes acceptance.json.
    Acceptance {
        #[arg(long)]
        criterion: Option<u32>,
    },
}

fn load(global: &GlobalArgs, extra: Vec<String>) -> Result<ExperimentConfig, CliError> {
    let text = match &global.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("config file {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut set = global.set.clone();
    set.extend(extra);
    let overrides = Overrides {
        level: global.level,
        levels: global.levels.clone(),
        domain: global.domain.map(|d| d.0),
        pad: global.pad,
        p: global.p,
        w: global.w,
        out: global.out.clone(),
        set,
    };
    parse_config(&text, &overrides)
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let extra = match &cli.command {
        Cmd::Refine { quantity: Some(q) } => vec![format!("quantity=\"{q}\"")],
        _ => vec![],
    };
    let config = load(&cli.global, extra)?;
    if cli.global.dump_config {
        return Ok((config.dump(), true));
    }
    let text = match cli.command {
        Cmd::Axioms => commands::axioms(&config)?,
        Cmd::Spectrum => commands::spectrum(&config)?,
        Cmd::Evolve => commands::evolve(&config)?,
        Cmd::Measure => commands::measure_cmd(&config)?,
        Cmd::Commutator => commands::commutator_cmd(&config)?,
        Cmd::Refine { .. } => commands::refine(&config)?,
        Cmd::Numerosity { elements } => commands::numerosity_cmd(&elements, config.level)?,
        Cmd::ScalarEval { expr } => commands::scalar_eval(&expr)?,
        Cmd::Acceptance { criterion } => return run_acceptance(&config, criterion),
    };
    Ok((text, true))
}

fn run_acceptance(config: &ExperimentConfig, criterion: Option<u32>) -> Result<(String, bool), CliError> {
    let ids: Vec<u32> = match criterion {
        Some(id) => vec![id],
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    let binary = std::env::current_exe()?;
    let mut text = String::new();
    let mut reports = Vec::new();
    for id in ids {
        let report = acceptance::run(id, &binary)?;
        text.push_str(&report.line());
        text.push('\n');
        reports.push(report);
    }
    let all_pass = reports.iter().all(|r| r.pass());
    fs::create_dir_all(&config.out)?;
    let body = serde_json::to_string_pretty(&json!({ "criteria": reports, "all_pass": all_pass }))?;
    fs::write(config.out.join("acceptance.json"), body + "\n")?;
    Ok((text, all_pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
