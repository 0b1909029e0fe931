use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rwre_cli::{run, CliError, CliResult, ExperimentConfig, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "rwre", version, about = "Random walk in random environment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario named in the configuration file.
    Run(RunArgs),
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Flattened i.i.d. environment on the line.
    Sinai(RunArgs),
    /// Barrier environment on the line.
    Barriers(RunArgs),
    /// Weakly biased walk on a spatially embedded Galton–Watson tree.
    BrwBias(RunArgs),
    /// Edge-reinforced walk on a Galton–Watson tree.
    Errw(RunArgs),
    /// Excursion-coded and stick-breaking trees.
    CrtCheck(RunArgs),
    /// Brox diffusion in a Brownian potential.
    Brox(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated ladder, used when no configuration is given.
    #[arg(long, value_delimiter = ',')]
    ladder: Vec<u64>,
    /// Replications, used when no configuration is given.
    #[arg(long)]
    replications: Option<usize>,
}

fn build_config(args: &RunArgs, scenario: Option<Scenario>) -> CliResult<ExperimentConfig> {
    let mut config = match (&args.config, scenario) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(s)) => {
            if args.ladder.is_empty() {
                return Err(CliError::Config("give --config or --ladder".into()));
            }
            ExperimentConfig::new(s, 0, args.ladder.clone())
        }
        (None, None) => return Err(CliError::Config("run needs --config".into())),
    };
    if let Some(s) = scenario {
        if config.scenario != s {
            return Err(CliError::Config(format!(
                "configuration is for scenario '{}', not '{}'",
                config.scenario.name(),
                s.name()
            )));
        }
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(r) = args.replications {
        config.replications = r;
    }
    Ok(config)
}

fn execute(args: RunArgs, scenario: Option<Scenario>) -> CliResult<()> {
    let config = build_config(&args, scenario)?;
    let out_dir = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}", config.scenario.name())));
    let manifest = run(
        &config,
        &RunOptions {
            out_dir: out_dir.clone(),
            workers: args.workers,
        },
    )?;
    println!(
        "{}: {} files in {} ({:.2} s)",
        config.scenario.name(),
        manifest.outputs.len(),
        out_dir.display(),
        manifest.wall_clock_seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(c) => {
                let problems = c.validate();
                for p in &problems {
                    println!("{p}");
                }
                if problems.is_empty() {
                    println!("ok");
                    Ok(())
                } else {
                    return ExitCode::from(1);
                }
            }
            Err(e) => Err(e),
        },
        Command::Run(a) => execute(a, None),
        Command::Sinai(a) => execute(a, Some(Scenario::Sinai)),
        Command::Barriers(a) => execute(a, Some(Scenario::Barriers)),
        Command::BrwBias(a) => execute(a, Some(Scenario::BrwBias)),
        Command::Errw(a) => execute(a, Some(Scenario::Errw)),
        Command::CrtCheck(a) => execute(a, Some(Scenario::CrtCheck)),
        Command::Brox(a) => execute(a, Some(Scenario::Brox)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) | CliError::Invalid(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
