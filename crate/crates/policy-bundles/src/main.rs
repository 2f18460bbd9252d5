//! Command-line entry point. Logs go to stderr, data only to files; exit
//! codes: 2 config, 3 data, 4 numerical.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use policy_bundles::cluster::gower::BinaryMode;
use policy_bundles::error::ErrorCategory;
use policy_bundles::run::{run_command, Command, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "policy-bundles",
    about = "Cluster state drug-policy bundles and fit lagged overdose-mortality models",
    version
)]
struct Cli {
    /// One of: synth, ingest, cluster, fit, effects, simulate, brightspots, pipeline.
    command: String,

    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of clusters to cut.
    #[arg(long)]
    k: Option<usize>,

    /// Cluster lag set, comma separated (e.g. 1 or 1,2,3).
    #[arg(long)]
    lags: Option<String>,

    /// Gower treatment of binary variables.
    #[arg(long, value_name = "symmetric|asymmetric")]
    binary_mode: Option<String>,

    #[arg(long)]
    start_year: Option<i32>,

    #[arg(long)]
    end_year: Option<i32>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Seed for synthetic data generation.
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(cli: &Cli) -> policy_bundles::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(k) = cli.k {
        config.k = k;
    }
    if let Some(lags) = &cli.lags {
        let parsed: Result<Vec<u32>, _> =
            lags.split(',').map(|s| s.trim().parse::<u32>()).collect();
        config.cluster_lags = parsed.map_err(|_| {
            policy_bundles::Error::Config(format!("invalid --lags value `{lags}`"))
        })?;
    }
    if let Some(mode) = &cli.binary_mode {
        config.binary_mode = mode.parse::<BinaryMode>().map_err(|_| {
            policy_bundles::Error::Config(format!("invalid --binary-mode value `{mode}`"))
        })?;
    }
    if let Some(y) = cli.start_year {
        config.start_year = y;
    }
    if let Some(y) = cli.end_year {
        config.end_year = y;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();

    let Some(command) = Command::parse(&cli.command) else {
        log::error!("unknown command `{}`", cli.command);
        return ExitCode::from(2);
    };
    let result = build_config(&cli).and_then(|config| {
        let files = run_command(command, &config)?;
        for f in &files {
            log::info!("wrote {}", f.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            log::error!("{} failed: {err}", cli.command);
            let code = match err.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            };
            ExitCode::from(code)
        }
    }
}
