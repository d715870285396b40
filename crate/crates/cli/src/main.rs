use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use l2contract_cli::{
    emit_csv, emit_plot_data, run_with_threads, CliError, ExperimentConfig, ExperimentKind,
};

#[derive(Parser)]
#[command(
    name = "l2contract",
    version,
    about = "Posterior contraction experiments for Gaussian models with unknown variance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type-I and type-II error decay of the local tests.
    TestErrors(Common),
    /// Union bound for the max test over a sieve cover.
    GlobalTest(Common),
    /// Lipschitz, tail and density-floor checks for a variance prior.
    PriorAudit(Common),
    /// Contraction of the sparse regression posterior.
    Highdim(Common),
    /// Contraction of the adaptive spline posterior.
    Spline(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving `<kind>.csv` and `<kind>.plot.csv`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    /// Print a complete default configuration and exit.
    #[arg(long)]
    print_defaults: bool,
}

fn execute(kind: ExperimentKind, args: Common) -> Result<(), CliError> {
    if args.print_defaults {
        print!("{}", kind.default_config().to_toml()?);
        return Ok(());
    }
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => kind.default_config(),
    };
    if config.kind() != kind {
        return Err(CliError::Config(format!(
            "configuration is for `{}`, not `{}`",
            config.kind().as_str(),
            kind.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    let rows = run_with_threads(&config, args.threads)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io {
        path: args.out_dir.display().to_string(),
        source: e,
    })?;
    let csv = args.out_dir.join(format!("{}.csv", kind.as_str()));
    let plot = args.out_dir.join(format!("{}.plot.csv", kind.as_str()));
    emit_csv(&rows, &csv)?;
    emit_plot_data(&rows, &plot)?;
    eprintln!("wrote {} rows to {}", rows.len(), csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::TestErrors(a) => (ExperimentKind::TestErrors, a),
        Command::GlobalTest(a) => (ExperimentKind::GlobalTest, a),
        Command::PriorAudit(a) => (ExperimentKind::PriorAudit, a),
        Command::Highdim(a) => (ExperimentKind::Highdim, a),
        Command::Spline(a) => (ExperimentKind::Spline, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
