use std::path::PathBuf;
use std::process::ExitCode;

use charge_class_cli::config::parse_eps_list;
use charge_class_cli::{run, CliError, Command, Overrides, RunConfig};
use clap::Parser;

/// Experiments for the generic one-dimensional Dirac system.
#[derive(Debug, Parser)]
#[command(name = "charge-class", version)]
struct Args {
    /// simulate, picard, illposed-sweep, keybound, diagnostics or convergence
    command: String,
    /// Strict JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `n_cells`.
    #[arg(long)]
    n_cells: Option<usize>,
    /// Comma-separated list overriding `eps_list`.
    #[arg(long, value_parser = parse_eps_list)]
    eps_list: Option<EpsList>,
}

type EpsList = Vec<f64>;

fn execute(args: Args) -> Result<(), CliError> {
    let command: Command = args.command.parse()?;
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(Overrides {
        command: Some(command),
        out_dir: args.out,
        n_cells: args.n_cells,
        eps_list: args.eps_list,
    });
    let cfg = cfg.resolve()?;
    let summary = run(&cfg)?;
    for c in &summary.checks {
        println!(
            "PASS {} = {:e} ({} {:e})",
            c.name, c.value, c.relation, c.limit
        );
    }
    println!("artifacts written to {}", cfg.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("charge-class: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
