use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use gne_bench::cli::{Cli, Command};
use gne_bench::sweep::{parse_seeds, threads_from_env};
use gne_bench::{run_experiment, sweep, BenchError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<BenchError>().map_or(1, BenchError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.flags.load(args.config.as_deref())?;
            let summary = run_experiment(&cfg)?;
            println!(
                "{} on {} (m = {}): exploitability {:.3e} after {} restart(s), converged: {}",
                cfg.solver.as_str(),
                cfg.game,
                cfg.m,
                summary.final_exploitability,
                summary.restarts,
                summary.converged
            );
            println!("wrote {}", cfg.out_dir.display());
        }
        Command::Sweep(args) => {
            let cfg = args.flags.load(args.config.as_deref())?;
            let seeds = parse_seeds(&args.seeds)?;
            let threads = threads_from_env()?;
            let aggregate = sweep(&cfg, &seeds, threads).context("sweep failed")?;
            println!(
                "{}/{} converged at threshold {:e}, {} failed; median exploitability {:?}, median restarts {:?}",
                aggregate.converged,
                aggregate.runs,
                aggregate.threshold,
                aggregate.failed,
                aggregate.median_final_exploitability,
                aggregate.median_restarts
            );
        }
    }
    Ok(())
}
