mod args;
mod commands;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            anyhow::bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    commands::ensure_dir(&cli.out)?;
    let ctx = commands::Ctx { out: cli.out };
    match &cli.command {
        Command::Mesh(a) => commands::mesh(&ctx, a),
        Command::Assemble(a) => commands::assemble(&ctx, a),
        Command::Eigs(a) => commands::eigs(&ctx, a),
        Command::Resonate(a) => commands::resonate(&ctx, a),
        Command::Flux(a) => commands::flux(&ctx, a),
    }
}

fn kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<chladni::Error>() {
            return err.kind();
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "invalid-input"
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            eprintln!("error kind=usage message={:?}", first);
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error kind={} message={:?}", kind(&e), msg);
            ExitCode::FAILURE
        }
    }
}
