use std::io;
use std::process::ExitCode;

use anyhow::Context;
use arbor_cli::{parse_args, run_main, EXIT_OK, EXIT_USAGE};
use arbor_core::RunLog;
use clap::error::ErrorKind;
use tracing_subscriber::EnvFilter;

fn main() -> anyhow::Result<ExitCode> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .init();

    let inv = match parse_args(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            e.print().context("printing usage")?;
            return Ok(ExitCode::from(code as u8));
        }
    };

    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    let log = RunLog::with_sink(Box::new(io::stderr()));
    let code = runtime.block_on(run_main(
        &inv,
        |name| std::env::var(name).ok(),
        log,
        &mut io::stdout(),
        &mut io::stderr(),
    ));
    Ok(ExitCode::from(code as u8))
}
