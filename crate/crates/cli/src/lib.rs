//! Library side of the `hgc` command-line tool.

pub mod args;
pub mod bench;
mod commands;
pub mod run;

use std::fmt;

use anyhow::Result;
use hgc_core::Error;

pub use args::Cli;
pub use commands::execute;

/// A problem with how the tool was invoked, as opposed to the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// 1 for usage errors, 2 for invalid input data, 3 for anything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            if e.is_data_error() {
                return EXIT_DATA;
            }
            if matches!(e, Error::Config(_) | Error::Metapath { .. } | Error::WouldOverwrite(_)) {
                return EXIT_USAGE;
            }
            return EXIT_RUNTIME;
        }
    }
    EXIT_RUNTIME
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

/// Size the global worker pool. Only the first call in a process has an
/// effect.
pub fn init_threads(threads: Option<usize>) -> Result<()> {
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::debug!("thread pool already initialized: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads.is_some() {
        log::warn!("built without the `parallel` feature; --threads has no effect");
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    execute(cli.command)
}
