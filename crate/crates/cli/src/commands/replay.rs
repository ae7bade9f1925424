use anyhow::{bail, Result};
use clap::Parser;

use crate::args::{Cli, Command, ReplayArgs};
use crate::run::RunManifest;
use crate::usage;

pub fn run(a: &ReplayArgs) -> Result<()> {
    let m = RunManifest::read(&a.manifest)?;
    if m.tool_version != hgc_core::TOOL_VERSION {
        log::warn!(
            "manifest was written by {}, replaying with {}",
            m.tool_version,
            hgc_core::TOOL_VERSION
        );
    }
    let mut args = m.args.clone();
    if let Some(out) = &a.out {
        match args.iter().position(|s| s == "--out") {
            Some(i) if i + 1 < args.len() => args[i + 1] = out.to_string_lossy().into_owned(),
            _ => bail!(usage("the recorded command has no --out to redirect")),
        }
    }
    let cli = Cli::try_parse_from(std::iter::once("hgc".to_string()).chain(args))
        .map_err(|e| usage(format!("run manifest holds an invalid command: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(usage("a replay cannot replay another replay"));
    }
    super::execute(cli.command)
}
