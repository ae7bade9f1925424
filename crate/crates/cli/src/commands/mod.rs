mod compare;
mod condense;
mod eval;
mod replay;
mod stats;
mod synth;

use std::path::Path;

use anyhow::{Context, Result};
use hgc_core::condense::{CondensationConfig, ConfigFile};
use hgc_core::graph::{load_dataset, HeteroGraph};

use crate::args::{Command, SelectionArgs};
use crate::usage;

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Stats(a) => stats::run(&a),
        Command::Condense(a) => condense::run(&a),
        Command::Eval(a) => eval::run(&a),
        Command::Bench(a) => crate::bench::run(&a),
        Command::Synth(a) => synth::run(&a),
        Command::Compare(a) => compare::run(&a),
        Command::Replay(a) => replay::run(&a),
    }
}

pub(crate) fn load(dir: &Path) -> Result<HeteroGraph> {
    load_dataset(dir).with_context(|| format!("loading dataset {}", dir.display()))
}

fn flags_as_config(s: &SelectionArgs) -> ConfigFile {
    ConfigFile {
        method: s.method,
        ratio: s.ratio,
        class_ratios: s.class_ratios.clone(),
        seed: s.seed,
        metapaths: s.metapaths.clone(),
        fusion: s.fusion,
        pool: s.pool,
        neighbor_policy: s.neighbor_policy.clone(),
        use_raw_features: s.raw_features.then_some(true),
    }
}

/// Config file values overridden by flags.
pub(crate) fn partial_config(file: Option<&Path>, flags: &SelectionArgs) -> Result<ConfigFile> {
    let base = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            ConfigFile::parse(&text).with_context(|| format!("in config {}", p.display()))?
        }
        None => ConfigFile::default(),
    };
    Ok(base.merge(flags_as_config(flags)))
}

pub(crate) fn resolve_config(file: Option<&Path>, flags: &SelectionArgs) -> Result<CondensationConfig> {
    let merged = partial_config(file, flags)?;
    if merged.method.is_none() {
        return Err(usage("--method is required"));
    }
    if merged.ratio.is_none() && merged.class_ratios.is_none() {
        return Err(usage("--ratio is required"));
    }
    // per-class ratios stand in for a single ratio; record their mean
    let nominal = merged
        .class_ratios
        .as_ref()
        .map(|r| r.iter().sum::<f64>() / r.len().max(1) as f64);
    let merged = ConfigFile {
        ratio: merged.ratio.or(nominal),
        ..merged
    };
    Ok(merged.resolve()?)
}

/// Flags that reproduce `cfg` without a config file.
pub(crate) fn config_args(cfg: &CondensationConfig) -> Vec<String> {
    let mut a = vec![
        "--method".to_string(),
        cfg.method.to_string(),
        "--ratio".into(),
        cfg.ratio.to_string(),
    ];
    if let Some(r) = &cfg.class_ratios {
        a.push("--class-ratios".into());
        a.push(r.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    }
    if !cfg.metapaths.is_empty() {
        a.push("--metapaths".into());
        a.push(cfg.metapaths.join(","));
    }
    a.extend([
        "--fusion".into(),
        cfg.fusion.to_string(),
        "--pool".into(),
        cfg.pool.to_string(),
        "--neighbor-policy".into(),
        cfg.neighbor_policy.to_string(),
    ]);
    if let Some(s) = cfg.seed {
        a.push("--seed".into());
        a.push(s.to_string());
    }
    if cfg.use_raw_features {
        a.push("--raw-features".into());
    }
    a
}

pub(crate) fn path_arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}
