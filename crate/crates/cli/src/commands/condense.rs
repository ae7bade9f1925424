use std::time::Instant;

use anyhow::{Context, Result};
use hgc_core::condense::{condense, ConfigFile};
use hgc_core::graph::save_dataset;

use super::{config_args, load, path_arg, resolve_config};
use crate::args::CondenseArgs;
use crate::run::{absolute, RunManifest};
use crate::usage;

pub fn run(a: &CondenseArgs) -> Result<()> {
    let cfg = resolve_config(a.config.as_deref(), &a.selection)?;
    let data = absolute(&a.data)?;
    let out = absolute(&a.out)?;
    if !a.overwrite && out.read_dir().map(|mut d| d.next().is_some()).unwrap_or(false) {
        return Err(usage(format!(
            "{} exists and is not empty (pass --overwrite to replace it)",
            out.display()
        )));
    }

    let mut args = vec!["condense".into(), "--data".into(), path_arg(&data), "--out".into(), path_arg(&out)];
    args.extend(config_args(&cfg));
    args.push("--overwrite".into());
    let mut run = RunManifest::new("condense", args, serde_json::to_value(ConfigFile::from(&cfg))?, String::new());

    let g = load(&data)?;
    run.dataset_checksum = g.fingerprint();
    let start = Instant::now();
    let res = condense(&g, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    save_dataset(&res.graph, &out, Some(&res.provenance), a.overwrite)
        .with_context(|| format!("writing {}", out.display()))?;

    println!(
        "{} ratio {}: kept {} of {} target nodes in {:.3}s",
        cfg.method,
        cfg.ratio,
        res.selected.len(),
        res.plan.pool_sizes.iter().sum::<usize>(),
        elapsed
    );
    println!("{:>5}  {:>8}  {:>6}  {:>13}", "class", "pool", "budget", "mean_distance");
    for c in &res.provenance.classes {
        let d = c.mean_distance.map_or("-".to_string(), |d| format!("{d:.6}"));
        println!("{:>5}  {:>8}  {:>6}  {:>13}", c.class, c.pool_size, c.budget, d);
    }
    run.outputs = vec![out.clone()];
    run.finish(&out)?;
    Ok(())
}
