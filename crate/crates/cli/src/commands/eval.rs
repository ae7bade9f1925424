use std::time::Instant;

use anyhow::{Context, Result};
use hgc_core::condense::condense_with_cache;
use hgc_core::evaluate::{compare_runs, results_csv, EvalReport, ProxyEvaluator, TrainParams};
use hgc_core::graph::{load_dataset_with_report, Provenance};
use hgc_core::propagation::{FeatureRecipe, PropagationCache};
use hgc_core::Error;

use super::{config_args, load, partial_config, path_arg, resolve_config};
use crate::args::EvalArgs;
use crate::run::{absolute, write_atomic, RunManifest};
use crate::usage;

pub fn run(a: &EvalArgs) -> Result<()> {
    if a.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let hp = TrainParams {
        lr: a.train.lr,
        l2: a.train.l2,
        iters: a.train.iters,
    };
    let data = absolute(&a.data)?;
    let full = load(&data)?;
    let first_seed = a.selection.seed.unwrap_or(0);
    let seeds = first_seed..first_seed + a.repeat;

    let mut args = vec!["eval".to_string(), "--data".into(), path_arg(&data)];
    let mut reports = Vec::new();
    let config;

    if let Some(dir) = &a.condensed {
        let dir = absolute(dir)?;
        let (cg, manifest, _) = load_dataset_with_report(&dir)
            .with_context(|| format!("loading condensed dataset {}", dir.display()))?;
        let prov = manifest.provenance;
        if let Some(p) = &prov {
            if !p.source_fingerprint.is_empty() && p.source_fingerprint != full.fingerprint() {
                return Err(Error::DatasetMismatch(p.source_fingerprint.clone(), full.fingerprint()).into());
            }
        }
        let recipe = recipe_for(a, prov.as_ref())?;
        let ev = ProxyEvaluator::new(&full, recipe.clone(), hp)?;
        for seed in seeds {
            let mut r = ev.eval_condensed(&cg)?;
            label(&mut r, prov.as_ref(), seed);
            reports.push(r);
        }
        args.extend(["--condensed".into(), path_arg(&dir)]);
        args.extend(recipe_args(&recipe));
        config = serde_json::to_value(&recipe)?;
    } else if a.selection.method.is_some() || a.config.is_some() {
        let mut cfg = resolve_config(a.config.as_deref(), &a.selection)?;
        let ev = ProxyEvaluator::new(&full, cfg.eval_recipe(), hp)?;
        let cache = PropagationCache::new();
        for seed in seeds {
            cfg.seed = Some(seed);
            let start = Instant::now();
            let res = condense_with_cache(&full, &cfg, &cache)?;
            let condense_seconds = start.elapsed().as_secs_f64();
            let mut r = ev.eval_condensed(&res.graph)?;
            label(&mut r, Some(&res.provenance), seed);
            r.condense_seconds = condense_seconds;
            reports.push(r);
        }
        cfg.seed = Some(first_seed);
        args.extend(config_args(&cfg));
        config = serde_json::to_value(hgc_core::condense::ConfigFile::from(&cfg))?;
    } else {
        let recipe = recipe_for(a, None)?;
        let ev = ProxyEvaluator::new(&full, recipe.clone(), hp)?;
        for seed in seeds {
            let mut r = ev.eval_full()?;
            r.ratio = 1.0;
            r.seed = Some(seed);
            reports.push(r);
        }
        args.extend(recipe_args(&recipe));
        config = serde_json::to_value(&recipe)?;
    }

    let table = report_table(&reports)?;
    print!("{table}");
    if let Some(t) = &a.table {
        write_atomic(t, table.as_bytes())?;
    }
    if let Some(out) = &a.out {
        let out = absolute(out)?;
        write_atomic(&out, results_csv(&reports).as_bytes())?;
        if !args.iter().any(|s| s == "--seed") {
            args.extend(["--seed".into(), first_seed.to_string()]);
        }
        args.extend([
            "--repeat".into(),
            a.repeat.to_string(),
            "--lr".into(),
            hp.lr.to_string(),
            "--l2".into(),
            hp.l2.to_string(),
            "--iters".into(),
            hp.iters.to_string(),
            "--out".into(),
            path_arg(&out),
        ]);
        if let Some(t) = &a.table {
            args.extend(["--table".into(), path_arg(&absolute(t)?)]);
        }
        let mut run = RunManifest::new("eval", args, config, full.fingerprint());
        run.outputs = std::iter::once(out.clone()).chain(a.table.iter().cloned()).collect();
        run.finish(&out)?;
    }
    Ok(())
}

/// Flags win over the condensed dataset's recorded metapaths and fusion.
fn recipe_for(a: &EvalArgs, prov: Option<&Provenance>) -> Result<FeatureRecipe> {
    let flags = partial_config(None, &a.selection)?;
    let metapaths = flags
        .metapaths
        .or_else(|| prov.map(|p| p.metapaths.clone()))
        .unwrap_or_default();
    if metapaths.is_empty() && prov.is_none_or(|p| !p.use_raw_features) {
        return Err(usage(
            "no metapaths given and none recorded in the condensed dataset (pass --metapaths)",
        ));
    }
    let fusion = match flags.fusion {
        Some(f) => f,
        None => match prov {
            Some(p) => p.fusion.parse().map_err(usage)?,
            None => Default::default(),
        },
    };
    Ok(FeatureRecipe::propagated(metapaths, fusion))
}

fn recipe_args(r: &FeatureRecipe) -> Vec<String> {
    let mut a = Vec::new();
    if !r.metapaths.is_empty() {
        a.extend(["--metapaths".into(), r.metapaths.join(",")]);
    }
    a.extend(["--fusion".into(), r.fusion.to_string()]);
    a
}

fn label(r: &mut EvalReport, prov: Option<&Provenance>, seed: u64) {
    match prov {
        Some(p) => {
            r.method = p.method.clone();
            r.ratio = p.ratio;
            r.provenance = Some(p.clone());
        }
        None => r.method = "condensed".into(),
    }
    r.seed = Some(seed);
}

fn report_table(reports: &[EvalReport]) -> Result<String> {
    let mut out = format!(
        "{:<10} {:>8} {:>6} {:>9} {:>9}\n",
        "method", "ratio", "seed", "accuracy", "macro_f1"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<10} {:>8} {:>6} {:>8.2}% {:>8.2}%\n",
            r.method,
            r.ratio,
            r.seed.map_or("-".into(), |s| s.to_string()),
            100.0 * r.accuracy,
            100.0 * r.macro_f1
        ));
    }
    if reports.len() >= 2 {
        out.push('\n');
        out.push_str(&compare_runs(reports)?.to_text());
    }
    Ok(out)
}
