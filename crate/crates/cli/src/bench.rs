//! Condensation timing: median wall-clock per method and ratio, and a
//! log-log fit of time against pool size.

use std::time::Instant;

use anyhow::Result;
use hgc_core::condense::{condense_with_cache, CondensationConfig, Method};
use hgc_core::graph::{HeteroGraph, Pool};
use hgc_core::propagation::PropagationCache;
use hgc_core::synthetic::{generate, SyntheticSpec, METAPATHS};
use serde::Serialize;

use crate::args::BenchArgs;
use crate::commands::load;
use crate::run::{absolute, write_atomic, RunManifest};
use crate::usage;

/// One line of the bench csv. The column set is fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub dataset: String,
    pub method: String,
    pub ratio: f64,
    pub pool_size: usize,
    pub repetitions: usize,
    pub median_seconds: f64,
    pub min_seconds: f64,
    /// Peak resident set of the whole process so far, in KiB.
    pub peak_rss_kb: Option<u64>,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `VmHWM` from `/proc/self/status`; `None` where that is unavailable.
pub fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Median and minimum wall-clock of `repeat` cold-cache condensations.
pub fn time_condense(g: &HeteroGraph, cfg: &CondensationConfig, repeat: usize) -> Result<(f64, f64)> {
    let mut times = Vec::with_capacity(repeat);
    for _ in 0..repeat.max(1) {
        let cache = PropagationCache::new();
        let start = Instant::now();
        let res = condense_with_cache(g, cfg, &cache)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(res);
    }
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((median(&mut times), min))
}

/// Synthetic graph whose labeled pool has exactly `pool` nodes.
pub fn scaling_graph(pool: usize, seed: u64) -> HeteroGraph {
    generate(&SyntheticSpec::acm_like(pool, seed))
}

fn default_metapaths() -> Vec<String> {
    METAPATHS.iter().map(|s| s.to_string()).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn bench_rows(
    dataset: &str,
    g: &HeteroGraph,
    methods: &[Method],
    ratios: &[f64],
    metapaths: &[String],
    pool: Pool,
    repeat: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &method in methods {
        for &ratio in ratios {
            let mut cfg = CondensationConfig::new(method, ratio, metapaths.to_vec());
            cfg.seed = Some(seed);
            cfg.pool = pool;
            let (median_seconds, min_seconds) = time_condense(g, &cfg, repeat)?;
            rows.push(BenchRow {
                dataset: dataset.to_string(),
                method: method.to_string(),
                ratio,
                pool_size: g.labels.members(pool).iter().map(Vec::len).sum(),
                repetitions: repeat,
                median_seconds,
                min_seconds,
                peak_rss_kb: peak_rss_kb(),
            });
            log::info!("{method} r={ratio}: median {median_seconds:.4}s");
        }
    }
    Ok(rows)
}

fn to_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn run(a: &BenchArgs) -> Result<()> {
    if a.repeat == 0 {
        return Err(usage("--repeat must be at least 1"));
    }
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    let mut checksum = String::new();
    if let Some(sizes) = &a.scaling {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(usage("--scaling needs at least two positive pool sizes"));
        }
        let metapaths = a.metapaths.clone().unwrap_or_else(default_metapaths);
        for &n in sizes {
            let g = scaling_graph(n, a.seed);
            rows.extend(bench_rows(
                &format!("synthetic:{n}"),
                &g,
                &a.methods,
                &a.ratios,
                &metapaths,
                Pool::Labeled,
                a.repeat,
                a.seed,
            )?);
        }
        for &m in &a.methods {
            for &r in &a.ratios {
                let pts: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|row| row.method == m.to_string() && row.ratio == r)
                    .map(|row| (row.pool_size as f64, row.median_seconds))
                    .collect();
                slopes.push((m, r, loglog_slope(&pts)));
            }
        }
    } else {
        let (name, g, metapaths) = match (&a.data, a.synthetic) {
            (Some(dir), _) => {
                let g = load(dir)?;
                let mp = a
                    .metapaths
                    .clone()
                    .ok_or_else(|| usage("--metapaths is required with --data"))?;
                (dir.display().to_string(), g, mp)
            }
            (None, n) => {
                let n = n.unwrap_or(3000);
                let mp = a.metapaths.clone().unwrap_or_else(default_metapaths);
                (format!("synthetic:{n}"), scaling_graph(n, a.seed), mp)
            }
        };
        checksum = g.fingerprint();
        rows = bench_rows(&name, &g, &a.methods, &a.ratios, &metapaths, Pool::Train, a.repeat, a.seed)?;
    }

    let csv = to_csv(&rows)?;
    print!("{csv}");
    for (m, r, s) in &slopes {
        println!("# {m} r={r}: log-log slope {s:.3}");
    }
    if let Some(out) = &a.out {
        let out = absolute(out)?;
        write_atomic(&out, csv.as_bytes())?;
        let args = std::env::args().skip(1).collect();
        let mut run = RunManifest::new("bench", args, serde_json::Value::Null, checksum);
        run.outputs = vec![out.clone()];
        run.finish(&out)?;
    }
    Ok(())
}
