use anyhow::{Context, Result};
use hgc_core::graph::load_dataset_with_report;

use crate::args::StatsArgs;

pub fn run(a: &StatsArgs) -> Result<()> {
    let (g, _, report) = load_dataset_with_report(&a.data)
        .with_context(|| format!("loading dataset {}", a.data.display()))?;
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    let stats = g.stats();
    if a.json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
    } else {
        println!("{stats}");
    }
    Ok(())
}
