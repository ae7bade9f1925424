use anyhow::Result;
use hgc_core::evaluate::{compare_runs, read_results_csv};

use crate::args::CompareArgs;
use crate::run::write_atomic;

pub fn run(a: &CompareArgs) -> Result<()> {
    let mut reports = Vec::new();
    for p in &a.results {
        reports.extend(read_results_csv(p)?.into_iter().map(|r| r.into_report()));
    }
    let table = compare_runs(&reports)?;
    print!("{}", table.to_text());
    if let Some(out) = &a.out {
        write_atomic(out, table.to_csv().as_bytes())?;
    }
    Ok(())
}
