use anyhow::{Context, Result};
use hgc_core::graph::save_dataset;
use hgc_core::synthetic::{dblp_layout, generate, SyntheticSpec};

use crate::args::{Layout, SynthArgs};

pub fn run(a: &SynthArgs) -> Result<()> {
    let g = match a.layout {
        Layout::Acm => generate(&SyntheticSpec::acm_like(a.papers, a.seed)),
        Layout::Dblp => dblp_layout(8, a.seed),
    };
    save_dataset(&g, &a.out, None, a.overwrite)
        .with_context(|| format!("writing {}", a.out.display()))?;
    println!("{}", g.stats());
    Ok(())
}
