//! Replay a trained checkpoint with frozen weights, then analyze the spike
//! raster and session logs.
//!
//! `cargo run --release --example raster_analysis [sessions]`

use astrocyte_cpg::commands::{cmd_analyze, cmd_run, cmd_train};
use astrocyte_cpg::config::RunConfig;
use std::collections::BTreeMap;

use astrocyte_cpg::io::{population_name, read_csv, RasterRow, RunDir};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sessions = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let out = std::env::temp_dir().join(format!("astrocyte-cpg-raster-{}", std::process::id()));
    let mut cfg = RunConfig::default();
    cfg.run.sessions = sessions;
    cfg.run.out = out.to_string_lossy().into_owned();
    cmd_train(&cfg, None, false)?;

    let dir = RunDir::new(&out);
    let run = cmd_run(&dir.checkpoint(sessions), 3.0, &out)?;
    println!(
        "replay: {:.2} s, {} spikes, trot index {:+.3}",
        run.record.length_s, run.raster_rows, run.trot_index
    );

    let rows: Vec<RasterRow> = read_csv(&dir.raster(), "raster")?;
    let mut counts = BTreeMap::new();
    for r in &rows {
        *counts.entry(r.population).or_insert(0u64) += 1;
    }
    let mut counts: Vec<_> = counts.into_iter().collect();
    counts.sort_by_key(|c| std::cmp::Reverse(c.1));
    for (id, n) in counts.iter().take(6) {
        println!("{:>24} {n}", population_name(*id));
    }

    let a = cmd_analyze(&out)?;
    if let Some(m) = a.raster {
        for (l, alt) in m.alternation.iter().enumerate() {
            println!("limb {l}: coactivation {:.3}, cycles {}", alt.coactivation, alt.cycles);
        }
    }
    std::fs::remove_dir_all(&out)?;
    Ok(())
}
