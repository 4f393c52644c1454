//! Free-running half-center: one limb's thigh flexor and extensor pools
//! alternate through Ca²⁺-gated K⁺ fatigue, and stop alternating without it.
//!
//! `cargo run --release --example half_center [seed]`

use astrocyte_cpg::cpg::{Cpg, CpgParams, InterLimbWeights};
use astrocyte_cpg::metrics::alternation;
use astrocyte_cpg::physics::Observation;

fn run(params: CpgParams, seed: u64, label: &str) {
    let obs = Observation::standing(&params.limits, params.hip.target);
    let mut cpg = Cpg::new(params, seed);
    let w = InterLimbWeights::zeros(-0.05, 0.05);
    let (mut flex, mut ext) = (Vec::new(), Vec::new());
    for _ in 0..5_000 {
        let out = cpg.step(&w, &obs, 1e-3);
        flex.push(out.tally.pool_spikes[0]);
        ext.push(out.tally.pool_spikes[1]);
    }
    let a = alternation(&flex, &ext, 20);
    println!("{label}: coactivation {:.3}, cycles {}, bursts {}", a.coactivation, a.cycles, a.bursts);
    // One character per 20 ms: F flexor, E extensor, * both, . silent.
    let strip: String = flex
        .chunks(20)
        .zip(ext.chunks(20))
        .take(100)
        .map(|(f, e)| match (f.iter().sum::<u32>() > 0, e.iter().sum::<u32>() > 0) {
            (true, true) => '*',
            (true, false) => 'F',
            (false, true) => 'E',
            _ => '.',
        })
        .collect();
    println!("  {strip}");
}

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    run(CpgParams::default(), seed, "with K+ channel");
    let mut ablated = CpgParams::default();
    ablated.motor.c_k_chan = 0.0;
    run(ablated, seed, "without K+ channel");
}
