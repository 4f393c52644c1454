//! Drive a single astrocyte with a bursting spike train and watch glutamate
//! uptake, Ca²⁺ and adenosine release.

use astrocyte_cpg::astrocyte::{AstrocyteLayer, AstrocyteParams};

fn main() {
    let dt = 1e-3;
    let mut layer = AstrocyteLayer::new(AstrocyteParams::default(), 1);
    println!("t_s,ag,ip3,ca,ado,releases");
    for step in 0..20_000u32 {
        // 200 ms bursts of 3 spikes/ms every 400 ms.
        let spikes = if (step % 400) < 200 { 3 } else { 0 };
        layer.step(&[spikes], dt);
        if step % 250 == 0 {
            let c = &layer.cells[0];
            println!(
                "{:.2},{:.4},{:.4},{:.4},{:.4},{}",
                step as f64 * dt,
                c.ag,
                c.ip3,
                c.ca_cyt,
                c.ado,
                layer.releases
            );
        }
    }
}
