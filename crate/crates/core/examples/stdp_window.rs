//! Pairwise STDP signal between two thigh pools as a function of the spike
//! time difference.

use astrocyte_cpg::cpg::N_THIGH_POOLS;
use astrocyte_cpg::plasticity::{PlasticityParams, StdpState};

fn main() {
    let p = PlasticityParams::default();
    let dt = 1e-3;
    println!("lag_ms,stdp_0_to_1");
    for lag in (-40i32..=40).step_by(5) {
        let mut s = StdpState::default();
        let (t0, t1) = (50, 50 + lag);
        for t in 0..150 {
            let mut c = [0u32; N_THIGH_POOLS];
            c[0] = u32::from(t == t0);
            c[1] = u32::from(t == t1);
            s.update(&c, &p, dt);
        }
        // Read shortly after the later spike so decay barely matters.
        println!("{lag},{:.4}", s.stdp[0][1]);
    }
}
