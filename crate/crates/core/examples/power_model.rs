//! Operation-count power of the spiking controller against a dense policy
//! network, at the reference firing frequencies.

use astrocyte_cpg::energy::{p_policy, p_snn_cpg, FanOut, Frequencies, OpCosts, POLICY_LAYERS};

fn main() {
    let costs = OpCosts::default();
    let fan = FanOut::default();
    let f = Frequencies::REFERENCE;
    let policy = p_policy(&POLICY_LAYERS, 100.0, &costs);
    let snn = p_snn_cpg(&f, &fan, &costs);
    println!("fan-out inhibitory/calf/thigh/limit: {}/{}/{}/{}", fan.inhibitory, fan.calf, fan.thigh, fan.limit);
    println!("policy {POLICY_LAYERS:?} at 100 Hz: {policy:.6e} W");
    println!("spiking CPG: {snn:.4e} W");
    println!("ratio: {:.4}", policy / snn);

    // How the fan-out scales with pool size.
    for n in [10, 20, 40] {
        let fan = FanOut::for_pool_size(n);
        println!("pool size {n:>2}: {:.4e} W", p_snn_cpg(&f, &fan, &costs));
    }
}
