//! Drop the simplified quadruped under the untrained controller and print
//! torso height, heading speed and foot contacts over one second.

use astrocyte_cpg::cpg::{Cpg, CpgParams, InterLimbWeights};
use astrocyte_cpg::physics::{PhysicsBackend, PhysicsParams, SimplifiedQuadruped};

fn main() {
    let params = CpgParams::default();
    let mut plant = SimplifiedQuadruped::new(PhysicsParams::default(), params.limits.clone());
    let mut cpg = Cpg::new(params, 0);
    let w = InterLimbWeights::zeros(-0.05, 0.05);
    let mut obs = plant.reset();
    println!("t_s,z_m,vx_mps,up_z,contacts");
    for step in 0..1000 {
        let out = cpg.step(&w, &obs, 1e-3);
        obs = plant.step(&out.torques).expect("stable integration");
        if step % 50 == 0 {
            let contacts: String = obs.foot_contact.iter().map(|&c| if c { '1' } else { '0' }).collect();
            println!(
                "{:.3},{:.3},{:+.3},{:.3},{contacts}",
                (step + 1) as f64 * 1e-3,
                obs.torso_pos[2],
                obs.torso_vel[0],
                obs.torso_z_axis_world[2]
            );
        }
    }
    println!("mechanical energy {:.3} J", plant.mechanical_energy());
}
