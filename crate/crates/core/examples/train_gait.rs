//! Train the inter-limb weights on the simplified plant and print the
//! session log and final weight table.
//!
//! `cargo run --release --example train_gait [sessions] [seed]`

use astrocyte_cpg::cpg::MuscleId;
use astrocyte_cpg::physics::{PhysicsParams, SimplifiedQuadruped};
use astrocyte_cpg::trainer::{Trainer, TrainerParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(30);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let p = TrainerParams::default();
    let plant = SimplifiedQuadruped::new(PhysicsParams::default(), p.cpg.limits.clone());
    let mut t = Trainer::new(p, seed, plant);
    t.train(sessions, |_, r| {
        println!(
            "{:4} len {:6.3} s  reward {:+.3}  speed {:+.3} m/s  trot {:+.2}  releases {}",
            r.index,
            r.length_s,
            r.mean_reward,
            r.mean_speed(),
            r.trot_index,
            r.ado_releases
        );
    });
    println!();
    for (x, row) in t.weights.as_rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|w| format!("{w:+.4}")).collect();
        println!("{:>16} {}", MuscleId::from_thigh_index(x).to_string(), cells.join(" "));
    }
}
