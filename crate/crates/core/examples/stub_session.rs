//! One session against the scripted backend: the torso topples after a set
//! time and the session ends once the tipped-over count reaches its limit.

use astrocyte_cpg::physics::{ScriptedBackend, StubScript};
use astrocyte_cpg::trainer::{Trainer, TrainerParams};

fn main() {
    let p = TrainerParams::default();
    let stub = ScriptedBackend::new(
        StubScript::Steady {
            vel_x: 0.8,
            omega: [0.0; 3],
            topple_after: Some(2.0),
        },
        &p.cpg.limits,
        p.cpg.hip.target,
        p.session.dt,
    );
    let mut t = Trainer::new(p, 1, stub);
    for _ in 0..3 {
        let r = t.run_session();
        println!(
            "session {}: {:.3} s ({:?}), reward {:.3}, x {:.2} m, progress {:.3}, learning from {:.2} s",
            r.index, r.length_s, r.termination, r.mean_reward, r.final_x_m, r.progress, r.learning_start_s
        );
    }
}
