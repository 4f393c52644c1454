//! Full learning rule against the reward-only ablation (no astrocyte term),
//! trained side by side on the same seed.
//!
//! `cargo run --release --example ablation [sessions] [seed]`

use astrocyte_cpg::physics::{PhysicsParams, SimplifiedQuadruped};
use astrocyte_cpg::trainer::{SessionRecord, Trainer, TrainerParams};

fn train(eta_ado: f64, sessions: usize, seed: u64) -> (Vec<SessionRecord>, Vec<f64>) {
    let mut p = TrainerParams::default();
    p.plasticity.eta_ado = eta_ado;
    let plant = SimplifiedQuadruped::new(PhysicsParams::default(), p.cpg.limits.clone());
    let mut t = Trainer::new(p, seed, plant);
    t.train(sessions, |_, _| {});
    let w = t.weights.trainable_values();
    (t.history.records, w)
}

fn summary(label: &str, records: &[SessionRecord], w: &[f64]) {
    let tail = &records[records.len().saturating_sub(20)..];
    let avg = |f: fn(&SessionRecord) -> f64| tail.iter().map(f).sum::<f64>() / tail.len() as f64;
    let mean_w = w.iter().sum::<f64>() / w.len() as f64;
    let near_max = w.iter().filter(|&&v| v > 0.0475).count();
    println!(
        "{label:>10}: last-20 length {:.2} s, trot {:+.2}; mean weight {mean_w:+.4}, near max {near_max}/48",
        avg(|r| r.length_s),
        avg(|r| r.trot_index)
    );
}

fn main() {
    let mut args = std::env::args().skip(1);
    let sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let eta_ado = TrainerParams::default().plasticity.eta_ado;
    let ((full, wf), (abl, wa)) = std::thread::scope(|s| {
        let a = s.spawn(move || train(eta_ado, sessions, seed));
        let b = s.spawn(move || train(0.0, sessions, seed));
        (a.join().unwrap(), b.join().unwrap())
    });
    summary("full", &full, &wf);
    summary("no ado", &abl, &wa);
}
