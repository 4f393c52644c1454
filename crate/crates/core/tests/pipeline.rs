use std::path::Path;

use astrocyte_cpg::commands::{cmd_analyze, cmd_energy, cmd_run, cmd_train, CommandError};
use astrocyte_cpg::config::RunConfig;
use astrocyte_cpg::energy::FiringTally;
use astrocyte_cpg::error::IoError;
use astrocyte_cpg::io::{
    parse_weights_csv, to_csv, weights_csv, write_file, Checkpoint, RasterRow, RunDir, SessionRow, TallyRow,
    CHECKPOINT_VERSION,
};
use astrocyte_cpg::physics::BackendKind;

fn stub_config(out: &Path, sessions: usize) -> RunConfig {
    let mut c = RunConfig::default();
    c.run.backend = BackendKind::Stub;
    c.run.sessions = sessions;
    c.run.out = out.to_string_lossy().into_owned();
    c
}

#[test]
fn weight_table_matches_checkpoint_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = stub_config(tmp.path(), 3);
    cfg.run.checkpoint_every = 1;
    cmd_train(&cfg, None, false).unwrap();
    let dir = RunDir::new(tmp.path());
    let ck = Checkpoint::load(&dir.checkpoint(3)).unwrap();
    let table = parse_weights_csv(&std::fs::read_to_string(dir.weights()).unwrap()).unwrap();
    assert_eq!(&table, ck.state.weights.as_rows());
    assert!(ck.state.weights.trainable_values().iter().any(|&w| w != 0.0));
    for n in 1..=3 {
        assert!(dir.checkpoint(n).exists());
        assert!(dir.weight_snapshot(n).exists());
    }
    let summary = cmd_analyze(tmp.path()).unwrap();
    assert_eq!(&summary.weights, ck.state.weights.as_rows());
}

#[test]
fn energy_accountings_agree_on_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    cmd_train(&stub_config(tmp.path(), 3), None, false).unwrap();
    let r = cmd_energy(Some(tmp.path())).unwrap();
    assert_eq!(r.sessions_used, 3);
    assert!(r.p_snn > 0.0);
    assert!(((r.p_snn - r.p_snn_direct) / r.p_snn).abs() < 1e-3);
}

#[test]
fn zero_tally_run_has_zero_snn_power() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = RunDir::new(tmp.path());
    let rows: Vec<TallyRow> = (0..4)
        .map(|i| {
            TallyRow::new(
                i,
                &FiringTally {
                    elapsed_s: 2.0,
                    ..FiringTally::default()
                },
            )
        })
        .collect();
    write_file(&dir.tallies(), to_csv(&rows).as_bytes()).unwrap();
    let r = cmd_energy(Some(tmp.path())).unwrap();
    assert_eq!(r.p_snn, 0.0);
    assert_eq!(r.p_snn_direct, 0.0);
}

/// A run directory with a flat session log and a synthetic raster.
fn synthetic_run(dir: &RunDir, raster: &[RasterRow]) {
    let sessions: Vec<SessionRow> = (0..12)
        .map(|i| SessionRow {
            session: i,
            length_s: 4.0,
            mean_reward: 0.25,
            final_x_m: 1.5,
            progress: 1.0,
            learning_start_s: 2.0,
        })
        .collect();
    write_file(&dir.sessions(), to_csv(&sessions).as_bytes()).unwrap();
    let w = astrocyte_cpg::cpg::InterLimbWeights::zeros(-0.05, 0.05);
    write_file(&dir.weights(), weights_csv(&w).as_bytes()).unwrap();
    write_file(&dir.raster(), to_csv(raster).as_bytes()).unwrap();
}

#[test]
fn analyze_perfect_trot_raster_is_maximal() {
    // Diagonal limbs fire their extensors together in 200 ms half-periods.
    let mut rows = Vec::new();
    for step in 1..=4000u64 {
        let phase = ((step - 1) / 200) % 2;
        let limbs: [usize; 2] = if phase == 0 { [0, 3] } else { [1, 2] };
        for limb in limbs {
            for neuron in 0..3 {
                rows.push(RasterRow {
                    step,
                    population: limb * 4 + 1,
                    neuron,
                });
            }
            rows.push(RasterRow {
                step,
                population: limb * 4 + 1,
                neuron: 5,
            });
        }
        for limb in [0, 1, 2, 3].into_iter().filter(|l| !limbs.contains(l)) {
            rows.push(RasterRow {
                step,
                population: limb * 4,
                neuron: 0,
            });
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    let dir = RunDir::new(tmp.path());
    synthetic_run(&dir, &rows);
    let s = cmd_analyze(tmp.path()).unwrap();
    let m = s.raster.unwrap();
    assert!((m.trot_index - 3.0).abs() < 1e-9, "{}", m.trot_index);
    for a in m.alternation {
        // Only the activity hold after each switch overlaps.
        assert!(a.coactivation < 0.1, "{}", a.coactivation);
        assert!(a.cycles >= 9);
    }
}

#[test]
fn analyze_window_average_of_constant_series() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = RunDir::new(tmp.path());
    synthetic_run(&dir, &[]);
    let s = cmd_analyze(tmp.path()).unwrap();
    assert_eq!(s.sessions, 12);
    let text = std::fs::read_to_string(dir.analysis()).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(&cols[1..], &[4.0, 0.25, 1.5]);
    }
}

#[test]
fn frozen_replay_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.run.sessions = 1;
    cfg.run.seed = 2;
    cfg.run.out = tmp.path().join("train").to_string_lossy().into_owned();
    cmd_train(&cfg, None, false).unwrap();
    let ck = RunDir::new(&cfg.run.out).checkpoint(1);
    let mut outputs = Vec::new();
    for name in ["x", "y"] {
        let out = tmp.path().join(name);
        let s = cmd_run(&ck, 0.4, &out).unwrap();
        let raster = std::fs::read_to_string(out.join("raster.csv")).unwrap();
        assert_eq!(raster.lines().count() - 1, s.raster_rows);
        let events = s.record.tally.inhibitory + s.record.tally.calf + s.record.tally.thigh;
        assert_eq!(s.raster_rows as u64, events);
        assert!((s.trot_index - s.record.trot_index).abs() < 1e-12);
        outputs.push((raster, std::fs::read(out.join("trajectory.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn future_checkpoint_rejected_by_run() {
    let tmp = tempfile::tempdir().unwrap();
    cmd_train(&stub_config(tmp.path(), 1), None, false).unwrap();
    let path = RunDir::new(tmp.path()).checkpoint(1);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["version"] = (CHECKPOINT_VERSION + 1).into();
    std::fs::write(&path, v.to_string()).unwrap();
    let err = cmd_run(&path, 1.0, tmp.path()).unwrap_err();
    assert!(matches!(err, CommandError::Io(IoError::FutureCheckpoint { .. })));
    assert_eq!(err.exit_code(), 1);
}
