//! The train, run, energy and analyze commands behind the CLI.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::RunConfig;
use crate::cpg::{MuscleId, N_LIMBS, N_THIGH_POOLS};
use crate::energy::{EnergyReport, FanOut, Frequencies, OpCosts};
use crate::error::{ConfigError, IoError};
use crate::io::{
    extensor_series, from_csv, parse_weights_csv, population_counts, raster_rows, read_csv, read_file, to_csv,
    weights_csv, write_file, Checkpoint, MetricsRow, RasterRow, RunDir, SessionRow, TallyRow, TrajectoryWriter,
};
use crate::metrics::{alternation, sliding_average, trot_index, Alternation};
use crate::physics::BackendKind;
use crate::trainer::{SessionRecord, Termination, Trainer, TrainingHistory};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0} session(s) ended in a physics divergence")]
    Diverged(usize),
}

impl CommandError {
    /// 1 for usage, configuration and file problems, 2 for divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Diverged(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line settings layered over a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub sessions: Option<usize>,
    pub backend: Option<BackendKind>,
    pub out: Option<PathBuf>,
}

/// Load `path` (or the defaults), then apply `--set` pairs and flags.
pub fn resolve_config(path: Option<&Path>, o: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for s in &o.sets {
        cfg.apply_override(s)?;
    }
    if let Some(seed) = o.seed {
        cfg.run.seed = seed;
    }
    if let Some(n) = o.sessions {
        cfg.run.sessions = n;
    }
    if let Some(b) = o.backend {
        cfg.run.backend = b;
    }
    if let Some(out) = &o.out {
        cfg.run.out = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub out: PathBuf,
    pub sessions: usize,
    pub diverged: usize,
    pub energy: EnergyReport,
    pub last: Option<SessionRecord>,
}

/// Train to `cfg.run.sessions` sessions, resuming from a checkpoint if given.
/// Divergent sessions are logged like any other; they only change the exit
/// status.
pub fn cmd_train(cfg: &RunConfig, resume: Option<&Path>, progress: bool) -> Result<TrainSummary, CommandError> {
    cfg.validate()?;
    let dir = RunDir::new(&cfg.run.out);
    dir.create()?;
    write_file(&dir.config(), cfg.to_text().as_bytes())?;

    let mut trainer = Trainer::new(cfg.trainer_params(), cfg.run.seed, cfg.build_backend());
    if let Some(p) = resume {
        trainer.restore(Checkpoint::load(p)?.state);
    }
    let fan = trainer.fan;
    let start = trainer.history.len();
    let n = cfg.run.sessions;
    let every = cfg.run.checkpoint_every;
    while trainer.history.len() < n {
        let rec = trainer.run_session().clone();
        let done = rec.index + 1;
        if progress {
            eprintln!(
                "[seed {}] session {:4}  length {:6.3} s  reward {:+.4}  x {:+.3} m  trot {:+.2}",
                cfg.run.seed, rec.index, rec.length_s, rec.mean_reward, rec.final_x_m, rec.trot_index
            );
        }
        if every > 0 && done % every == 0 && done < n {
            save_snapshot(&dir, cfg, &trainer)?;
        }
    }
    save_snapshot(&dir, cfg, &trainer)?;

    let history = &trainer.history;
    let tallies: Vec<_> = history.records.iter().map(|r| r.tally).collect();
    let energy = EnergyReport::from_sessions(&tallies, &OpCosts::default(), &fan);
    write_file(&dir.energy(), energy.to_text().as_bytes())?;
    let diverged = history.records[start.min(history.len())..]
        .iter()
        .filter(|r| matches!(r.termination, Termination::Diverged(_)))
        .count();
    Ok(TrainSummary {
        out: dir.root.clone(),
        sessions: history.len(),
        diverged,
        energy,
        last: history.records.last().cloned(),
    })
}

/// Checkpoint, weight snapshot and session logs at the current session.
fn save_snapshot<B: crate::physics::PhysicsBackend>(
    dir: &RunDir,
    cfg: &RunConfig,
    trainer: &Trainer<B>,
) -> Result<(), IoError> {
    let n = trainer.history.len();
    Checkpoint::new(cfg.clone(), trainer.state()).save(&dir.checkpoint(n))?;
    let table = weights_csv(&trainer.weights);
    write_file(&dir.weight_snapshot(n), table.as_bytes())?;
    write_file(&dir.weights(), table.as_bytes())?;
    write_session_logs(dir, &trainer.history)
}

pub fn write_session_logs(dir: &RunDir, history: &TrainingHistory) -> Result<(), IoError> {
    let rows: Vec<SessionRow> = history.records.iter().map(SessionRow::from).collect();
    let metrics: Vec<MetricsRow> = history.records.iter().map(MetricsRow::from).collect();
    let tallies: Vec<TallyRow> = history.records.iter().map(|r| TallyRow::new(r.index, &r.tally)).collect();
    write_file(&dir.sessions(), to_csv(&rows).as_bytes())?;
    write_file(&dir.session_metrics(), to_csv(&metrics).as_bytes())?;
    write_file(&dir.tallies(), to_csv(&tallies).as_bytes())
}

/// Train one run per seed in parallel, each in `<out>/seed_<n>`.
pub fn cmd_train_sweep(cfg: &RunConfig, seeds: &[u64], progress: bool) -> Vec<(u64, Result<TrainSummary, CommandError>)> {
    let base = PathBuf::from(&cfg.run.out);
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut c = cfg.clone();
                c.run.seed = seed;
                c.run.out = base.join(format!("seed_{seed}")).to_string_lossy().into_owned();
                s.spawn(move || (seed, cmd_train(&c, None, progress)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub record: SessionRecord,
    pub raster_rows: usize,
    /// Trot index recomputed from the written raster.
    pub trot_index: f64,
    /// Thigh flexor/extensor alternation per limb.
    pub alternation: [Alternation; N_LIMBS],
}

/// Frozen-weight rollout of a checkpoint for `duration` seconds, writing
/// `trajectory.csv` and `raster.csv` into `out`.
pub fn cmd_run(checkpoint: &Path, duration: f64, out: &Path) -> Result<RunSummary, CommandError> {
    let ck = Checkpoint::load(checkpoint)?;
    let mut cfg = ck.config.clone();
    if !(duration > 0.0) {
        return Err(ConfigError::invalid("duration", "must be positive").into());
    }
    cfg.session.max_length = duration;
    cfg.validate()?;
    let dir = RunDir::new(out);
    std::fs::create_dir_all(out).map_err(|e| IoError::fs(out, e))?;

    let mut trainer = Trainer::new(cfg.trainer_params(), cfg.run.seed, cfg.build_backend());
    trainer.restore(ck.state);

    let dt = cfg.session.dt;
    let traj_path = dir.trajectory();
    let file = File::create(&traj_path).map_err(|e| IoError::fs(&traj_path, e))?;
    let csv_err = |p: &Path, e: csv::Error| IoError::fs(p, std::io::Error::other(e.to_string()));
    let mut traj = TrajectoryWriter::new(BufWriter::new(file)).map_err(|e| csv_err(&traj_path, e))?;
    let mut rows: Vec<RasterRow> = Vec::new();
    let mut failure: Option<csv::Error> = None;
    let record = trainer.session(false, &mut |ev| {
        rows.extend(raster_rows(ev.step, ev.cpg));
        if failure.is_none() {
            failure = traj.write(ev.step, dt, ev.obs, ev.reward).err();
        }
    });
    if let Some(e) = failure {
        return Err(csv_err(&traj_path, e).into());
    }
    traj.finish()?;
    write_file(&dir.raster(), to_csv(&rows).as_bytes())?;

    let steps = (record.length_s / dt).round() as u64;
    let smooth = ((cfg.session.trot_smoothing / dt).round() as usize).max(1);
    let summary = RunSummary {
        raster_rows: rows.len(),
        trot_index: trot_index(&extensor_series(&rows, steps), smooth),
        alternation: raster_alternation(&rows, steps),
        record,
    };
    if let Termination::Diverged(_) = summary.record.termination {
        return Err(CommandError::Diverged(1));
    }
    Ok(summary)
}

/// Steps a pool counts as active after a spike when detecting bursts.
const BURST_HOLD: usize = 20;

fn raster_alternation(rows: &[RasterRow], steps: u64) -> [Alternation; N_LIMBS] {
    std::array::from_fn(|l| {
        let f = population_counts(rows, l * 4, steps);
        let e = population_counts(rows, l * 4 + 1, steps);
        alternation(&f, &e, BURST_HOLD)
    })
}

/// Energy report from a run directory's stored tallies, or from the
/// reference firing frequencies when `run_dir` is `None`.
pub fn cmd_energy(run_dir: Option<&Path>) -> Result<EnergyReport, CommandError> {
    let costs = OpCosts::default();
    let Some(root) = run_dir else {
        return Ok(EnergyReport::from_frequencies(Frequencies::REFERENCE, &[], &costs, &FanOut::default()));
    };
    let dir = RunDir::new(root);
    let fan = match std::fs::metadata(dir.config()) {
        Ok(_) => {
            let cfg = RunConfig::load(&dir.config())?;
            FanOut::for_pool_size(cfg.cpg.wiring.pool_size as u64)
        }
        Err(_) => FanOut::default(),
    };
    let rows: Vec<TallyRow> = read_csv(&dir.tallies(), "tally log")?;
    let tallies: Vec<_> = rows.iter().map(TallyRow::tally).collect();
    Ok(EnergyReport::from_sessions(&tallies, &costs, &fan))
}

#[derive(Debug, Clone)]
pub struct AnalysisSummary {
    pub sessions: usize,
    pub weights: [[f64; N_THIGH_POOLS]; N_THIGH_POOLS],
    /// Mean trot index of the last five sessions.
    pub trot_last5: Option<f64>,
    pub raster: Option<RunRasterMetrics>,
}

#[derive(Debug, Clone)]
pub struct RunRasterMetrics {
    pub trot_index: f64,
    pub alternation: [Alternation; N_LIMBS],
}

/// Window-5 averages, weight heat data and gait metrics for a run directory.
/// Writes `analysis.csv` and `weights_heat.csv`.
pub fn cmd_analyze(run_dir: &Path) -> Result<AnalysisSummary, CommandError> {
    let dir = RunDir::new(run_dir);
    let sessions: Vec<SessionRow> = read_csv(&dir.sessions(), "session log")?;
    let col = |f: fn(&SessionRow) -> f64| sliding_average(&sessions.iter().map(f).collect::<Vec<_>>(), 5);
    let (len5, rew5, x5) = (col(|r| r.length_s), col(|r| r.mean_reward), col(|r| r.final_x_m));
    let mut out = String::from("session,length_avg5,reward_avg5,final_x_avg5\n");
    for (i, r) in sessions.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", r.session, len5[i], rew5[i], x5[i]));
    }
    write_file(&dir.analysis(), out.as_bytes())?;

    let weights = parse_weights_csv(&read_file(&dir.weights())?).map_err(|reason| IoError::Malformed {
        what: "weight table",
        path: dir.weights(),
        reason,
    })?;
    let mut heat = String::from("from,to,weight\n");
    for (x, row) in weights.iter().enumerate() {
        for (y, w) in row.iter().enumerate() {
            heat.push_str(&format!(
                "{},{},{}\n",
                MuscleId::from_thigh_index(x),
                MuscleId::from_thigh_index(y),
                w
            ));
        }
    }
    write_file(&dir.root.join("weights_heat.csv"), heat.as_bytes())?;

    let trot_last5 = if dir.session_metrics().exists() {
        let m: Vec<MetricsRow> = read_csv(&dir.session_metrics(), "session metrics")?;
        let tail = &m[m.len().saturating_sub(5)..];
        (!tail.is_empty()).then(|| tail.iter().map(|r| r.trot_index).sum::<f64>() / tail.len() as f64)
    } else {
        None
    };

    let raster = if dir.raster().exists() {
        let rows: Vec<RasterRow> = from_csv(&read_file(&dir.raster())?).map_err(|e| IoError::Malformed {
            what: "raster",
            path: dir.raster(),
            reason: e.to_string(),
        })?;
        let steps = rows.iter().map(|r| r.step).max().unwrap_or(0);
        let smooth = match std::fs::metadata(dir.config()) {
            Ok(_) => {
                let c = RunConfig::load(&dir.config())?;
                ((c.session.trot_smoothing / c.session.dt).round() as usize).max(1)
            }
            Err(_) => 50,
        };
        Some(RunRasterMetrics {
            trot_index: trot_index(&extensor_series(&rows, steps), smooth),
            alternation: raster_alternation(&rows, steps),
        })
    } else {
        None
    };

    Ok(AnalysisSummary {
        sessions: sessions.len(),
        weights,
        trot_last5,
        raster,
    })
}
