//! Run directories: checkpoints, CSV logs, weight tables, rasters and
//! trajectories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::cpg::{Cpg, InterLimbWeights, MuscleId, N_LIMBS, N_POOLS, N_THIGH_POOLS};
use crate::energy::FiringTally;
use crate::error::IoError;
use crate::physics::Observation;
use crate::trainer::{SessionRecord, Termination, TrainerState};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Number of finished sessions.
    pub session_index: usize,
    pub config: RunConfig,
    pub state: TrainerState,
}

impl Checkpoint {
    pub fn new(config: RunConfig, state: TrainerState) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            session_index: state.history.len(),
            config,
            state,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let text = serde_json::to_string(self).expect("checkpoint serializes");
        write_file(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path).map_err(|e| IoError::fs(path, e))?;
        let malformed = |reason: String| IoError::Malformed {
            what: "checkpoint",
            path: path.to_path_buf(),
            reason,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| malformed("missing version".into()))?;
        if version > CHECKPOINT_VERSION as u64 {
            return Err(IoError::FutureCheckpoint {
                found: version as u32,
                supported: CHECKPOINT_VERSION,
            });
        }
        serde_json::from_value(value).map_err(|e| malformed(e.to_string()))
    }
}

/// File layout of one run.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn create(&self) -> Result<(), IoError> {
        for d in [self.root.clone(), self.checkpoints(), self.weight_snapshots()] {
            fs::create_dir_all(&d).map_err(|e| IoError::fs(&d, e))?;
        }
        Ok(())
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("config.txt")
    }
    pub fn sessions(&self) -> PathBuf {
        self.root.join("sessions.csv")
    }
    pub fn session_metrics(&self) -> PathBuf {
        self.root.join("session_metrics.csv")
    }
    pub fn tallies(&self) -> PathBuf {
        self.root.join("tallies.csv")
    }
    pub fn weights(&self) -> PathBuf {
        self.root.join("weights.csv")
    }
    pub fn energy(&self) -> PathBuf {
        self.root.join("energy.txt")
    }
    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis.csv")
    }
    pub fn raster(&self) -> PathBuf {
        self.root.join("raster.csv")
    }
    pub fn trajectory(&self) -> PathBuf {
        self.root.join("trajectory.csv")
    }
    pub fn checkpoints(&self) -> PathBuf {
        self.root.join("checkpoints")
    }
    pub fn checkpoint(&self, session: usize) -> PathBuf {
        self.checkpoints().join(format!("session_{session:04}.json"))
    }
    pub fn weight_snapshots(&self) -> PathBuf {
        self.root.join("weights")
    }
    pub fn weight_snapshot(&self, session: usize) -> PathBuf {
        self.weight_snapshots().join(format!("session_{session:04}.csv"))
    }

    /// Most recent checkpoint by session number.
    pub fn latest_checkpoint(&self) -> Option<PathBuf> {
        let mut found: Vec<PathBuf> = fs::read_dir(self.checkpoints())
            .ok()?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        found.sort();
        found.pop()
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| IoError::fs(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| IoError::fs(path, e))
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::fs(path, e))
}

/// One row of `sessions.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRow {
    pub session: usize,
    pub length_s: f64,
    pub mean_reward: f64,
    pub final_x_m: f64,
    pub progress: f64,
    pub learning_start_s: f64,
}

impl From<&SessionRecord> for SessionRow {
    fn from(r: &SessionRecord) -> Self {
        Self {
            session: r.index,
            length_s: r.length_s,
            mean_reward: r.mean_reward,
            final_x_m: r.final_x_m,
            progress: r.progress,
            learning_start_s: r.learning_start_s,
        }
    }
}

/// One row of `session_metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub session: usize,
    pub termination: String,
    pub trot_index: f64,
    pub mean_speed: f64,
    pub ado_releases: u64,
    pub dw_reward: f64,
    pub dw_astrocyte: f64,
}

impl From<&SessionRecord> for MetricsRow {
    fn from(r: &SessionRecord) -> Self {
        Self {
            session: r.index,
            termination: match r.termination {
                Termination::MaxLength => "max_length",
                Termination::Fell => "fell",
                Termination::Diverged(_) => "diverged",
            }
            .into(),
            trot_index: r.trot_index,
            mean_speed: r.mean_speed(),
            ado_releases: r.ado_releases,
            dw_reward: r.dw_reward,
            dw_astrocyte: r.dw_astrocyte,
        }
    }
}

/// One row of `tallies.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyRow {
    pub session: usize,
    pub elapsed_s: f64,
    pub inhibitory: u64,
    pub calf: u64,
    pub thigh: u64,
    pub limit: u64,
    pub adds: u64,
}

impl TallyRow {
    pub fn new(session: usize, t: &FiringTally) -> Self {
        Self {
            session,
            elapsed_s: t.elapsed_s,
            inhibitory: t.inhibitory,
            calf: t.calf,
            thigh: t.thigh,
            limit: t.limit,
            adds: t.adds,
        }
    }

    pub fn tally(&self) -> FiringTally {
        FiringTally {
            inhibitory: self.inhibitory,
            calf: self.calf,
            thigh: self.thigh,
            limit: self.limit,
            elapsed_s: self.elapsed_s,
            adds: self.adds,
        }
    }
}

/// Serialize rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, what: &'static str) -> Result<Vec<T>, IoError> {
    from_csv(&read_file(path)?).map_err(|e| IoError::Malformed {
        what,
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// 9×9 table: muscle ids label the first row and column, source pools down
/// the side and target pools across the top.
pub fn weights_csv(w: &InterLimbWeights) -> String {
    let names: Vec<String> = (0..N_THIGH_POOLS).map(|x| MuscleId::from_thigh_index(x).to_string()).collect();
    let mut wr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["from\\to".to_string()];
    header.extend(names.iter().cloned());
    wr.write_record(&header).expect("in-memory csv write");
    for (x, row) in w.as_rows().iter().enumerate() {
        let mut rec = vec![names[x].clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        wr.write_record(&rec).expect("in-memory csv write");
    }
    String::from_utf8(wr.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

/// Parse a table written by [`weights_csv`].
pub fn parse_weights_csv(text: &str) -> Result<[[f64; N_THIGH_POOLS]; N_THIGH_POOLS], String> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut out = [[0.0; N_THIGH_POOLS]; N_THIGH_POOLS];
    let mut n = 0;
    for (x, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if x >= N_THIGH_POOLS || rec.len() != N_THIGH_POOLS + 1 {
            return Err(format!("expected a {0}x{0} table", N_THIGH_POOLS + 1));
        }
        for y in 0..N_THIGH_POOLS {
            out[x][y] = rec[y + 1].parse().map_err(|e| format!("row {x}: {e}"))?;
        }
        n += 1;
    }
    if n != N_THIGH_POOLS {
        return Err(format!("expected {N_THIGH_POOLS} rows, found {n}"));
    }
    Ok(out)
}

/// Raster population ids: motor pools use their pool index, V1/V2b cells
/// `16 + limb·4 + k` and IINs `32 + limb·2 + k`.
pub const V1V2B_BASE: usize = 16;
pub const IIN_BASE: usize = 32;

pub fn population_name(id: usize) -> String {
    if id < N_POOLS {
        MuscleId::from_pool_index(id).to_string()
    } else if id < IIN_BASE {
        let k = id - V1V2B_BASE;
        format!("{}-v1v2b-{}", crate::cpg::Limb::from_index(k / 4).abbrev(), k % 4)
    } else {
        let k = id - IIN_BASE;
        format!("{}-iin-{}", crate::cpg::Limb::from_index(k / 2).abbrev(), k % 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterRow {
    pub step: u64,
    pub population: usize,
    pub neuron: usize,
}

/// Spikes emitted by the network in its most recent step.
pub fn raster_rows(step: u64, cpg: &Cpg) -> Vec<RasterRow> {
    let mut rows = Vec::new();
    for (limb, unit) in cpg.units.iter().enumerate() {
        for (k, pool) in unit.pools.iter().enumerate() {
            for (i, _) in pool.spiked_last_step.iter().enumerate().filter(|(_, &s)| s) {
                rows.push(RasterRow {
                    step,
                    population: limb * 4 + k,
                    neuron: i,
                });
            }
        }
    }
    for (limb, unit) in cpg.units.iter().enumerate() {
        for (k, _) in unit.v1v2b.iter().enumerate().filter(|(_, c)| c.spiked_last_step) {
            rows.push(RasterRow {
                step,
                population: V1V2B_BASE + limb * 4 + k,
                neuron: 0,
            });
        }
        for (k, _) in unit.iin.iter().enumerate().filter(|(_, c)| c.spiked_last_step) {
            rows.push(RasterRow {
                step,
                population: IIN_BASE + limb * 2 + k,
                neuron: 0,
            });
        }
    }
    rows
}

/// Per-step thigh-extensor counts `[FR, FL, RR, RL]` rebuilt from a raster
/// covering steps `1..=n_steps`.
pub fn extensor_series(rows: &[RasterRow], n_steps: u64) -> Vec<[u32; N_LIMBS]> {
    let mut series = vec![[0u32; N_LIMBS]; n_steps as usize];
    for r in rows {
        if r.population < N_POOLS && r.population % 4 == 1 && r.step >= 1 && r.step <= n_steps {
            series[(r.step - 1) as usize][r.population / 4] += 1;
        }
    }
    series
}

/// Per-step spike counts of one population.
pub fn population_counts(rows: &[RasterRow], population: usize, n_steps: u64) -> Vec<u32> {
    let mut out = vec![0u32; n_steps as usize];
    for r in rows.iter().filter(|r| r.population == population && r.step >= 1 && r.step <= n_steps) {
        out[(r.step - 1) as usize] += 1;
    }
    out
}

/// Streams `trajectory.csv`.
pub struct TrajectoryWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(w: W) -> Result<Self, csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = ["step", "t", "x", "y", "z", "vx", "vy", "vz", "wx", "wy", "wz", "up_z", "reward"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((0..N_LIMBS).map(|l| format!("contact_{}", crate::cpg::Limb::from_index(l).abbrev())));
        header.extend((0..12).map(|j| format!("q{j}")));
        out.write_record(&header)?;
        Ok(Self { out })
    }

    pub fn write(&mut self, step: u64, dt: f64, obs: &Observation, reward: f64) -> Result<(), csv::Error> {
        let mut rec: Vec<String> = vec![step.to_string(), (step as f64 * dt).to_string()];
        let nums = obs
            .torso_pos
            .iter()
            .chain(&obs.torso_vel)
            .chain(&obs.torso_omega)
            .chain(std::iter::once(&obs.torso_z_axis_world[2]))
            .chain(std::iter::once(&reward));
        rec.extend(nums.map(|v| v.to_string()));
        rec.extend(obs.foot_contact.iter().map(|&c| (c as u8).to_string()));
        rec.extend(obs.joint_pos.iter().map(|v| v.to_string()));
        self.out.write_record(&rec)
    }

    pub fn finish(mut self) -> Result<W, IoError> {
        self.out.flush().map_err(|e| IoError::fs("trajectory", e))?;
        self.out
            .into_inner()
            .map_err(|e| IoError::fs("trajectory", std::io::Error::other(e.to_string())))
    }
}
