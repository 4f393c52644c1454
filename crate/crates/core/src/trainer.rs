//! Session-based training.
//!
//! Each session resets the plant, the neurons, the torque traces, the hip
//! controller and the reward window. Inter-limb weights, astrocyte state and
//! the noise streams carry over. A session ends at the maximum length or once
//! the torso has spent the non-alive threshold tipped over (cumulatively).

use serde::{Deserialize, Serialize};

use crate::astrocyte::{AstrocyteLayer, AstrocyteParams};
use crate::cpg::{Cpg, CpgOutput, CpgParams, InterLimbWeights, N_LIMBS, N_THIGH_POOLS};
use crate::energy::{FanOut, FiringTally};
use crate::error::ConfigError;
use crate::metrics::trot_index;
use crate::physics::{alive_indicator, Observation, PhysicsBackend};
use crate::plasticity::{apply_weight_update, reward, PlasticityParams, RewardWindow, StdpState};
use crate::rng::RngStream;
use crate::snn::sigmoid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Maximum session length (s).
    pub max_length: f64,
    /// Cumulative tipped-over time that ends a session (s).
    pub non_alive_threshold: f64,
    pub alive_z_threshold: f64,
    pub dt: f64,
    /// Moving-average window of the trot index (s).
    pub trot_smoothing: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            max_length: 10.0,
            non_alive_threshold: 0.5,
            alive_z_threshold: 0.5,
            dt: 1e-3,
            trot_smoothing: 0.05,
        }
    }
}

impl SessionConfig {
    pub fn max_steps(&self) -> u64 {
        (self.max_length / self.dt).round() as u64
    }

    pub fn non_alive_steps(&self) -> u64 {
        (self.non_alive_threshold / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0) {
            return Err(ConfigError::invalid("session.dt", "must be positive"));
        }
        if !(self.max_length >= self.dt) {
            return Err(ConfigError::invalid("session.max_length", "must cover at least one step"));
        }
        if !(self.non_alive_threshold > 0.0) {
            return Err(ConfigError::invalid("session.non_alive_threshold", "must be positive"));
        }
        Ok(())
    }
}

/// Every parameter the training loop needs apart from the plant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainerParams {
    pub cpg: CpgParams,
    pub astrocyte: AstrocyteParams,
    pub plasticity: PlasticityParams,
    pub session: SessionConfig,
}

impl TrainerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let dt = self.session.dt;
        self.session.validate()?;
        self.cpg.validate(dt)?;
        self.astrocyte.validate(dt)?;
        self.plasticity.validate(dt)
    }
}

/// `σ(−(avg/L_max − 0.9)/0.02)`.
pub fn training_progress(avg_length: f64, max_length: f64) -> f64 {
    sigmoid(-(avg_length / max_length - 0.9) / 0.02)
}

/// `clip(avg − 1, 0, 2)` seconds.
pub fn learning_start(avg_length: f64) -> f64 {
    (avg_length - 1.0).clamp(0.0, 2.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxLength,
    Fell,
    Diverged(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub index: usize,
    pub length_s: f64,
    pub mean_reward: f64,
    pub final_x_m: f64,
    pub progress: f64,
    pub learning_start_s: f64,
    pub termination: Termination,
    pub trot_index: f64,
    pub tally: FiringTally,
    pub ado_releases: u64,
    /// Summed reward-driven and astrocyte-driven weight changes.
    pub dw_reward: f64,
    pub dw_astrocyte: f64,
    pub weights: InterLimbWeights,
}

impl SessionRecord {
    pub fn mean_speed(&self) -> f64 {
        if self.length_s > 0.0 {
            self.final_x_m / self.length_s
        } else {
            0.0
        }
    }
}

/// Append-only log of finished sessions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub records: Vec<SessionRecord>,
}

impl TrainingHistory {
    /// Mean length of the previous (up to) 10 sessions; `None` before the first.
    pub fn avg_last10(&self) -> Option<f64> {
        let n = self.records.len();
        if n == 0 {
            return None;
        }
        let last = &self.records[n.saturating_sub(10)..];
        Some(last.iter().map(|r| r.length_s).sum::<f64>() / last.len() as f64)
    }

    pub fn progress(&self, max_length: f64) -> f64 {
        self.avg_last10().map_or(1.0, |a| training_progress(a, max_length))
    }

    pub fn learning_start(&self) -> f64 {
        self.avg_last10().map_or(0.0, learning_start)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// What the trainer exposes to an observer after every control step.
pub struct StepEvent<'a> {
    pub step: u64,
    pub obs: &'a Observation,
    pub cpg: &'a Cpg,
    pub output: &'a CpgOutput,
    pub astrocytes: &'a AstrocyteLayer,
    pub reward: f64,
}

/// Learnable and stochastic state that crosses session boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerState {
    pub weights: InterLimbWeights,
    pub astrocytes: AstrocyteLayer,
    pub history: TrainingHistory,
    pub pool_rngs: Vec<RngStream>,
    pub inter_rngs: Vec<RngStream>,
}

pub struct Trainer<B: PhysicsBackend> {
    pub params: TrainerParams,
    pub seed: u64,
    pub cpg: Cpg,
    pub weights: InterLimbWeights,
    pub astrocytes: AstrocyteLayer,
    pub history: TrainingHistory,
    pub backend: B,
    pub fan: FanOut,
    stdp: StdpState,
    window: RewardWindow,
}

impl<B: PhysicsBackend> Trainer<B> {
    pub fn new(params: TrainerParams, seed: u64, backend: B) -> Self {
        let cpg = Cpg::new(params.cpg.clone(), seed);
        let weights = InterLimbWeights::zeros(params.plasticity.w_min, params.plasticity.w_max);
        let astrocytes = AstrocyteLayer::new(params.astrocyte.clone(), N_THIGH_POOLS);
        let window = RewardWindow::new(
            params.plasticity.window_len(params.session.dt),
            params.plasticity.c_average,
        );
        let fan = FanOut::for_pool_size(params.cpg.wiring.pool_size as u64);
        Self {
            params,
            seed,
            cpg,
            weights,
            astrocytes,
            history: TrainingHistory::default(),
            backend,
            fan,
            stdp: StdpState::default(),
            window,
        }
    }

    pub fn state(&self) -> TrainerState {
        let (pool_rngs, inter_rngs) = self.cpg.rng_states();
        TrainerState {
            weights: self.weights.clone(),
            astrocytes: self.astrocytes.clone(),
            history: self.history.clone(),
            pool_rngs,
            inter_rngs,
        }
    }

    pub fn restore(&mut self, state: TrainerState) {
        self.weights = state.weights;
        self.astrocytes = state.astrocytes;
        self.history = state.history;
        self.cpg.restore_rng_states(state.pool_rngs, state.inter_rngs);
    }

    /// One learning session appended to the history.
    pub fn run_session(&mut self) -> &SessionRecord {
        let rec = self.session(true, &mut |_| {});
        self.history.records.push(rec);
        self.history.records.last().expect("just pushed")
    }

    /// Run sessions until the history holds `n_sessions`, calling `after` with
    /// each finished session.
    pub fn train(&mut self, n_sessions: usize, mut after: impl FnMut(&Self, &SessionRecord)) {
        while self.history.len() < n_sessions {
            let rec = self.session(true, &mut |_| {});
            self.history.records.push(rec.clone());
            after(self, &rec);
        }
    }

    /// Run one session. With `learn` false the weights are frozen and the
    /// record is not added to the history.
    pub fn session(&mut self, learn: bool, observer: &mut dyn FnMut(&StepEvent)) -> SessionRecord {
        let sc = self.params.session.clone();
        let dt = sc.dt;
        let (progress, start) = if learn {
            (self.history.progress(sc.max_length), self.history.learning_start())
        } else {
            (0.0, f64::INFINITY)
        };

        self.cpg.reset();
        self.stdp.reset();
        self.window.clear();
        let mut obs = self.backend.reset();
        let releases_before = self.astrocytes.releases;

        let max_steps = sc.max_steps();
        let non_alive_limit = sc.non_alive_steps();
        let mut non_alive = 0u64;
        let mut reward_sum = 0.0;
        let mut tally = FiringTally::default();
        let mut extensors: Vec<[u32; N_LIMBS]> = Vec::with_capacity(max_steps as usize);
        let mut dw_reward = 0.0;
        let mut dw_astrocyte = 0.0;
        let mut termination = Termination::MaxLength;
        let mut steps = 0u64;

        while steps < max_steps {
            let t = steps as f64 * dt;
            let out = self.cpg.step(&self.weights, &obs, dt);
            let thigh = out.tally.thigh_counts();
            self.astrocytes.step(&thigh, dt);
            self.stdp.update(&thigh, &self.params.plasticity, dt);
            tally.record_step(&out.tally, &self.fan, dt);
            extensors.push(std::array::from_fn(|l| out.tally.pool_spikes[l * 4 + 1]));
            steps += 1;

            obs = match self.backend.step(&out.torques) {
                Ok(o) => o,
                Err(e) => {
                    termination = Termination::Diverged(e.to_string());
                    break;
                }
            };
            let r = reward(&obs, &self.params.plasticity.reward);
            reward_sum += r;
            let r_eff = self.window.effective_reward(r);
            if learn && t >= start {
                let ado = self.astrocytes.ado_levels();
                let parts = apply_weight_update(
                    &mut self.weights,
                    &self.stdp,
                    r_eff,
                    progress,
                    &ado,
                    &self.params.plasticity,
                );
                dw_reward += parts.reward;
                dw_astrocyte += parts.astrocyte;
            }
            observer(&StepEvent {
                step: steps,
                obs: &obs,
                cpg: &self.cpg,
                output: &out,
                astrocytes: &self.astrocytes,
                reward: r,
            });
            if !alive_indicator(&obs, sc.alive_z_threshold) {
                non_alive += 1;
                if non_alive >= non_alive_limit {
                    termination = Termination::Fell;
                    break;
                }
            }
        }

        let smooth = ((sc.trot_smoothing / dt).round() as usize).max(1);
        SessionRecord {
            index: self.history.len(),
            length_s: steps as f64 * dt,
            mean_reward: if steps > 0 { reward_sum / steps as f64 } else { 0.0 },
            final_x_m: obs.torso_pos[0],
            progress,
            learning_start_s: if learn { start } else { 0.0 },
            termination,
            trot_index: trot_index(&extensors, smooth),
            tally,
            ado_releases: self.astrocytes.releases - releases_before,
            dw_reward,
            dw_astrocyte,
            weights: self.weights.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{ScriptedBackend, StubScript};

    fn stub(topple_after: Option<f64>) -> ScriptedBackend {
        ScriptedBackend::new(
            StubScript::Steady {
                vel_x: 1.0,
                omega: [0.0; 3],
                topple_after,
            },
            &crate::cpg::JointLimits::default(),
            0.1,
            1e-3,
        )
    }

    #[test]
    fn progress_schedule() {
        assert!((training_progress(10.0, 10.0) - 0.006_692_850_924_284_856).abs() < 1e-15);
        assert_eq!(training_progress(9.0, 10.0), 0.5);
        assert!(training_progress(2.0, 10.0) > 1.0 - 1e-15);
    }

    #[test]
    fn learning_start_clip() {
        assert_eq!(learning_start(0.5), 0.0);
        assert_eq!(learning_start(2.5), 1.5);
        assert_eq!(learning_start(10.0), 2.0);
    }

    #[test]
    fn history_uses_available_sessions() {
        let mut h = TrainingHistory::default();
        assert_eq!(h.progress(10.0), 1.0);
        assert_eq!(h.learning_start(), 0.0);
        let mut t = Trainer::new(TrainerParams::default(), 1, stub(Some(0.0)));
        let r = t.session(true, &mut |_| {});
        for len in [2.0, 4.0] {
            h.records.push(SessionRecord {
                length_s: len,
                ..r.clone()
            });
        }
        assert_eq!(h.avg_last10(), Some(3.0));
        for _ in 0..10 {
            h.records.push(SessionRecord {
                length_s: 9.0,
                ..r.clone()
            });
        }
        assert_eq!(h.avg_last10(), Some(9.0));
    }

    #[test]
    fn stub_never_toppling_runs_full_length() {
        let mut t = Trainer::new(TrainerParams::default(), 3, stub(None));
        let r = t.run_session();
        assert_eq!(r.length_s, 10.0);
        assert_eq!(r.termination, Termination::MaxLength);
        assert!((r.mean_reward - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stub_topple_ends_half_second_later() {
        let mut t = Trainer::new(TrainerParams::default(), 3, stub(Some(3.0)));
        let r = t.run_session();
        assert!((r.length_s - 3.5).abs() < 1e-9);
        assert_eq!(r.termination, Termination::Fell);
    }

    #[test]
    fn astrocytes_carry_across_sessions() {
        let mut t = Trainer::new(TrainerParams::default(), 5, stub(Some(1.0)));
        t.run_session();
        let end = t.astrocytes.clone();
        let mut checked = false;
        t.session(true, &mut |e| {
            if e.step == 1 {
                // The first step of the next session starts from the stored state.
                let mut expected = end.clone();
                expected.step(&e.output.tally.thigh_counts(), 1e-3);
                let bits = |l: &AstrocyteLayer| l.cells.iter().map(|c| c.ca_cyt.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&expected), bits(e.astrocytes));
                assert_eq!(&expected, e.astrocytes);
                checked = true;
            }
        });
        assert!(checked);
    }

    #[test]
    fn disabled_learning_keeps_zero_weights() {
        let mut p = TrainerParams::default();
        p.plasticity.eta = 0.0;
        p.plasticity.eta_ado = 0.0;
        let mut t = Trainer::new(p, 9, stub(Some(0.5)));
        t.train(3, |_, _| {});
        assert!(t.weights.trainable_values().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn frozen_session_leaves_history_and_weights() {
        let mut t = Trainer::new(TrainerParams::default(), 2, stub(Some(0.5)));
        t.run_session();
        let w = t.weights.clone();
        let r = t.session(false, &mut |_| {});
        assert_eq!(t.history.len(), 1);
        assert_eq!(t.weights, w);
        assert_eq!(r.dw_reward, 0.0);
    }

    #[test]
    fn resume_from_state_is_bit_identical() {
        let mut a = Trainer::new(TrainerParams::default(), 11, stub(Some(0.3)));
        a.train(2, |_, _| {});
        let snap = serde_json::to_string(&a.state()).unwrap();
        a.train(4, |_, _| {});

        let mut b = Trainer::new(TrainerParams::default(), 11, stub(Some(0.3)));
        b.restore(serde_json::from_str(&snap).unwrap());
        b.train(4, |_, _| {});
        assert_eq!(a.history, b.history);
        assert_eq!(a.astrocytes, b.astrocytes);
    }
}
