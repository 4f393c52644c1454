//! Reward-modulated STDP with astrocytic depression for the inter-limb table.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::cpg::{InterLimbWeights, N_THIGH_POOLS};
use crate::error::ConfigError;
use crate::physics::Observation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardCoefficients {
    pub vel_x: f64,
    /// Angular-velocity coefficients as tabulated (negative); only their
    /// magnitude enters the reward, always as a penalty.
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Default for RewardCoefficients {
    fn default() -> Self {
        Self {
            vel_x: 1.0,
            roll: -0.1,
            pitch: -0.1,
            yaw: -0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlasticityParams {
    pub reward: RewardCoefficients,
    pub w_min: f64,
    pub w_max: f64,
    pub tau_trace: f64,
    pub tau_stdp: f64,
    pub eta_negative_relative: f64,
    pub eta: f64,
    pub eta_ado: f64,
    pub c_average: f64,
    /// Length of the reward averaging window (s).
    pub reward_window: f64,
}

impl Default for PlasticityParams {
    fn default() -> Self {
        Self {
            reward: RewardCoefficients::default(),
            w_min: -0.05,
            w_max: 0.05,
            tau_trace: 0.01,
            tau_stdp: 2.0,
            eta_negative_relative: 0.3,
            eta: 5e-10,
            eta_ado: 1.8e-5,
            c_average: 0.5,
            reward_window: 0.1,
        }
    }
}

impl PlasticityParams {
    pub fn validate(&self, dt: f64) -> Result<(), ConfigError> {
        if !(self.w_min < self.w_max) {
            return Err(ConfigError::invalid("plasticity.w_min", "must be below w_max"));
        }
        if !(self.tau_trace > dt && self.tau_stdp > dt) {
            return Err(ConfigError::invalid("plasticity.tau_trace", "time constants must exceed dt"));
        }
        if self.eta < 0.0 || self.eta_ado < 0.0 {
            return Err(ConfigError::invalid("plasticity.eta", "learning rates must be >= 0"));
        }
        if !(self.reward_window >= dt) {
            return Err(ConfigError::invalid("plasticity.reward_window", "must cover at least one step"));
        }
        Ok(())
    }

    pub fn window_len(&self, dt: f64) -> usize {
        (self.reward_window / dt).round() as usize
    }
}

/// Forward speed minus the magnitude-weighted torso angular rates.
pub fn reward(obs: &Observation, c: &RewardCoefficients) -> f64 {
    let [roll, pitch, yaw] = obs.torso_omega;
    c.vel_x * obs.torso_vel[0] - c.roll.abs() * roll.abs() - c.pitch.abs() * pitch.abs() - c.yaw.abs() * yaw.abs()
}

/// Sliding window of recent rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardWindow {
    buf: VecDeque<f64>,
    capacity: usize,
    c_average: f64,
}

impl RewardWindow {
    pub fn new(capacity: usize, c_average: f64) -> Self {
        assert!(capacity > 0);
        Self {
            buf: VecDeque::with_capacity(capacity),
            capacity,
            c_average,
        }
    }

    /// Mean of the buffered rewards; 0 when empty.
    pub fn mean(&self) -> f64 {
        if self.buf.is_empty() {
            0.0
        } else {
            self.buf.iter().sum::<f64>() / self.buf.len() as f64
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn clear(&mut self) {
        self.buf.clear();
    }

    /// `r - c_average · mean(window)`, then push `r`.
    pub fn effective_reward(&mut self, r: f64) -> f64 {
        let eff = r - self.c_average * self.mean();
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(r);
        eff
    }
}

/// Spike traces and pairwise STDP signals of the eight thigh pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdpState {
    pub u: [f64; N_THIGH_POOLS],
    /// `stdp[x][y]`: signal for the synapse from pool `x` to pool `y`.
    pub stdp: [[f64; N_THIGH_POOLS]; N_THIGH_POOLS],
}

impl Default for StdpState {
    fn default() -> Self {
        Self {
            u: [0.0; N_THIGH_POOLS],
            stdp: [[0.0; N_THIGH_POOLS]; N_THIGH_POOLS],
        }
    }
}

impl StdpState {
    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Decay and update signals using the traces from before this step's
    /// spikes, then advance the traces.
    pub fn update(&mut self, counts: &[u32; N_THIGH_POOLS], params: &PlasticityParams, dt: f64) {
        let decay = 1.0 - dt / params.tau_stdp;
        let neg = params.eta_negative_relative;
        for x in 0..N_THIGH_POOLS {
            let cx = counts[x] as f64;
            for y in 0..N_THIGH_POOLS {
                let cy = counts[y] as f64;
                self.stdp[x][y] = self.stdp[x][y] * decay + cy * self.u[x] - neg * cx * self.u[y];
            }
        }
        let tdecay = 1.0 - dt / params.tau_trace;
        for (u, &c) in self.u.iter_mut().zip(counts) {
            *u = *u * tdecay + c as f64;
        }
    }
}

/// Weight constraint factor, vanishing at both bounds and 1/4 at the midpoint.
#[inline]
pub fn weight_constraint(w: f64, w_min: f64, w_max: f64) -> f64 {
    (w_max - w) * (w - w_min) / ((w_max - w_min) * (w_max - w_min))
}

/// Reward-driven and astrocyte-driven parts of one update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateParts {
    pub reward: f64,
    pub astrocyte: f64,
}

/// Per-synapse update split into reward and astrocyte contributions.
pub fn weight_delta(
    w: f64,
    stdp_xy: f64,
    r_eff: f64,
    progress: f64,
    ado_y: f64,
    params: &PlasticityParams,
) -> UpdateParts {
    let zeta = weight_constraint(w, params.w_min, params.w_max);
    UpdateParts {
        reward: params.eta * progress * r_eff * stdp_xy * zeta,
        astrocyte: -params.eta_ado * progress * ado_y * zeta,
    }
}

/// Apply one step of learning to every trainable synapse. Returns the summed
/// reward and astrocyte contributions for telemetry.
pub fn apply_weight_update(
    weights: &mut InterLimbWeights,
    stdp: &StdpState,
    r_eff: f64,
    progress: f64,
    ado: &[f64],
    params: &PlasticityParams,
) -> UpdateParts {
    debug_assert_eq!(ado.len(), N_THIGH_POOLS);
    let mut total = UpdateParts::default();
    if progress == 0.0 {
        return total;
    }
    for (x, y) in InterLimbWeights::trainable_pairs() {
        let w = weights.get(x, y);
        let d = weight_delta(w, stdp.stdp[x][y], r_eff, progress, ado[y], params);
        weights.set(x, y, w + d.reward + d.astrocyte);
        total.reward += d.reward;
        total.astrocyte += d.astrocyte;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(vel_x: f64, omega: [f64; 3]) -> Observation {
        Observation {
            torso_vel: [vel_x, 0.0, 0.0],
            torso_omega: omega,
            ..Observation::default()
        }
    }

    #[test]
    fn reward_values() {
        let c = RewardCoefficients::default();
        assert_eq!(reward(&obs(0.0, [0.0; 3]), &c), 0.0);
        assert_eq!(reward(&obs(1.17, [0.0; 3]), &c), 1.17);
        assert!((reward(&obs(1.0, [2.0, 0.0, 0.0]), &c) - 0.8).abs() < 1e-12);
        assert!((reward(&obs(1.0, [-2.0, 0.0, 0.0]), &c) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn effective_reward_window() {
        let mut w = RewardWindow::new(100, 0.5);
        assert_eq!(w.effective_reward(1.0), 1.0);
        for _ in 0..200 {
            w.effective_reward(1.0);
        }
        assert_eq!(w.effective_reward(1.0), 0.5);
        assert_eq!(w.len(), 100);

        let mut w = RewardWindow::new(10, 1.0);
        w.effective_reward(2.0);
        w.effective_reward(4.0);
        assert_eq!(w.effective_reward(3.0), 0.0);
    }

    #[test]
    fn no_spikes_no_signal() {
        let p = PlasticityParams::default();
        let mut s = StdpState::default();
        for _ in 0..100 {
            s.update(&[0; 8], &p, 1e-3);
        }
        assert_eq!(s, StdpState::default());
    }

    #[test]
    fn pre_before_post_potentiates() {
        // Hand computation: x fires at step 0, y at step 5. At y's spike the
        // pre-increment trace is u_x = (1 - 0.1)^4 = 0.6561.
        let p = PlasticityParams::default();
        let (x, y) = (0, 3);
        let mut s = StdpState::default();
        let mut c = [0; 8];
        c[x] = 1;
        s.update(&c, &p, 1e-3);
        for _ in 0..4 {
            s.update(&[0; 8], &p, 1e-3);
        }
        let mut c = [0; 8];
        c[y] = 1;
        s.update(&c, &p, 1e-3);
        assert!((s.stdp[x][y] - 0.6561).abs() < 1e-12);
        assert!((s.stdp[y][x] + 0.3 * 0.6561).abs() < 1e-12);
    }

    #[test]
    fn constraint_values() {
        assert_eq!(weight_constraint(0.05, -0.05, 0.05), 0.0);
        assert_eq!(weight_constraint(-0.05, -0.05, 0.05), 0.0);
        assert_eq!(weight_constraint(0.0, -0.05, 0.05), 0.25);
    }

    #[test]
    fn zero_progress_freezes_weights() {
        let p = PlasticityParams::default();
        let mut w = InterLimbWeights::zeros(p.w_min, p.w_max);
        let mut s = StdpState::default();
        s.stdp = [[1e6; 8]; 8];
        apply_weight_update(&mut w, &s, 10.0, 0.0, &[1.0; 8], &p);
        assert_eq!(w, InterLimbWeights::zeros(p.w_min, p.w_max));
    }

    #[test]
    fn adenosine_only_depresses() {
        let p = PlasticityParams::default();
        let mut w = InterLimbWeights::zeros(p.w_min, p.w_max);
        let s = StdpState::default();
        let mut ado = [0.0; 8];
        ado[3] = 0.02;
        for _ in 0..10 {
            let before = w.clone();
            apply_weight_update(&mut w, &s, 1.0, 1.0, &ado, &p);
            for x in [0, 1, 4, 5, 6, 7] {
                assert!(w.get(x, 3) < before.get(x, 3));
            }
            assert_eq!(w.get(2, 3), 0.0);
            assert_eq!(w.get(0, 2), 0.0);
        }
    }

    #[test]
    fn stdp_decays_over_ten_tau() {
        let p = PlasticityParams::default();
        let mut s = StdpState::default();
        s.stdp[0][2] = 5.0;
        s.stdp[4][1] = -3.0;
        let steps = (10.0 * p.tau_stdp / 1e-3) as usize;
        for _ in 0..steps {
            s.update(&[0; 8], &p, 1e-3);
        }
        assert!(s.stdp[0][2].abs() < 1e-2 * 5.0);
        assert!(s.stdp[4][1].abs() < 1e-2 * 3.0);
    }

    proptest! {
        #[test]
        fn weights_stay_bounded_and_blocks_zero(
            r in -50.0f64..50.0,
            sig in prop::collection::vec(-1e8f64..1e8, 64),
            ado in prop::collection::vec(0.0f64..1.0, 8),
            steps in 1usize..20,
        ) {
            let p = PlasticityParams::default();
            let mut w = InterLimbWeights::zeros(p.w_min, p.w_max);
            let mut s = StdpState::default();
            for x in 0..8 { for y in 0..8 { s.stdp[x][y] = sig[x * 8 + y]; } }
            for _ in 0..steps {
                apply_weight_update(&mut w, &s, r, 1.0, &ado, &p);
            }
            for x in 0..8 {
                for y in 0..8 {
                    let v = w.get(x, y);
                    prop_assert!(v >= p.w_min && v <= p.w_max);
                    if x / 2 == y / 2 { prop_assert_eq!(v, 0.0); }
                }
            }
        }

        #[test]
        fn astrocyte_term_never_positive(w in -0.05f64..0.05, ado in 0.0f64..10.0, prog in 0.0f64..1.0) {
            let d = weight_delta(w, 0.0, 0.0, prog, ado, &PlasticityParams::default());
            prop_assert!(d.astrocyte <= 0.0);
        }

        #[test]
        fn reward_term_linear_in_eta(w in -0.049f64..0.049, sig in -1e5f64..1e5, r in -2.0f64..2.0) {
            let p1 = PlasticityParams::default();
            let p2 = PlasticityParams { eta: 2.0 * p1.eta, ..p1.clone() };
            let a = weight_delta(w, sig, r, 0.7, 0.0, &p1).reward;
            let b = weight_delta(w, sig, r, 0.7, 0.0, &p2).reward;
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }
}
