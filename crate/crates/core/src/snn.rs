//! Spiking neuron models.
//!
//! Motor neurons are pacemaker stochastic leaky integrate-and-fire (PSLIF)
//! cells: an LIF membrane with cytoplasmic Ca²⁺ accumulation that gates a K⁺
//! drop term, which is what terminates a burst. Interneurons (V1/V2b and the
//! thigh→calf IINs) are plain stochastic LIF (SLIF) cells.
//!
//! Everything is integrated with forward Euler at the simulation clock. Rate
//! terms (mV/s) are scaled by `dt`; synaptic events arrive as instantaneous
//! membrane impulses in mV.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rng::RngStream;

/// Below this probability a neuron is treated as silent without consuming a
/// random draw; above `1 - SURE_P` it fires without one.
const SURE_P: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    /// Step length in seconds.
    pub dt: f64,
    pub step_index: u64,
}

impl SimClock {
    pub fn new(dt: f64) -> Result<Self, ConfigError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ConfigError::invalid("session.dt", "must be positive"));
        }
        Ok(Self { dt, step_index: 0 })
    }

    #[inline]
    pub fn tick(&mut self) {
        self.step_index += 1;
    }

    /// Simulated time after `step_index` steps.
    #[inline]
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }
}

impl Default for SimClock {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            step_index: 0,
        }
    }
}

/// Motor neuron (PSLIF) parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PslifParams {
    /// Resting and reset potential (mV).
    pub v_rest: f64,
    /// Threshold potential (mV).
    pub v_th: f64,
    /// Membrane decay time constant (s).
    pub tau: f64,
    /// Refractory period (s).
    pub refractory: f64,
    /// Stochastic firing transition width.
    pub spike_width: f64,
    /// Ca²⁺ increment per action potential.
    pub r_ca: f64,
    /// Ca²⁺ decay time constant (s).
    pub tau_ca: f64,
    /// Ca²⁺ level at which the K⁺ channel is half open.
    pub thres_ca: f64,
    /// K⁺ channel sensitivity to Ca²⁺.
    pub s_k_chan: f64,
    /// Potential drop rate with the K⁺ channel fully open (mV/s).
    pub c_k_chan: f64,
    /// Background stimulation at zero torso speed (mV/s).
    pub i_background_0: f64,
    /// Background increment per m/s of torso speed (mV/s per m/s).
    pub k_background_v: f64,
    /// Relative amplitude of the uniform background noise.
    pub a_random: f64,
}

impl Default for PslifParams {
    fn default() -> Self {
        Self {
            v_rest: 0.0,
            v_th: 10.0,
            tau: 0.009,
            refractory: 0.005,
            spike_width: 0.2,
            r_ca: 1.0,
            tau_ca: 0.25,
            thres_ca: 10.0,
            s_k_chan: 10.0,
            c_k_chan: 8000.0,
            i_background_0: 1380.0,
            k_background_v: 40.0,
            a_random: 0.5,
        }
    }
}

impl PslifParams {
    pub fn validate(&self, dt: f64) -> Result<(), ConfigError> {
        if !(self.tau > 0.0) {
            return Err(ConfigError::invalid("snn.motor_tau", "must be positive"));
        }
        if !(self.tau_ca > 0.0) {
            return Err(ConfigError::invalid("snn.tau_ca", "must be positive"));
        }
        if dt >= self.tau_ca || dt >= self.tau {
            return Err(ConfigError::invalid(
                "session.dt",
                "must be smaller than every neuron time constant",
            ));
        }
        if !(self.spike_width > 0.0) {
            return Err(ConfigError::invalid("snn.motor_spike_width", "must be positive"));
        }
        if self.refractory < 0.0 {
            return Err(ConfigError::invalid("snn.motor_refractory", "must be >= 0"));
        }
        Ok(())
    }
}

/// Interneuron (SLIF) parameters, shared by V1/V2b and IIN cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlifParams {
    pub v_rest: f64,
    pub v_th: f64,
    pub tau: f64,
    pub refractory: f64,
    pub spike_width: f64,
}

impl Default for SlifParams {
    fn default() -> Self {
        Self {
            v_rest: 0.0,
            v_th: 10.0,
            tau: 0.009,
            refractory: 0.003,
            spike_width: 0.2,
        }
    }
}

impl SlifParams {
    pub fn validate(&self, dt: f64) -> Result<(), ConfigError> {
        if !(self.tau > dt) {
            return Err(ConfigError::invalid("snn.inter_tau", "must exceed dt"));
        }
        if !(self.spike_width > 0.0) {
            return Err(ConfigError::invalid("snn.inter_spike_width", "must be positive"));
        }
        if self.refractory < 0.0 {
            return Err(ConfigError::invalid("snn.inter_refractory", "must be >= 0"));
        }
        Ok(())
    }
}

/// Intra-pool wiring parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiringParams {
    pub pool_size: usize,
    /// Synapse strength at zero distance (mV).
    pub w0_dist: f64,
    /// Spatial decay coefficient.
    pub c_dist: f64,
}

impl Default for WiringParams {
    fn default() -> Self {
        Self {
            pool_size: 20,
            w0_dist: 4.0,
            c_dist: 0.3,
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability that a neuron at potential `v` fires this step.
#[inline]
pub fn spike_probability(v: f64, v_th: f64, s_spike: f64) -> f64 {
    sigmoid((v - v_th) / (s_spike / 2.0))
}

/// Distance-decayed synapse strength.
#[inline]
pub fn distance_weight(dist: f64, w0: f64, c_dist: f64) -> f64 {
    w0 * (-c_dist * dist).exp()
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Intra-pool weights for the given neuron positions, row-major with the
/// source neuron as row: `w[j * n + i]` is the synapse from `j` onto `i`.
pub fn wiring_from_positions(positions: &[[f64; 3]], w0: f64, c_dist: f64) -> Vec<f64> {
    let n = positions.len();
    let mut w = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            if i != j {
                w[j * n + i] = distance_weight(distance(&positions[j], &positions[i]), w0, c_dist);
            }
        }
    }
    w
}

/// Random neuron placement in the unit cube plus distance-based wiring.
pub fn build_pool_wiring(
    n: usize,
    w0: f64,
    c_dist: f64,
    rng: &mut RngStream,
) -> (Vec<[f64; 3]>, Vec<f64>) {
    let positions: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.uniform01(), rng.uniform01(), rng.uniform01()])
        .collect();
    let weights = wiring_from_positions(&positions, w0, c_dist);
    (positions, weights)
}

/// One Euler step of motor-neuron Ca²⁺.
#[inline]
pub fn update_calcium(ca: f64, spiked: bool, params: &PslifParams, dt: f64) -> f64 {
    ca * (1.0 - dt / params.tau_ca) + if spiked { params.r_ca } else { 0.0 }
}

/// Membrane drop rate (mV/s) from the Ca²⁺-gated K⁺ channel.
#[inline]
pub fn k_channel_drop(ca: f64, params: &PslifParams) -> f64 {
    params.c_k_chan * sigmoid(params.s_k_chan * (ca - params.thres_ca))
}

/// Noisy background drive (mV/s) for one neuron, given torso speed and a
/// uniform draw `u` on `[-1, 1]`.
#[inline]
pub fn background_current(v_torso: f64, params: &PslifParams, u: f64) -> f64 {
    (params.i_background_0 + params.k_background_v * v_torso) * (1.0 + params.a_random * u)
}

/// Draw the background current with a fresh sample from `rng`.
pub fn sample_background_current(v_torso: f64, params: &PslifParams, rng: &mut RngStream) -> f64 {
    background_current(v_torso, params, rng.uniform_pm1())
}

#[inline]
fn fires(v: f64, v_th: f64, width: f64, rng: &mut RngStream) -> bool {
    let p = spike_probability(v, v_th, width);
    if p < SURE_P {
        false
    } else if p > 1.0 - SURE_P {
        true
    } else {
        rng.uniform01() < p
    }
}

#[inline]
fn in_refractory(remaining: &mut f64, dt: f64) -> bool {
    if *remaining > 0.5 * dt {
        *remaining = (*remaining - dt).max(0.0);
        true
    } else {
        false
    }
}

/// Drive shared by every neuron of a pool for one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PoolInput {
    /// Torso speed magnitude feeding the background current (m/s).
    pub torso_speed: f64,
    /// Additional rate term (mV/s), e.g. limit-position inhibition.
    pub extra_rate: f64,
    /// Uniform impulse (mV) from interneurons and inter-limb synapses.
    pub impulse: f64,
}

/// State of one motor neuron pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolState {
    pub positions: Vec<[f64; 3]>,
    /// `intra_weights[j * n + i]`: synapse from `j` onto `i` (mV per spike).
    pub intra_weights: Vec<f64>,
    pub v: Vec<f64>,
    pub ca: Vec<f64>,
    pub refractory_remaining: Vec<f64>,
    pub spiked_last_step: Vec<bool>,
}

impl PoolState {
    pub fn new(wiring: &WiringParams, v_rest: f64, rng: &mut RngStream) -> Self {
        let (positions, intra_weights) =
            build_pool_wiring(wiring.pool_size, wiring.w0_dist, wiring.c_dist, rng);
        Self::with_wiring(positions, intra_weights, v_rest)
    }

    pub fn with_wiring(positions: Vec<[f64; 3]>, intra_weights: Vec<f64>, v_rest: f64) -> Self {
        let n = positions.len();
        assert_eq!(intra_weights.len(), n * n, "weight matrix must be n x n");
        Self {
            positions,
            intra_weights,
            v: vec![v_rest; n],
            ca: vec![0.0; n],
            refractory_remaining: vec![0.0; n],
            spiked_last_step: vec![false; n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.v.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Return every neuron to rest; wiring is kept.
    pub fn reset(&mut self, v_rest: f64) {
        self.v.fill(v_rest);
        self.ca.fill(0.0);
        self.refractory_remaining.fill(0.0);
        self.spiked_last_step.fill(false);
    }

    /// Spikes emitted in the most recent step.
    pub fn last_spike_count(&self) -> usize {
        self.spiked_last_step.iter().filter(|&&s| s).count()
    }

    /// Advance the pool by one step and return the number of spikes.
    ///
    /// Intra-pool impulses come from the previous step's spikes (one-step
    /// synaptic delay). `intra_scratch` must have length `n`.
    pub fn step(
        &mut self,
        params: &PslifParams,
        input: &PoolInput,
        dt: f64,
        rng: &mut RngStream,
        intra_scratch: &mut [f64],
    ) -> usize {
        let n = self.len();
        debug_assert_eq!(intra_scratch.len(), n);
        intra_scratch.fill(0.0);
        for j in 0..n {
            if self.spiked_last_step[j] {
                let row = &self.intra_weights[j * n..(j + 1) * n];
                for (acc, w) in intra_scratch.iter_mut().zip(row) {
                    *acc += w;
                }
            }
        }

        let mut count = 0;
        for i in 0..n {
            let ca_before = self.ca[i];
            let spiked = if in_refractory(&mut self.refractory_remaining[i], dt) {
                self.v[i] = params.v_rest;
                false
            } else {
                let bg = sample_background_current(input.torso_speed, params, rng);
                let rate = (params.v_rest - self.v[i]) / params.tau + bg
                    - k_channel_drop(ca_before, params)
                    + input.extra_rate;
                self.v[i] += dt * rate + input.impulse + intra_scratch[i];
                if fires(self.v[i], params.v_th, params.spike_width, rng) {
                    self.v[i] = params.v_rest;
                    self.refractory_remaining[i] = params.refractory;
                    true
                } else {
                    false
                }
            };
            self.ca[i] = update_calcium(ca_before, spiked, params, dt);
            self.spiked_last_step[i] = spiked;
            count += spiked as usize;
        }
        count
    }
}

/// State of one SLIF interneuron.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlifState {
    pub v: f64,
    pub refractory_remaining: f64,
    pub spiked_last_step: bool,
}

impl SlifState {
    pub fn new(v_rest: f64) -> Self {
        Self {
            v: v_rest,
            refractory_remaining: 0.0,
            spiked_last_step: false,
        }
    }

    pub fn reset(&mut self, v_rest: f64) {
        *self = Self::new(v_rest);
    }

    /// Advance one step with `impulse` mV of synaptic input; returns whether
    /// the cell fired. Input arriving during refractory is discarded.
    pub fn step(&mut self, params: &SlifParams, impulse: f64, dt: f64, rng: &mut RngStream) -> bool {
        let spiked = if in_refractory(&mut self.refractory_remaining, dt) {
            self.v = params.v_rest;
            false
        } else {
            self.v += dt * (params.v_rest - self.v) / params.tau + impulse;
            if fires(self.v, params.v_th, params.spike_width, rng) {
                self.v = params.v_rest;
                self.refractory_remaining = params.refractory;
                true
            } else {
                false
            }
        };
        self.spiked_last_step = spiked;
        spiked
    }
}
