//! Central pattern generator: four locomotion units plus inter-limb wiring.
//!
//! Each limb has four motor pools (thigh flexor/extensor, calf
//! flexor/extensor). Every pool excites one V1/V2b interneuron that inhibits
//! the antagonist pool of the same joint, and each thigh pool drives an IIN
//! that inhibits the antagonistic calf pool. Thigh pools of different limbs
//! are coupled through the trainable [`InterLimbWeights`] table.
//!
//! Synaptic events take effect on the step after they are emitted, except the
//! motor → interneuron path, which the interneurons integrate in the same step
//! as the motor spikes. Joint torques come from exponentially decaying torque
//! traces driven by flexor/extensor spikes; hips are held by a PI controller.
//!
//! Torque and joint layout is `[hip, thigh, calf] × [FR, FL, RR, RL]`, i.e.
//! index `limb * 3 + joint`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::physics::Observation;
use crate::rng::{stream, RngStream};
use crate::snn::{PoolInput, PoolState, PslifParams, SlifParams, SlifState, WiringParams};

pub const N_LIMBS: usize = 4;
pub const N_POOLS: usize = 16;
pub const N_THIGH_POOLS: usize = 8;
pub const N_JOINTS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Limb {
    FrontRight,
    FrontLeft,
    RearRight,
    RearLeft,
}

impl Limb {
    pub const ALL: [Limb; 4] = [Limb::FrontRight, Limb::FrontLeft, Limb::RearRight, Limb::RearLeft];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Limb {
        Self::ALL[i]
    }

    pub fn is_front(self) -> bool {
        matches!(self, Limb::FrontRight | Limb::FrontLeft)
    }

    pub fn is_left(self) -> bool {
        matches!(self, Limb::FrontLeft | Limb::RearLeft)
    }

    pub fn abbrev(self) -> &'static str {
        match self {
            Limb::FrontRight => "FR",
            Limb::FrontLeft => "FL",
            Limb::RearRight => "RR",
            Limb::RearLeft => "RL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Joint {
    Thigh,
    Calf,
}

/// Flexors decrease the joint angle, extensors increase it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Flexor,
    Extensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MuscleId {
    pub limb: Limb,
    pub joint: Joint,
    pub role: Role,
}

impl MuscleId {
    pub fn new(limb: Limb, joint: Joint, role: Role) -> Self {
        Self { limb, joint, role }
    }

    /// Index into the 16 motor pools: `limb * 4 + joint * 2 + role`.
    pub fn pool_index(self) -> usize {
        self.limb.index() * 4 + (self.joint as usize) * 2 + self.role as usize
    }

    pub fn from_pool_index(p: usize) -> Self {
        let limb = Limb::from_index(p / 4);
        let joint = if (p / 2) % 2 == 0 { Joint::Thigh } else { Joint::Calf };
        let role = if p % 2 == 0 { Role::Flexor } else { Role::Extensor };
        Self { limb, joint, role }
    }

    /// Row/column in the inter-limb table for thigh muscles: `limb * 2 + role`.
    pub fn thigh_index(self) -> Option<usize> {
        (self.joint == Joint::Thigh).then(|| self.limb.index() * 2 + self.role as usize)
    }

    pub fn from_thigh_index(x: usize) -> Self {
        let role = if x % 2 == 0 { Role::Flexor } else { Role::Extensor };
        Self::new(Limb::from_index(x / 2), Joint::Thigh, role)
    }
}

impl fmt::Display for MuscleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joint = match self.joint {
            Joint::Thigh => "thigh",
            Joint::Calf => "calf",
        };
        let role = match self.role {
            Role::Flexor => "flex",
            Role::Extensor => "ext",
        };
        write!(f, "{}-{}-{}", self.limb.abbrev(), joint, role)
    }
}

/// Pool index of the thigh muscle at inter-limb index `x`.
#[inline]
pub fn thigh_pool(x: usize) -> usize {
    (x / 2) * 4 + x % 2
}

/// Joint-angle limits used by the limit-position inhibition and the plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub front_thigh: (f64, f64),
    pub rear_thigh: (f64, f64),
    pub calf: (f64, f64),
    /// Width of the inhibition band inside each thigh limit (rad).
    pub band: f64,
}

impl Default for JointLimits {
    fn default() -> Self {
        Self {
            front_thigh: (0.6, 1.4),
            rear_thigh: (0.7, 1.5),
            calf: (-1.6, -1.0),
            band: 0.05,
        }
    }
}

impl JointLimits {
    pub fn thigh(&self, limb: Limb) -> (f64, f64) {
        if limb.is_front() {
            self.front_thigh
        } else {
            self.rear_thigh
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, (lo, hi)) in [
            ("cpg.front_thigh", self.front_thigh),
            ("cpg.rear_thigh", self.rear_thigh),
            ("cpg.calf", self.calf),
        ] {
            if !(lo < hi) {
                return Err(ConfigError::invalid(name, "lower limit must be below upper"));
            }
            if !(self.band >= 0.0 && self.band < (hi - lo) / 2.0) {
                return Err(ConfigError::invalid("cpg.limit_band", "band must be in [0, range/2)"));
            }
        }
        Ok(())
    }
}

/// `(inhibit_flexor, inhibit_extensor)` for a thigh at `angle`.
pub fn limit_position_inhibition(angle: f64, limits: (f64, f64), band: f64) -> (bool, bool) {
    let (lo, hi) = limits;
    let flexor = angle <= lo + band;
    let extensor = angle >= hi - band;
    (flexor, extensor)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpgParams {
    pub motor: PslifParams,
    pub inter: SlifParams,
    pub wiring: WiringParams,
    /// Motor neuron → interneuron synapse (mV per spike).
    pub w_motor_to_inter: f64,
    /// Interneuron → motor neuron synapse (mV per spike).
    pub w_inter_to_motor: f64,
    /// Limit-position inhibition rate (mV/s), applied as `-c_limit`.
    pub c_limit: f64,
    pub limits: JointLimits,
    /// Torque trace decay time constant (s).
    pub tau_h: f64,
    pub i_thigh: f64,
    pub i_calf: f64,
    pub hip: HipPiParams,
}

impl Default for CpgParams {
    fn default() -> Self {
        Self {
            motor: PslifParams::default(),
            inter: SlifParams::default(),
            wiring: WiringParams::default(),
            w_motor_to_inter: 2.0,
            w_inter_to_motor: -50.0,
            c_limit: 400.0,
            limits: JointLimits::default(),
            tau_h: 0.1,
            i_thigh: 0.7,
            i_calf: 1.1,
            hip: HipPiParams::default(),
        }
    }
}

impl CpgParams {
    pub fn validate(&self, dt: f64) -> Result<(), ConfigError> {
        self.motor.validate(dt)?;
        self.inter.validate(dt)?;
        self.limits.validate()?;
        if self.wiring.pool_size == 0 {
            return Err(ConfigError::invalid("snn.pool_size", "must be >= 1"));
        }
        if !(self.tau_h > dt) {
            return Err(ConfigError::invalid("cpg.tau_h", "must exceed dt"));
        }
        Ok(())
    }
}

/// Trainable thigh-to-thigh synapse table, `w[source][target]`.
///
/// Same-limb 2×2 blocks are structurally zero and cannot be written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterLimbWeights {
    w: [[f64; N_THIGH_POOLS]; N_THIGH_POOLS],
    pub w_min: f64,
    pub w_max: f64,
}

impl InterLimbWeights {
    pub fn zeros(w_min: f64, w_max: f64) -> Self {
        Self {
            w: [[0.0; N_THIGH_POOLS]; N_THIGH_POOLS],
            w_min,
            w_max,
        }
    }

    #[inline]
    pub fn is_trainable(x: usize, y: usize) -> bool {
        x / 2 != y / 2
    }

    /// All trainable `(source, target)` pairs (48 of them).
    pub fn trainable_pairs() -> impl Iterator<Item = (usize, usize)> {
        (0..N_THIGH_POOLS)
            .flat_map(|x| (0..N_THIGH_POOLS).map(move |y| (x, y)))
            .filter(|&(x, y)| Self::is_trainable(x, y))
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.w[x][y]
    }

    /// Set a trainable entry, clipped to the bounds. Same-limb writes are
    /// ignored.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        if Self::is_trainable(x, y) {
            self.w[x][y] = value.clamp(self.w_min, self.w_max);
        }
    }

    pub fn as_rows(&self) -> &[[f64; N_THIGH_POOLS]; N_THIGH_POOLS] {
        &self.w
    }

    pub fn trainable_values(&self) -> Vec<f64> {
        Self::trainable_pairs().map(|(x, y)| self.w[x][y]).collect()
    }
}

/// Per-target-pool impulse (mV, applied to every neuron of the pool) from
/// this step's thigh spike counts.
pub fn inter_limb_impulses(weights: &InterLimbWeights, counts: &[u32; N_THIGH_POOLS]) -> [f64; N_THIGH_POOLS] {
    let mut out = [0.0; N_THIGH_POOLS];
    for (x, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        for (y, o) in out.iter_mut().enumerate() {
            if InterLimbWeights::is_trainable(x, y) {
                *o += weights.get(x, y) * c as f64;
            }
        }
    }
    out
}

/// One Euler step of a torque trace; extensor spikes push positive.
#[inline]
pub fn update_torque_trace(h: f64, extensor_spikes: u32, flexor_spikes: u32, increment: f64, tau_h: f64, dt: f64) -> f64 {
    h * (1.0 - dt / tau_h) + increment * (extensor_spikes as f64 - flexor_spikes as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HipPiParams {
    pub k_p: f64,
    pub k_i: f64,
    /// Outward abduction target (rad), same sign convention for every leg.
    pub target: f64,
    /// Integral clamp (rad·s).
    pub integral_limit: f64,
}

impl Default for HipPiParams {
    fn default() -> Self {
        Self {
            k_p: 30.0,
            k_i: 10.0,
            target: 0.1,
            integral_limit: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HipPiState {
    pub integral_error: [f64; N_LIMBS],
}

impl HipPiState {
    pub fn reset(&mut self) {
        self.integral_error = [0.0; N_LIMBS];
    }

    /// Torque from the current error and accumulated integral; the integral
    /// is then advanced by one rectangle.
    pub fn torque(&mut self, params: &HipPiParams, limb: usize, hip_angle: f64, dt: f64) -> f64 {
        let err = params.target - hip_angle;
        let tau = params.k_p * err + params.k_i * self.integral_error[limb];
        self.integral_error[limb] = (self.integral_error[limb] + err * dt)
            .clamp(-params.integral_limit, params.integral_limit);
        tau
    }
}

/// One limb's motor pools and interneurons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocomotionUnit {
    /// thigh flexor, thigh extensor, calf flexor, calf extensor.
    pub pools: [PoolState; 4],
    /// V1/V2b cell `k` is excited by pool `k` and inhibits pool `k ^ 1`.
    pub v1v2b: [SlifState; 4],
    /// IIN 0: thigh flexor → calf extensor. IIN 1: thigh extensor → calf flexor.
    pub iin: [SlifState; 2],
}

/// Pool (within a unit) inhibited by IIN `k`.
const IIN_TARGET: [usize; 2] = [3, 2];

impl LocomotionUnit {
    fn reset(&mut self, motor_rest: f64, inter_rest: f64) {
        for p in &mut self.pools {
            p.reset(motor_rest);
        }
        for s in self.v1v2b.iter_mut().chain(self.iin.iter_mut()) {
            s.reset(inter_rest);
        }
    }
}

/// Spikes and limit events of one CPG step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepTally {
    pub pool_spikes: [u32; N_POOLS],
    pub v1v2b_spikes: u32,
    pub iin_spikes: u32,
    /// Thigh pools inside their limit-inhibition band this step.
    pub limit_inhibited_pools: u32,
}

impl StepTally {
    /// Thigh spike counts in inter-limb order.
    pub fn thigh_counts(&self) -> [u32; N_THIGH_POOLS] {
        std::array::from_fn(|x| self.pool_spikes[thigh_pool(x)])
    }

    pub fn thigh_spikes(&self) -> u32 {
        self.thigh_counts().iter().sum()
    }

    pub fn calf_spikes(&self) -> u32 {
        self.pool_spikes.iter().sum::<u32>() - self.thigh_spikes()
    }

    pub fn inhibitory_spikes(&self) -> u32 {
        self.v1v2b_spikes + self.iin_spikes
    }
}

/// Synaptic accumulations actually delivered by the network, by source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeliveryCounter {
    pub intra_pool: u64,
    pub motor_to_v1v2b: u64,
    pub motor_to_iin: u64,
    pub inter_limb: u64,
    pub interneuron_to_motor: u64,
    pub limit_position: u64,
}

impl DeliveryCounter {
    pub fn total(&self) -> u64 {
        self.intra_pool
            + self.motor_to_v1v2b
            + self.motor_to_iin
            + self.inter_limb
            + self.interneuron_to_motor
            + self.limit_position
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpgOutput {
    pub torques: [f64; N_JOINTS],
    pub tally: StepTally,
}

/// The full spiking controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpg {
    pub params: CpgParams,
    pub units: Vec<LocomotionUnit>,
    /// Torque traces, index `limb * 2 + (0 thigh | 1 calf)`.
    pub traces: [f64; 8],
    pub hip_pi: HipPiState,
    pub deliveries: DeliveryCounter,
    pool_rngs: Vec<RngStream>,
    inter_rngs: Vec<RngStream>,
    last_counts: [u32; N_POOLS],
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl Cpg {
    /// Build the network; pool wiring and noise streams derive from `seed`.
    pub fn new(params: CpgParams, seed: u64) -> Self {
        let units = (0..N_LIMBS)
            .map(|limb| {
                let pools = std::array::from_fn(|k| {
                    let p = limb * 4 + k;
                    let mut wrng = RngStream::derive(seed, stream::WIRING_BASE + p as u64);
                    PoolState::new(&params.wiring, params.motor.v_rest, &mut wrng)
                });
                LocomotionUnit {
                    pools,
                    v1v2b: [SlifState::new(params.inter.v_rest); 4],
                    iin: [SlifState::new(params.inter.v_rest); 2],
                }
            })
            .collect();
        let pool_rngs = (0..N_POOLS).map(|p| RngStream::derive(seed, p as u64)).collect();
        let inter_rngs = (0..N_LIMBS)
            .map(|l| RngStream::derive(seed, stream::INTERNEURON_BASE + l as u64))
            .collect();
        let n = params.wiring.pool_size;
        Self {
            params,
            units,
            traces: [0.0; 8],
            hip_pi: HipPiState::default(),
            deliveries: DeliveryCounter::default(),
            pool_rngs,
            inter_rngs,
            last_counts: [0; N_POOLS],
            scratch: vec![0.0; n],
        }
    }

    /// Session reset: neurons, traces and hip integrals. Wiring and noise
    /// streams persist.
    pub fn reset(&mut self) {
        let (mr, ir) = (self.params.motor.v_rest, self.params.inter.v_rest);
        for u in &mut self.units {
            u.reset(mr, ir);
        }
        self.traces = [0.0; 8];
        self.hip_pi.reset();
        self.last_counts = [0; N_POOLS];
    }

    pub fn pool(&self, p: usize) -> &PoolState {
        &self.units[p / 4].pools[p % 4]
    }

    pub fn pool_mut(&mut self, p: usize) -> &mut PoolState {
        &mut self.units[p / 4].pools[p % 4]
    }

    pub fn last_counts(&self) -> &[u32; N_POOLS] {
        &self.last_counts
    }

    pub fn rng_states(&self) -> (Vec<RngStream>, Vec<RngStream>) {
        (self.pool_rngs.clone(), self.inter_rngs.clone())
    }

    pub fn restore_rng_states(&mut self, pools: Vec<RngStream>, inter: Vec<RngStream>) {
        assert_eq!(pools.len(), N_POOLS);
        assert_eq!(inter.len(), N_LIMBS);
        self.pool_rngs = pools;
        self.inter_rngs = inter;
    }

    /// Limit-inhibition flags for all 16 pools from observed thigh angles.
    pub fn limit_flags(&self, obs: &Observation) -> [bool; N_POOLS] {
        let mut flags = [false; N_POOLS];
        let lim = &self.params.limits;
        for limb in Limb::ALL {
            let angle = obs.joint_pos[limb.index() * 3 + 1];
            let (f, e) = limit_position_inhibition(angle, lim.thigh(limb), lim.band);
            flags[limb.index() * 4] = f;
            flags[limb.index() * 4 + 1] = e;
        }
        flags
    }

    /// Advance the controller one step given the previous plant observation.
    pub fn step(&mut self, weights: &InterLimbWeights, obs: &Observation, dt: f64) -> CpgOutput {
        let n = self.params.wiring.pool_size;
        if self.scratch.len() != n {
            self.scratch = vec![0.0; n];
        }
        let torso_speed = obs.torso_speed();
        let limit = self.limit_flags(obs);

        // Impulses from last step's interneuron and thigh spikes.
        let prev_thigh: [u32; N_THIGH_POOLS] = std::array::from_fn(|x| self.last_counts[thigh_pool(x)]);
        let inter_limb = inter_limb_impulses(weights, &prev_thigh);
        let w_im = self.params.w_inter_to_motor;

        let mut tally = StepTally::default();
        for (limb, unit) in self.units.iter_mut().enumerate() {
            let mut impulses = [0.0; 4];
            for k in 0..4 {
                if unit.v1v2b[k ^ 1].spiked_last_step {
                    impulses[k] += w_im;
                }
            }
            for (i, &target) in IIN_TARGET.iter().enumerate() {
                if unit.iin[i].spiked_last_step {
                    impulses[target] += w_im;
                }
            }
            impulses[0] += inter_limb[limb * 2];
            impulses[1] += inter_limb[limb * 2 + 1];

            for k in 0..4 {
                let p = limb * 4 + k;
                let input = PoolInput {
                    torso_speed,
                    extra_rate: if limit[p] { -self.params.c_limit } else { 0.0 },
                    impulse: impulses[k],
                };
                let c = unit.pools[k].step(
                    &self.params.motor,
                    &input,
                    dt,
                    &mut self.pool_rngs[p],
                    &mut self.scratch,
                ) as u32;
                tally.pool_spikes[p] = c;
                if limit[p] {
                    tally.limit_inhibited_pools += 1;
                    self.deliveries.limit_position += n as u64;
                }
            }

            // Interneurons integrate this step's motor volleys.
            let counts = &tally.pool_spikes[limb * 4..limb * 4 + 4];
            let rng = &mut self.inter_rngs[limb];
            let w_mi = self.params.w_motor_to_inter;
            for k in 0..4 {
                if unit.v1v2b[k].step(&self.params.inter, w_mi * counts[k] as f64, dt, rng) {
                    tally.v1v2b_spikes += 1;
                }
            }
            for i in 0..2 {
                if unit.iin[i].step(&self.params.inter, w_mi * counts[i] as f64, dt, rng) {
                    tally.iin_spikes += 1;
                }
            }
        }

        self.count_deliveries(&tally);
        self.last_counts = tally.pool_spikes;

        let p = &self.params;
        for limb in 0..N_LIMBS {
            let c = &tally.pool_spikes[limb * 4..limb * 4 + 4];
            self.traces[limb * 2] = update_torque_trace(self.traces[limb * 2], c[1], c[0], p.i_thigh, p.tau_h, dt);
            self.traces[limb * 2 + 1] = update_torque_trace(self.traces[limb * 2 + 1], c[3], c[2], p.i_calf, p.tau_h, dt);
        }

        let mut torques = [0.0; N_JOINTS];
        for limb in 0..N_LIMBS {
            torques[limb * 3] = self.hip_pi.torque(&p.hip, limb, obs.joint_pos[limb * 3], dt);
            torques[limb * 3 + 1] = self.traces[limb * 2];
            torques[limb * 3 + 2] = self.traces[limb * 2 + 1];
        }
        CpgOutput { torques, tally }
    }

    fn count_deliveries(&mut self, tally: &StepTally) {
        let n = self.params.wiring.pool_size as u64;
        let d = &mut self.deliveries;
        for (p, &c) in tally.pool_spikes.iter().enumerate() {
            let c = c as u64;
            d.intra_pool += c * (n - 1);
            d.motor_to_v1v2b += c;
            if let Some(x) = MuscleId::from_pool_index(p).thigh_index() {
                d.motor_to_iin += c;
                let targets = (0..N_THIGH_POOLS).filter(|&y| InterLimbWeights::is_trainable(x, y)).count() as u64;
                d.inter_limb += c * targets * n;
            }
        }
        d.interneuron_to_motor += tally.inhibitory_spikes() as u64 * n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn muscle_indexing_round_trips() {
        for p in 0..N_POOLS {
            assert_eq!(MuscleId::from_pool_index(p).pool_index(), p);
        }
        for x in 0..N_THIGH_POOLS {
            let m = MuscleId::from_thigh_index(x);
            assert_eq!(m.thigh_index(), Some(x));
            assert_eq!(m.pool_index(), thigh_pool(x));
        }
        let fr_ext = MuscleId::new(Limb::FrontRight, Joint::Thigh, Role::Extensor);
        assert_eq!(fr_ext.to_string(), "FR-thigh-ext");
        assert_eq!(fr_ext.thigh_index(), Some(1));
    }

    #[test]
    fn limit_inhibition_front_thigh() {
        let l = JointLimits::default();
        assert_eq!(limit_position_inhibition(0.62, l.front_thigh, l.band), (true, false));
        assert_eq!(limit_position_inhibition(1.38, l.front_thigh, l.band), (false, true));
        assert_eq!(limit_position_inhibition(1.0, l.front_thigh, l.band), (false, false));
        assert_eq!(limit_position_inhibition(0.72, l.rear_thigh, l.band), (true, false));
    }

    #[test]
    fn inter_limb_impulse_arithmetic() {
        let mut w = InterLimbWeights::zeros(-0.05, 0.05);
        let zero = inter_limb_impulses(&w, &[3; 8]);
        assert!(zero.iter().all(|&v| v == 0.0));

        let fr_ext = 1;
        let fl_flex = 2;
        w.set(fr_ext, fl_flex, 0.05);
        let mut counts = [0; 8];
        counts[fr_ext] = 7;
        let imp = inter_limb_impulses(&w, &counts);
        assert!((imp[fl_flex] - 0.35).abs() < 1e-12);

        // Same-limb entries cannot be written and contribute nothing.
        w.set(0, 1, 0.05);
        assert_eq!(w.get(0, 1), 0.0);
        let imp = inter_limb_impulses(&w, &[0, 9, 0, 0, 0, 0, 0, 0]);
        assert_eq!(imp[0], 0.0);
    }

    #[test]
    fn weights_are_clipped_and_48_trainable() {
        let mut w = InterLimbWeights::zeros(-0.05, 0.05);
        assert_eq!(InterLimbWeights::trainable_pairs().count(), 48);
        w.set(0, 2, 1.0);
        assert_eq!(w.get(0, 2), 0.05);
        w.set(0, 2, -1.0);
        assert_eq!(w.get(0, 2), -0.05);
    }

    #[test]
    fn torque_trace_steps() {
        assert_eq!(update_torque_trace(0.0, 0, 0, 0.7, 0.1, 1e-3), 0.0);
        assert!((update_torque_trace(0.0, 3, 0, 0.7, 0.1, 1e-3) - 2.1).abs() < 1e-12);
        assert!((update_torque_trace(1.0, 0, 0, 0.7, 0.1, 1e-3) - 0.99).abs() < 1e-12);
        assert!((update_torque_trace(0.0, 0, 2, 1.1, 0.1, 1e-3) + 2.2).abs() < 1e-12);
    }

    #[test]
    fn torque_trace_superposition() {
        let train_a = [1u32, 0, 0, 2, 0, 1, 0, 0];
        let train_b = [0u32, 3, 0, 0, 1, 0, 0, 2];
        let run = |t: &[u32]| {
            let mut h = 0.0;
            let mut out = Vec::new();
            for &c in t {
                h = update_torque_trace(h, c, 0, 0.7, 0.1, 1e-3);
                out.push(h);
            }
            out
        };
        let sum: Vec<u32> = train_a.iter().zip(&train_b).map(|(a, b)| a + b).collect();
        let (a, b, s) = (run(&train_a), run(&train_b), run(&sum));
        for i in 0..s.len() {
            assert!((a[i] + b[i] - s[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn hip_pi_values() {
        let p = HipPiParams::default();
        let mut s = HipPiState::default();
        assert_eq!(s.torque(&p, 0, 0.1, 1e-3), 0.0);
        let mut s = HipPiState::default();
        assert!((s.torque(&p, 0, 0.0, 1e-3) - 3.0).abs() < 1e-12);
        let mut s = HipPiState::default();
        for _ in 0..1000 {
            s.torque(&p, 1, 0.0, 1e-3);
        }
        assert!((s.torque(&p, 1, 0.0, 1e-3) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn hip_integral_clamped() {
        let p = HipPiParams::default();
        let mut s = HipPiState::default();
        for _ in 0..100_000 {
            s.torque(&p, 2, -1.0, 1e-3);
        }
        assert_eq!(s.integral_error[2], 1.0);
    }

    #[test]
    fn first_step_outputs_only_hip_torque() {
        let mut cpg = Cpg::new(CpgParams::default(), 1);
        let w = InterLimbWeights::zeros(-0.05, 0.05);
        let obs = Observation::standing(&JointLimits::default(), 0.1);
        let out = cpg.step(&w, &obs, 1e-3);
        assert_eq!(out.tally.pool_spikes, [0; N_POOLS]);
        for limb in 0..4 {
            assert_eq!(out.torques[limb * 3 + 1], 0.0);
            assert_eq!(out.torques[limb * 3 + 2], 0.0);
            assert_eq!(out.torques[limb * 3], 0.0);
        }
    }

    #[test]
    fn reset_clears_neurons_but_keeps_wiring() {
        let mut cpg = Cpg::new(CpgParams::default(), 4);
        let wiring = cpg.pool(5).intra_weights.clone();
        let w = InterLimbWeights::zeros(-0.05, 0.05);
        let obs = Observation::standing(&JointLimits::default(), 0.1);
        for _ in 0..200 {
            cpg.step(&w, &obs, 1e-3);
        }
        assert!(cpg.traces.iter().any(|&h| h != 0.0));
        cpg.reset();
        assert_eq!(cpg.traces, [0.0; 8]);
        assert!(cpg.pool(5).v.iter().all(|&v| v == 0.0));
        assert_eq!(cpg.pool(5).intra_weights, wiring);
    }
}
