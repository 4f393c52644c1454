//! Event-count power model.
//!
//! The spiking controller only performs accumulate operations: every spike
//! adds a weight into each of its targets. The baseline policy network
//! performs one multiply and one add per weight per control step.

use serde::{Deserialize, Serialize};

use crate::cpg::StepTally;

/// Energy per arithmetic operation (J).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpCosts {
    pub mult: f64,
    pub add: f64,
}

impl Default for OpCosts {
    fn default() -> Self {
        Self {
            mult: 3.7e-12,
            add: 0.9e-12,
        }
    }
}

/// Accumulations charged per event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanOut {
    pub inhibitory: u64,
    pub calf: u64,
    pub thigh: u64,
    /// Per inhibited pool per step.
    pub limit: u64,
}

impl FanOut {
    /// Counts for pools of `n` neurons: intra-pool targets plus one V1/V2b
    /// cell, plus one IIN and 60 inter-limb targets for thigh neurons.
    pub fn for_pool_size(n: u64) -> Self {
        Self {
            inhibitory: n,
            calf: n,
            thigh: n + 1 + 60,
            limit: n,
        }
    }
}

impl Default for FanOut {
    fn default() -> Self {
        Self::for_pool_size(20)
    }
}

/// Layer dimensions of the baseline policy network.
pub const POLICY_LAYERS: [usize; 4] = [42, 128, 128, 12];

/// Policy-network power at control frequency `f_control` (W).
pub fn p_policy(layers: &[usize], f_control: f64, costs: &OpCosts) -> f64 {
    let weights: usize = layers.windows(2).map(|w| w[0] * w[1]).sum();
    f_control * weights as f64 * (costs.mult + costs.add)
}

/// Network-wide firing frequencies (Hz), summed over all neurons in a category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Frequencies {
    pub inhibitory: f64,
    pub calf: f64,
    pub thigh: f64,
    pub limit: f64,
}

impl Frequencies {
    pub const REFERENCE: Frequencies = Frequencies {
        inhibitory: 6.69e2,
        calf: 4.34e3,
        thigh: 4.52e3,
        limit: 2.22e3,
    };
}

/// Spiking-controller power (W).
pub fn p_snn_cpg(f: &Frequencies, fan: &FanOut, costs: &OpCosts) -> f64 {
    (f.inhibitory * fan.inhibitory as f64
        + f.calf * fan.calf as f64
        + f.thigh * fan.thigh as f64
        + f.limit * fan.limit as f64)
        * costs.add
}

/// Cumulative event counts and charged accumulations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FiringTally {
    pub inhibitory: u64,
    pub calf: u64,
    pub thigh: u64,
    pub limit: u64,
    pub elapsed_s: f64,
    /// Accumulations charged event by event.
    pub adds: u64,
}

impl FiringTally {
    /// Add one control step of events.
    pub fn record_step(&mut self, step: &StepTally, fan: &FanOut, dt: f64) {
        let (inh, calf, thigh, limit) = (
            step.inhibitory_spikes() as u64,
            step.calf_spikes() as u64,
            step.thigh_spikes() as u64,
            step.limit_inhibited_pools as u64,
        );
        self.inhibitory += inh;
        self.calf += calf;
        self.thigh += thigh;
        self.limit += limit;
        self.adds += tally_ops(inh, calf, thigh, limit, fan);
        self.elapsed_s += dt;
    }

    pub fn frequencies(&self) -> Frequencies {
        if self.elapsed_s <= 0.0 {
            return Frequencies::default();
        }
        let t = self.elapsed_s;
        Frequencies {
            inhibitory: self.inhibitory as f64 / t,
            calf: self.calf as f64 / t,
            thigh: self.thigh as f64 / t,
            limit: self.limit as f64 / t,
        }
    }

    /// Power from the per-event accumulation count.
    pub fn direct_power(&self, costs: &OpCosts) -> f64 {
        if self.elapsed_s <= 0.0 {
            return 0.0;
        }
        self.adds as f64 * costs.add / self.elapsed_s
    }

    pub fn merge(&mut self, other: &FiringTally) {
        self.inhibitory += other.inhibitory;
        self.calf += other.calf;
        self.thigh += other.thigh;
        self.limit += other.limit;
        self.elapsed_s += other.elapsed_s;
        self.adds += other.adds;
    }
}

/// Accumulations charged for a batch of events.
pub fn tally_ops(inhibitory: u64, calf: u64, thigh: u64, limit: u64, fan: &FanOut) -> u64 {
    inhibitory * fan.inhibitory + calf * fan.calf + thigh * fan.thigh + limit * fan.limit
}

/// Mean of session-wise average frequencies.
pub fn estimate_frequencies(sessions: &[FiringTally]) -> Frequencies {
    let rates: Vec<Frequencies> = sessions.iter().map(FiringTally::frequencies).collect();
    if rates.is_empty() {
        return Frequencies::default();
    }
    let n = rates.len() as f64;
    let sum = |f: fn(&Frequencies) -> f64| rates.iter().map(f).sum::<f64>() / n;
    Frequencies {
        inhibitory: sum(|r| r.inhibitory),
        calf: sum(|r| r.calf),
        thigh: sum(|r| r.thigh),
        limit: sum(|r| r.limit),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub frequencies: Frequencies,
    pub p_policy: f64,
    pub p_snn: f64,
    pub ratio: f64,
    /// Per-event accounting of the same sessions, pooled.
    pub p_snn_direct: f64,
    pub sessions_used: usize,
}

impl EnergyReport {
    /// Report over the last (up to) 10 sessions at a 100 Hz policy rate.
    pub fn from_sessions(tallies: &[FiringTally], costs: &OpCosts, fan: &FanOut) -> Self {
        let last = &tallies[tallies.len().saturating_sub(10)..];
        Self::from_frequencies(estimate_frequencies(last), last, costs, fan)
    }

    pub fn from_frequencies(f: Frequencies, tallies: &[FiringTally], costs: &OpCosts, fan: &FanOut) -> Self {
        let p_policy = p_policy(&POLICY_LAYERS, 100.0, costs);
        let p_snn = p_snn_cpg(&f, fan, costs);
        let mut pooled = FiringTally::default();
        for t in tallies {
            pooled.merge(t);
        }
        Self {
            frequencies: f,
            p_policy,
            p_snn,
            ratio: if p_snn > 0.0 { p_policy / p_snn } else { f64::INFINITY },
            p_snn_direct: pooled.direct_power(costs),
            sessions_used: tallies.len(),
        }
    }

    pub fn to_text(&self) -> String {
        let f = &self.frequencies;
        format!(
            "category,frequency_hz\n\
             inhibitory,{:.6e}\ncalf,{:.6e}\nthigh,{:.6e}\nlimit_position,{:.6e}\n\
             \n\
             quantity,value\n\
             p_policy_w,{:.6e}\np_snn_w,{:.6e}\np_snn_direct_w,{:.6e}\nratio,{:.4}\nsessions_used,{}\n",
            f.inhibitory, f.calf, f.thigh, f.limit, self.p_policy, self.p_snn, self.p_snn_direct, self.ratio, self.sessions_used
        )
    }
}
