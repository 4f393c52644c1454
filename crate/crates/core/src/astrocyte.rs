//! Astrocyte homeostat, one per thigh motor pool.
//!
//! Motor spikes release 2-AG, which drives astrocytic IP₃. IP₃ gates Ca²⁺
//! release from the endoplasmic reticulum (reduced Li-Rinzel model). Whenever
//! cytosolic Ca²⁺ exceeds a threshold, and the release refractory period has
//! passed, a fixed quantum of adenosine is released. Adenosine depresses every
//! inter-limb synapse that targets the astrocyte's pool.
//!
//! Astrocyte Ca²⁺ is a separate quantity from motor-neuron Ca²⁺ and is in µM.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Reduced Li-Rinzel coefficients (concentrations in µM, rates in 1/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiRinzelParams {
    pub c0: f64,
    pub c1: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub k3: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d5: f64,
    pub a2: f64,
    /// Resting IP₃ level (µM).
    pub ip3_base: f64,
    /// IP₃ relaxation time constant (s).
    pub tau_ip3: f64,
    /// IP₃ production per unit 2-AG (µM/s).
    pub k_ag: f64,
}

impl Default for LiRinzelParams {
    fn default() -> Self {
        Self {
            c0: 2.0,
            c1: 0.185,
            v1: 6.0,
            v2: 0.11,
            v3: 0.9,
            k3: 0.1,
            d1: 0.13,
            d2: 1.049,
            d3: 0.9434,
            d5: 0.082_34,
            a2: 0.2,
            ip3_base: 0.16,
            tau_ip3: 7.0,
            k_ag: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstrocyteParams {
    /// 2-AG released per motor spike.
    pub r_ag: f64,
    pub tau_ag: f64,
    /// Cytosolic Ca²⁺ level above which adenosine is released.
    pub thres_ca_ado: f64,
    /// Adenosine released per event.
    pub r_ado: f64,
    pub tau_ado: f64,
    /// Minimum time between releases (s).
    pub refractory_ado: f64,
    pub li_rinzel: LiRinzelParams,
}

impl Default for AstrocyteParams {
    fn default() -> Self {
        Self {
            r_ag: 1e-3,
            tau_ag: 1.0,
            thres_ca_ado: 0.3,
            r_ado: 0.01,
            tau_ado: 1.0,
            refractory_ado: 0.3,
            li_rinzel: LiRinzelParams::default(),
        }
    }
}

impl AstrocyteParams {
    pub fn validate(&self, dt: f64) -> Result<(), ConfigError> {
        if !(self.refractory_ado > 0.0) {
            return Err(ConfigError::invalid("astrocyte.refractory_ado", "must be positive"));
        }
        if !(self.thres_ca_ado > 0.0) {
            return Err(ConfigError::invalid("astrocyte.thres_ca_ado", "must be positive"));
        }
        for (k, v) in [
            ("astrocyte.tau_ag", self.tau_ag),
            ("astrocyte.tau_ado", self.tau_ado),
            ("astrocyte.tau_ip3", self.li_rinzel.tau_ip3),
        ] {
            if !(v > dt) {
                return Err(ConfigError::invalid(k, "must exceed dt"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstrocyteState {
    pub ag: f64,
    pub ip3: f64,
    pub ca_cyt: f64,
    /// Fraction of ER channels not inactivated.
    pub gate_h: f64,
    pub ado: f64,
    pub time_since_release: f64,
}

impl AstrocyteState {
    /// Resting state: the Li-Rinzel fixed point at baseline IP₃.
    pub fn resting(params: &AstrocyteParams) -> Self {
        let lr = &params.li_rinzel;
        let mut s = Self {
            ag: 0.0,
            ip3: lr.ip3_base,
            ca_cyt: 0.05,
            gate_h: 0.8,
            ado: 0.0,
            // Ready to release.
            time_since_release: params.refractory_ado,
        };
        // Relax to the fixed point; baseline IP₃ lies below the oscillatory band.
        for _ in 0..200_000 {
            step_li_rinzel(&mut s, lr, 1e-3);
        }
        s
    }
}

/// Euler step of 2-AG.
#[inline]
pub fn update_ag(ag: f64, spikes: u32, params: &AstrocyteParams, dt: f64) -> f64 {
    ag * (1.0 - dt / params.tau_ag) + params.r_ag * spikes as f64
}

/// Ca²⁺ fluxes `(J_chan, J_leak, J_pump)` at the given state.
pub fn li_rinzel_fluxes(ip3: f64, ca: f64, h: f64, lr: &LiRinzelParams) -> (f64, f64, f64) {
    let ca_er = (lr.c0 - ca) / lr.c1;
    let m_inf = ip3 / (ip3 + lr.d1);
    let n_inf = ca / (ca + lr.d5);
    let open = (m_inf * n_inf * h).powi(3);
    let j_chan = lr.c1 * lr.v1 * open * (ca_er - ca);
    let j_leak = lr.c1 * lr.v2 * (ca_er - ca);
    let j_pump = lr.v3 * ca * ca / (lr.k3 * lr.k3 + ca * ca);
    (j_chan, j_leak, j_pump)
}

/// One Euler step of `(ip3, ca_cyt, gate_h)` driven by the current 2-AG.
pub fn step_li_rinzel(s: &mut AstrocyteState, lr: &LiRinzelParams, dt: f64) {
    let (j_chan, j_leak, j_pump) = li_rinzel_fluxes(s.ip3, s.ca_cyt, s.gate_h, lr);
    let q2 = lr.d2 * (s.ip3 + lr.d1) / (s.ip3 + lr.d3);
    let dh = lr.a2 * (q2 * (1.0 - s.gate_h) - s.ca_cyt * s.gate_h);
    let dip3 = (lr.ip3_base - s.ip3) / lr.tau_ip3 + lr.k_ag * s.ag;

    s.ca_cyt = (s.ca_cyt + dt * (j_chan + j_leak - j_pump)).clamp(0.0, lr.c0);
    s.gate_h = (s.gate_h + dt * dh).clamp(0.0, 1.0);
    s.ip3 = (s.ip3 + dt * dip3).max(0.0);
}

/// Adenosine decay plus thresholded, refractory release. Returns the new level.
pub fn release_adenosine(s: &mut AstrocyteState, params: &AstrocyteParams, dt: f64) -> f64 {
    s.ado *= 1.0 - dt / params.tau_ado;
    s.time_since_release += dt;
    if s.ca_cyt > params.thres_ca_ado && s.time_since_release >= params.refractory_ado - 1e-9 {
        s.ado += params.r_ado;
        s.time_since_release = 0.0;
    }
    s.ado
}

/// The eight astrocytes attached to the thigh pools (inter-limb order).
///
/// Astrocyte state is carried across session resets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AstrocyteLayer {
    pub params: AstrocyteParams,
    pub cells: Vec<AstrocyteState>,
    pub releases: u64,
}

impl AstrocyteLayer {
    pub fn new(params: AstrocyteParams, n: usize) -> Self {
        let cell = AstrocyteState::resting(&params);
        Self {
            cells: vec![cell; n],
            params,
            releases: 0,
        }
    }

    /// Advance every astrocyte with its pool's spike count for this step.
    pub fn step(&mut self, pool_spikes: &[u32], dt: f64) {
        debug_assert_eq!(pool_spikes.len(), self.cells.len());
        for (s, &c) in self.cells.iter_mut().zip(pool_spikes) {
            s.ag = update_ag(s.ag, c, &self.params, dt);
            step_li_rinzel(s, &self.params.li_rinzel, dt);
            let before = s.time_since_release;
            release_adenosine(s, &self.params, dt);
            if s.time_since_release < before {
                self.releases += 1;
            }
        }
    }

    pub fn ado_levels(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.ado).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ag_steps() {
        let p = AstrocyteParams::default();
        assert_eq!(update_ag(0.0, 0, &p, 1e-3), 0.0);
        assert!((update_ag(0.0, 5, &p, 1e-3) - 5e-3).abs() < 1e-15);
        let mut ag = 0.01;
        for _ in 0..1000 {
            ag = update_ag(ag, 0, &p, 1e-3);
        }
        // e⁻¹ · 0.01 = 0.003679
        assert!((ag - 0.003_678_794_411_714_423).abs() < 0.01 * 0.003_678_794);
    }

    #[test]
    fn baseline_fixed_point_below_threshold() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        let mut peak: f64 = 0.0;
        for _ in 0..100_000 {
            step_li_rinzel(&mut s, &p.li_rinzel, 1e-3);
            peak = peak.max(s.ca_cyt);
        }
        assert!(peak < p.thres_ca_ado, "peak {peak}");
        let before = s.ca_cyt;
        step_li_rinzel(&mut s, &p.li_rinzel, 1e-3);
        assert!((s.ca_cyt - before).abs() < 1e-9);
    }

    #[test]
    fn sustained_ag_crosses_threshold() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        let mut crossed = None;
        // Tonic pool firing: 20 neurons at ~40 Hz.
        for k in 0..10_000 {
            s.ag = update_ag(s.ag, if k % 5 == 0 { 4 } else { 0 }, &p, 1e-3);
            step_li_rinzel(&mut s, &p.li_rinzel, 1e-3);
            if s.ca_cyt > p.thres_ca_ado {
                crossed = Some(k);
                break;
            }
        }
        assert!(crossed.is_some());
    }

    #[test]
    fn gate_stays_in_unit_interval() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        let mut rng = crate::rng::RngStream::from_seed(2);
        for _ in 0..1_000_000 {
            s.ag = update_ag(s.ag, (rng.uniform01() * 6.0) as u32, &p, 1e-3);
            step_li_rinzel(&mut s, &p.li_rinzel, 1e-3);
            assert!((0.0..=1.0).contains(&s.gate_h));
            assert!(s.ca_cyt >= 0.0 && s.ip3 >= 0.0);
        }
    }

    #[test]
    fn release_events_respect_refractory() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        s.ca_cyt = 1.0;
        let mut events = Vec::new();
        for k in 0..1000 {
            let before = s.time_since_release;
            // Hold Ca²⁺ above threshold.
            s.ca_cyt = 1.0;
            release_adenosine(&mut s, &p, 1e-3);
            if s.time_since_release < before {
                events.push(k);
            }
        }
        assert_eq!(events, vec![0, 300, 600, 900]);
    }

    #[test]
    fn single_release_amount() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        s.ca_cyt = 0.5;
        assert!((release_adenosine(&mut s, &p, 1e-3) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn subthreshold_ado_decays() {
        let p = AstrocyteParams::default();
        let mut s = AstrocyteState::resting(&p);
        s.ado = 0.05;
        let mut prev = s.ado;
        for _ in 0..5000 {
            let a = release_adenosine(&mut s, &p, 1e-3);
            assert!(a < prev);
            prev = a;
        }
        let exact = 0.05 * (-5.0f64).exp();
        assert!((prev - exact).abs() < 0.01 * 0.05);
    }
}
