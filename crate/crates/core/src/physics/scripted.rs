use serde::{Deserialize, Serialize};

use super::{Observation, PhysicsBackend};
use crate::cpg::{JointLimits, N_JOINTS};
use crate::error::PhysicsError;

/// Observation script for [`ScriptedBackend`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StubScript {
    /// Constant forward speed and angular rates. If `topple_after` is set,
    /// the torso lies on its side for every step strictly after that time.
    Steady {
        vel_x: f64,
        omega: [f64; 3],
        topple_after: Option<f64>,
    },
    /// Replay a recorded trajectory, holding the last frame.
    Replay(Vec<Observation>),
}

impl Default for StubScript {
    fn default() -> Self {
        Self::Steady {
            vel_x: 1.0,
            omega: [0.0; 3],
            topple_after: None,
        }
    }
}

/// Replays observations; torques are recorded but have no effect.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    script: StubScript,
    base: Observation,
    dt: f64,
    step: u64,
    pub last_torques: [f64; N_JOINTS],
}

impl ScriptedBackend {
    pub fn new(script: StubScript, limits: &JointLimits, hip_target: f64, dt: f64) -> Self {
        Self {
            script,
            base: Observation::standing(limits, hip_target),
            dt,
            step: 0,
            last_torques: [0.0; N_JOINTS],
        }
    }

    fn frame(&self) -> Observation {
        match &self.script {
            StubScript::Steady {
                vel_x,
                omega,
                topple_after,
            } => {
                let mut o = self.base.clone();
                o.torso_vel = [*vel_x, 0.0, 0.0];
                o.torso_omega = *omega;
                o.torso_pos[0] = vel_x * self.step as f64 * self.dt;
                if let Some(t) = topple_after {
                    let topple_step = (t / self.dt).round() as u64;
                    if self.step > topple_step {
                        o.torso_z_axis_world = [0.0, 1.0, 0.0];
                        o.torso_quat = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0, 0.0];
                    }
                }
                o
            }
            StubScript::Replay(frames) => {
                if frames.is_empty() {
                    self.base.clone()
                } else {
                    frames[(self.step as usize).min(frames.len() - 1)].clone()
                }
            }
        }
    }
}

impl PhysicsBackend for ScriptedBackend {
    fn reset(&mut self) -> Observation {
        self.step = 0;
        self.last_torques = [0.0; N_JOINTS];
        self.frame()
    }

    fn step(&mut self, torques: &[f64; N_JOINTS]) -> Result<Observation, PhysicsError> {
        self.last_torques = *torques;
        self.step += 1;
        Ok(self.frame())
    }
}
