//! Plant backends.
//!
//! A backend consumes the 12 joint torques once per control step and returns
//! an [`Observation`]. Two are provided: [`ScriptedBackend`], which replays a
//! configured trajectory for testing the learning loop, and
//! [`SimplifiedQuadruped`], a small rigid-body quadruped with spring-damper
//! ground contact.

mod quadruped;
mod scripted;

pub use quadruped::{PhysicsParams, SimplifiedQuadruped};
pub use scripted::{ScriptedBackend, StubScript};

use serde::{Deserialize, Serialize};

use crate::cpg::{JointLimits, Limb, N_JOINTS, N_LIMBS};
use crate::error::PhysicsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Joint angles, index `limb * 3 + (0 hip | 1 thigh | 2 calf)` (rad).
    pub joint_pos: [f64; N_JOINTS],
    pub joint_vel: [f64; N_JOINTS],
    /// Torso linear velocity in the world frame (m/s).
    pub torso_vel: [f64; 3],
    /// Torso angular velocity about its own roll, pitch, yaw axes (rad/s).
    pub torso_omega: [f64; 3],
    /// Torso local z axis expressed in world coordinates.
    pub torso_z_axis_world: [f64; 3],
    pub torso_pos: [f64; 3],
    /// Torso orientation quaternion `(w, x, y, z)`.
    pub torso_quat: [f64; 4],
    pub foot_contact: [bool; N_LIMBS],
}

impl Default for Observation {
    fn default() -> Self {
        Self {
            joint_pos: [0.0; N_JOINTS],
            joint_vel: [0.0; N_JOINTS],
            torso_vel: [0.0; 3],
            torso_omega: [0.0; 3],
            torso_z_axis_world: [0.0, 0.0, 1.0],
            torso_pos: [0.0; 3],
            torso_quat: [1.0, 0.0, 0.0, 0.0],
            foot_contact: [false; N_LIMBS],
        }
    }
}

impl Observation {
    /// Magnitude of the torso velocity.
    pub fn torso_speed(&self) -> f64 {
        let [x, y, z] = self.torso_vel;
        (x * x + y * y + z * z).sqrt()
    }

    /// Level torso at `altitude` with the legs in the reset pose.
    pub fn standing(limits: &JointLimits, hip_target: f64) -> Self {
        Self::standing_at(limits, hip_target, 0.35)
    }

    pub fn standing_at(limits: &JointLimits, hip_target: f64, altitude: f64) -> Self {
        Self {
            joint_pos: reset_joint_positions(limits, hip_target),
            torso_pos: [0.0, 0.0, altitude],
            ..Self::default()
        }
    }
}

/// `0.7·lower + 0.3·upper`.
pub fn reset_position(limits: (f64, f64)) -> f64 {
    0.7 * limits.0 + 0.3 * limits.1
}

pub fn reset_joint_positions(limits: &JointLimits, hip_target: f64) -> [f64; N_JOINTS] {
    let mut q = [0.0; N_JOINTS];
    for limb in Limb::ALL {
        let i = limb.index() * 3;
        q[i] = hip_target;
        q[i + 1] = reset_position(limits.thigh(limb));
        q[i + 2] = reset_position(limits.calf);
    }
    q
}

/// Torso z axis against world up, inclusive at the threshold.
pub fn alive_indicator(obs: &Observation, threshold: f64) -> bool {
    obs.torso_z_axis_world[2] >= threshold
}

pub trait PhysicsBackend: Send {
    fn reset(&mut self) -> Observation;
    fn step(&mut self, torques: &[f64; N_JOINTS]) -> Result<Observation, PhysicsError>;
}

impl<B: PhysicsBackend + ?Sized> PhysicsBackend for Box<B> {
    fn reset(&mut self) -> Observation {
        (**self).reset()
    }

    fn step(&mut self, torques: &[f64; N_JOINTS]) -> Result<Observation, PhysicsError> {
        (**self).step(torques)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Stub,
    Simplified,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stub" => Ok(Self::Stub),
            "simplified" => Ok(Self::Simplified),
            other => Err(format!("unknown backend `{other}` (expected stub|simplified)")),
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stub => "stub",
            Self::Simplified => "simplified",
        })
    }
}
