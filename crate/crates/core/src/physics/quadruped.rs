//! Simplified quadruped plant.
//!
//! A single rigid torso carries the whole robot mass. Each leg is a massless
//! hip-abduction / thigh / calf chain whose joints have an effective reflected
//! inertia and dry friction. Feet, knees and the torso box corners touch the
//! ground through spring-damper normal forces and regularized Coulomb
//! friction. A contact force on a leg point loads the torso at that point and
//! the leg joints through the transposed point Jacobian.
//!
//! Thigh and calf rotate about the body y axis; a positive thigh angle swings
//! the knee backwards, a positive calf angle extends the knee. Hip angles are
//! mirrored so that a positive value abducts any leg outward.

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{reset_joint_positions, Observation, PhysicsBackend};
use crate::cpg::{JointLimits, Limb, N_JOINTS, N_LIMBS};
use crate::error::{ConfigError, PhysicsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub gravity: f64,
    pub torso_mass: f64,
    /// Principal torso inertia (kg·m²) about body x, y, z.
    pub torso_inertia: [f64; 3],
    /// Half extents of the torso collision box (m).
    pub torso_half_extents: [f64; 3],
    /// Whole-robot centre of mass relative to the torso frame origin (m).
    /// Legs are massless, so this stands in for their weight hanging below
    /// and behind the hips.
    pub com_offset: [f64; 3],
    /// Rotational drag on the torso (N·m·s/rad), standing in for the
    /// damping of the swinging leg masses.
    pub torso_angular_damping: f64,
    /// Hip joint position in the body frame, `(±x, ±y)` magnitudes.
    pub hip_offset: [f64; 2],
    /// Lateral offset from the hip joint to the thigh plane.
    pub thigh_offset: f64,
    pub thigh_length: f64,
    pub calf_length: f64,
    /// Effective joint inertia (kg·m²) for hip, thigh and calf.
    pub joint_inertia: [f64; 3],
    /// Dry-friction torque magnitude (N·m) for hip, thigh and calf.
    pub frictionloss: [f64; 3],
    /// Viscous joint damping (N·m·s/rad) for hip, thigh and calf.
    pub joint_damping: [f64; 3],
    /// Actuator saturation (N·m).
    pub max_torque: f64,
    pub hip_limits: (f64, f64),
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction_mu: f64,
    /// Slip-velocity gain of the regularized friction (N·s/m).
    pub friction_viscous: f64,
    pub initial_altitude: f64,
    pub hip_target: f64,
    /// Control step (s).
    pub dt: f64,
    /// Integration substeps per control step.
    pub substeps: usize,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            torso_mass: 12.0,
            torso_inertia: [0.2, 0.35, 0.4],
            torso_half_extents: [0.1335, 0.097, 0.057],
            com_offset: [-0.03, 0.0, -0.06],
            torso_angular_damping: 0.0,
            hip_offset: [0.183, 0.047],
            thigh_offset: 0.0838,
            thigh_length: 0.2,
            calf_length: 0.2,
            joint_inertia: [0.05, 0.05, 0.05],
            frictionloss: [10.0, 25.0, 10.0],
            joint_damping: [2.0; 3],
            max_torque: 33.5,
            hip_limits: (-0.8, 0.8),
            contact_stiffness: 5000.0,
            contact_damping: 300.0,
            friction_mu: 0.8,
            friction_viscous: 2000.0,
            initial_altitude: 0.35,
            hip_target: 0.1,
            dt: 1e-3,
            substeps: 10,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("physics.torso_mass", self.torso_mass),
            ("physics.contact_stiffness", self.contact_stiffness),
            ("physics.contact_damping", self.contact_damping),
            ("physics.thigh_length", self.thigh_length),
            ("physics.calf_length", self.calf_length),
            ("physics.dt", self.dt),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(ConfigError::invalid(k, "must be positive"));
            }
        }
        if self.torso_inertia.iter().chain(&self.joint_inertia).any(|&v| !(v > 0.0)) {
            return Err(ConfigError::invalid("physics.inertia", "inertias must be positive"));
        }
        if self.substeps == 0 {
            return Err(ConfigError::invalid("physics.substeps", "must be >= 1"));
        }
        Ok(())
    }
}

/// Leg geometry constants for one limb.
#[derive(Debug, Clone, Copy)]
struct LegFrame {
    hip: Vector3<f64>,
    /// +1 for left legs, −1 for right legs.
    side: f64,
}

/// Point on a leg: its body-frame position and the 3×3 Jacobian with respect
/// to `(hip, thigh, calf)`.
struct LegPoint {
    pos: Vector3<f64>,
    jac: Matrix3<f64>,
}

#[derive(Debug, Clone)]
pub struct SimplifiedQuadruped {
    pub params: PhysicsParams,
    limits: JointLimits,
    legs: [LegFrame; N_LIMBS],
    corners: Vec<Vector3<f64>>,
    // Torso state, at the centre of mass.
    pos: Vector3<f64>,
    rot: UnitQuaternion<f64>,
    vel: Vector3<f64>,
    /// Body-frame angular velocity.
    omega: Vector3<f64>,
    q: [f64; N_JOINTS],
    qd: [f64; N_JOINTS],
    contact: [bool; N_LIMBS],
    steps: u64,
}

impl SimplifiedQuadruped {
    pub fn new(params: PhysicsParams, limits: JointLimits) -> Self {
        let [hx, hy] = params.hip_offset;
        let com = Vector3::from(params.com_offset);
        let legs = Limb::ALL.map(|limb| {
            let sx = if limb.is_front() { 1.0 } else { -1.0 };
            let side = if limb.is_left() { 1.0 } else { -1.0 };
            LegFrame {
                hip: Vector3::new(sx * hx, side * hy, 0.0) - com,
                side,
            }
        });
        let [ex, ey, ez] = params.torso_half_extents;
        let mut corners = Vec::with_capacity(8);
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    corners.push(Vector3::new(sx * ex, sy * ey, sz * ez) - com);
                }
            }
        }
        let mut s = Self {
            params,
            limits,
            legs,
            corners,
            pos: Vector3::zeros(),
            rot: UnitQuaternion::identity(),
            vel: Vector3::zeros(),
            omega: Vector3::zeros(),
            q: [0.0; N_JOINTS],
            qd: [0.0; N_JOINTS],
            contact: [false; N_LIMBS],
            steps: 0,
        };
        s.reset();
        s
    }

    fn joint_range(&self, j: usize) -> (f64, f64) {
        let limb = Limb::from_index(j / 3);
        match j % 3 {
            0 => self.params.hip_limits,
            1 => self.limits.thigh(limb),
            _ => self.limits.calf,
        }
    }

    /// Body-frame knee and foot of `leg` with their Jacobians.
    fn leg_points(&self, leg: usize) -> (LegPoint, LegPoint) {
        let p = &self.params;
        let frame = self.legs[leg];
        let s = frame.side;
        let (hip, q1, q2) = (self.q[leg * 3], self.q[leg * 3 + 1], self.q[leg * 3 + 2]);
        let phi = s * hip;
        let (sp, cp) = phi.sin_cos();
        let (s1, c1) = q1.sin_cos();
        let (s12, c12) = (q1 + q2).sin_cos();
        let (l1, l2, a) = (p.thigh_length, p.calf_length, p.thigh_offset);

        let rot_x = |v: Vector3<f64>| Vector3::new(v.x, v.y * cp - v.z * sp, v.y * sp + v.z * cp);
        let drot_x = |v: Vector3<f64>| Vector3::new(0.0, -v.y * sp - v.z * cp, v.y * cp - v.z * sp);

        let knee_leg = Vector3::new(-l1 * s1, s * a, -l1 * c1);
        let foot_leg = Vector3::new(-l1 * s1 - l2 * s12, s * a, -l1 * c1 - l2 * c12);
        let dknee_dq1 = Vector3::new(-l1 * c1, 0.0, l1 * s1);
        let dfoot_dq1 = Vector3::new(-l1 * c1 - l2 * c12, 0.0, l1 * s1 + l2 * s12);
        let dfoot_dq2 = Vector3::new(-l2 * c12, 0.0, l2 * s12);

        let knee = LegPoint {
            pos: frame.hip + rot_x(knee_leg),
            jac: Matrix3::from_columns(&[s * drot_x(knee_leg), rot_x(dknee_dq1), Vector3::zeros()]),
        };
        let foot = LegPoint {
            pos: frame.hip + rot_x(foot_leg),
            jac: Matrix3::from_columns(&[s * drot_x(foot_leg), rot_x(dfoot_dq1), rot_x(dfoot_dq2)]),
        };
        (knee, foot)
    }

    /// Body-frame foot position of every leg (forward kinematics).
    pub fn foot_positions_body(&self) -> [Vector3<f64>; N_LIMBS] {
        std::array::from_fn(|leg| self.leg_points(leg).1.pos)
    }

    /// World-frame foot positions; the same code path the contact model uses.
    pub fn foot_positions_world(&self) -> [Vector3<f64>; N_LIMBS] {
        self.foot_positions_body().map(|f| self.pos + self.rot * f)
    }

    /// Ground reaction at a point with world position `x` and velocity `v`.
    fn contact_force(&self, x: &Vector3<f64>, v: &Vector3<f64>) -> Option<Vector3<f64>> {
        if x.z >= 0.0 {
            return None;
        }
        let p = &self.params;
        let depth = -x.z;
        let fn_ = (p.contact_stiffness * depth - p.contact_damping * v.z).max(0.0);
        let vt = Vector3::new(v.x, v.y, 0.0);
        let slip = vt.norm();
        let ft = if slip > 0.0 {
            -vt * ((p.friction_viscous * slip).min(p.friction_mu * fn_) / slip)
        } else {
            Vector3::zeros()
        };
        Some(Vector3::new(ft.x, ft.y, fn_))
    }

    fn substep(&mut self, torques: &[f64; N_JOINTS], h: f64) {
        let p = self.params.clone();
        let rot = self.rot;
        let rot_t = rot.inverse();
        let mut force = Vector3::new(0.0, 0.0, -p.torso_mass * p.gravity);
        let mut moment = Vector3::zeros();
        let mut joint_tau = [0.0; N_JOINTS];
        for j in 0..N_JOINTS {
            joint_tau[j] = torques[j].clamp(-p.max_torque, p.max_torque);
        }

        for leg in 0..N_LIMBS {
            let (knee, foot) = self.leg_points(leg);
            let qd = Vector3::new(self.qd[leg * 3], self.qd[leg * 3 + 1], self.qd[leg * 3 + 2]);
            self.contact[leg] = false;
            for (k, pt) in [knee, foot].into_iter().enumerate() {
                let x = self.pos + rot * pt.pos;
                let v_body = self.omega.cross(&pt.pos) + pt.jac * qd;
                let v = self.vel + rot * v_body;
                if let Some(f) = self.contact_force(&x, &v) {
                    let f_body = rot_t * f;
                    force += f;
                    moment += pt.pos.cross(&f_body);
                    let tau = pt.jac.transpose() * f_body;
                    for i in 0..3 {
                        joint_tau[leg * 3 + i] += tau[i];
                    }
                    if k == 1 {
                        self.contact[leg] = true;
                    }
                }
            }
        }
        for c in &self.corners {
            let x = self.pos + rot * c;
            let v = self.vel + rot * self.omega.cross(c);
            if let Some(f) = self.contact_force(&x, &v) {
                force += f;
                moment += c.cross(&(rot_t * f));
            }
        }

        // Torso: semi-implicit Euler.
        let inertia = Vector3::from(p.torso_inertia);
        let i_omega = inertia.component_mul(&self.omega);
        let alpha = (moment - self.omega.cross(&i_omega)).component_div(&inertia);
        self.vel += h * force / p.torso_mass;
        self.omega += h * alpha;
        self.omega = self
            .omega
            .component_div(&inertia.map(|i| 1.0 + h * p.torso_angular_damping / i));
        self.pos += h * self.vel;
        self.rot *= UnitQuaternion::from_scaled_axis(self.omega * h);

        // Joints: implicit dry friction, then hard limits.
        for j in 0..N_JOINTS {
            let inertia = p.joint_inertia[j % 3];
            let fric = p.frictionloss[j % 3] * h / inertia / (1.0 + h * p.joint_damping[j % 3] / inertia);
            let damp = 1.0 + h * p.joint_damping[j % 3] / inertia;
            let free = (self.qd[j] + h * joint_tau[j] / inertia) / damp;
            self.qd[j] = if free.abs() <= fric { 0.0 } else { free - fric * free.signum() };
            self.q[j] += h * self.qd[j];
            let (lo, hi) = self.joint_range(j);
            if self.q[j] < lo {
                self.q[j] = lo;
                self.qd[j] = self.qd[j].max(0.0);
            } else if self.q[j] > hi {
                self.q[j] = hi;
                self.qd[j] = self.qd[j].min(0.0);
            }
        }
    }

    fn check_finite(&self) -> Result<(), PhysicsError> {
        let bad = |what: &str| PhysicsError::Divergence {
            step: self.steps,
            what: what.to_string(),
        };
        if !self.pos.iter().chain(self.vel.iter()).chain(self.omega.iter()).all(|v| v.is_finite()) {
            return Err(bad("non-finite torso state"));
        }
        if !self.q.iter().chain(&self.qd).all(|v| v.is_finite()) {
            return Err(bad("non-finite joint state"));
        }
        if self.vel.norm() > 100.0 || self.omega.norm() > 1000.0 {
            return Err(bad("torso velocity out of range"));
        }
        Ok(())
    }

    pub fn observation(&self) -> Observation {
        let z = self.rot * Vector3::z();
        let origin = -Vector3::from(self.params.com_offset);
        let pos = self.pos + self.rot * origin;
        let vel = self.vel + self.rot * self.omega.cross(&origin);
        let q = self.rot.quaternion();
        Observation {
            joint_pos: self.q,
            joint_vel: self.qd,
            torso_vel: vel.into(),
            torso_omega: self.omega.into(),
            torso_z_axis_world: z.into(),
            torso_pos: pos.into(),
            torso_quat: [q.w, q.i, q.j, q.k],
            foot_contact: self.contact,
        }
    }

    /// Kinetic + gravitational + contact-spring energy.
    pub fn mechanical_energy(&self) -> f64 {
        let p = &self.params;
        let inertia = Vector3::from(p.torso_inertia);
        let mut e = 0.5 * p.torso_mass * self.vel.norm_squared()
            + 0.5 * self.omega.dot(&inertia.component_mul(&self.omega))
            + p.torso_mass * p.gravity * self.pos.z;
        for j in 0..N_JOINTS {
            e += 0.5 * p.joint_inertia[j % 3] * self.qd[j] * self.qd[j];
        }
        let mut spring = |x: Vector3<f64>| {
            if x.z < 0.0 {
                e += 0.5 * p.contact_stiffness * x.z * x.z;
            }
        };
        for leg in 0..N_LIMBS {
            let (k, f) = self.leg_points(leg);
            spring(self.pos + self.rot * k.pos);
            spring(self.pos + self.rot * f.pos);
        }
        for c in &self.corners {
            spring(self.pos + self.rot * c);
        }
        e
    }

    /// Place the torso at an arbitrary pose (tests and scripted starts).
    pub fn set_torso(&mut self, pos: [f64; 3], roll_pitch_yaw: [f64; 3]) {
        self.rot = UnitQuaternion::from_euler_angles(roll_pitch_yaw[0], roll_pitch_yaw[1], roll_pitch_yaw[2]);
        self.pos = Vector3::from(pos) + self.rot * Vector3::from(self.params.com_offset);
    }
}

impl PhysicsBackend for SimplifiedQuadruped {
    fn reset(&mut self) -> Observation {
        self.pos = Vector3::new(0.0, 0.0, self.params.initial_altitude) + Vector3::from(self.params.com_offset);
        self.rot = UnitQuaternion::identity();
        self.vel = Vector3::zeros();
        self.omega = Vector3::zeros();
        self.q = reset_joint_positions(&self.limits, self.params.hip_target);
        self.qd = [0.0; N_JOINTS];
        self.contact = [false; N_LIMBS];
        self.steps = 0;
        self.observation()
    }

    fn step(&mut self, torques: &[f64; N_JOINTS]) -> Result<Observation, PhysicsError> {
        if torques.iter().any(|t| !t.is_finite()) {
            return Err(PhysicsError::Divergence {
                step: self.steps,
                what: "non-finite torque command".into(),
            });
        }
        let h = self.params.dt / self.params.substeps as f64;
        for _ in 0..self.params.substeps {
            self.substep(torques, h);
        }
        self.steps += 1;
        self.check_finite()?;
        Ok(self.observation())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::alive_indicator;

    fn plant() -> SimplifiedQuadruped {
        SimplifiedQuadruped::new(PhysicsParams::default(), JointLimits::default())
    }

    #[test]
    fn reset_pose() {
        let mut p = plant();
        let o = p.reset();
        assert_eq!(o.torso_z_axis_world, [0.0, 0.0, 1.0]);
        assert_eq!(o.torso_pos[2], 0.35);
        assert!((o.joint_pos[1] - 0.84).abs() < 1e-12);
        assert!((o.joint_pos[2] + 1.42).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut p = plant();
        p.reset();
        p.q = [0.2, 1.0, -1.3, -0.1, 0.8, -1.5, 0.3, 1.2, -1.1, 0.0, 0.9, -1.4];
        let eps = 1e-6;
        for leg in 0..4 {
            let (knee, foot) = p.leg_points(leg);
            for i in 0..3 {
                let mut pp = p.clone();
                pp.q[leg * 3 + i] += eps;
                let (k2, f2) = pp.leg_points(leg);
                let dk = (k2.pos - knee.pos) / eps;
                let df = (f2.pos - foot.pos) / eps;
                assert!((dk - knee.jac.column(i)).norm() < 1e-5);
                assert!((df - foot.jac.column(i)).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn standing_foot_below_hip() {
        let mut p = plant();
        p.reset();
        p.q[0] = 0.0;
        p.q[1] = 0.9;
        p.q[2] = -1.8;
        // Leg points are relative to the centre of mass.
        let f = p.leg_points(0).1.pos + Vector3::from(p.params.com_offset);
        assert!((f.x - 0.183).abs() < 1e-9);
        assert!((f.z + 0.4 * 0.9f64.cos()).abs() < 1e-9);
        assert!(f.y < 0.0);
    }

    #[test]
    fn zero_torque_settles_alive() {
        let mut p = plant();
        p.reset();
        for _ in 0..3000 {
            let o = p.step(&[0.0; 12]).unwrap();
            assert!(alive_indicator(&o, 0.5));
        }
        let o = p.observation();
        assert!(o.torso_pos[2] > 0.15, "torso height {}", o.torso_pos[2]);
        assert!(o.torso_speed() < 0.05);
    }

    #[test]
    fn energy_non_increasing_without_torque() {
        let mut p = plant();
        p.reset();
        let mut prev = p.mechanical_energy();
        let e0 = prev;
        for k in 0..3000 {
            p.step(&[0.0; 12]).unwrap();
            if k % 50 == 49 {
                let e = p.mechanical_energy();
                assert!(e <= prev + 1e-3 * e0.abs(), "energy rose at step {k}: {prev} -> {e}");
                prev = e;
            }
        }
        assert!(prev < e0);
    }

    #[test]
    fn extensor_torque_drives_thigh_to_upper_limit() {
        let mut p = plant();
        p.reset();
        p.set_torso([0.0, 0.0, 2.0], [0.0; 3]);
        let mut tau = [0.0; 12];
        for l in 0..4 {
            tau[l * 3 + 1] = 33.5;
        }
        for _ in 0..300 {
            p.step(&tau).unwrap();
        }
        let o = p.observation();
        assert!((o.joint_pos[1] - 1.4).abs() < 1e-3);
        assert!((o.joint_pos[7] - 1.5).abs() < 1e-3);
    }

    #[test]
    fn joint_limits_hold() {
        let mut p = plant();
        p.reset();
        let tau = [100.0, -100.0, 100.0, -100.0, 100.0, -100.0, 100.0, -100.0, 100.0, -100.0, 100.0, -100.0];
        for _ in 0..2000 {
            let o = p.step(&tau).unwrap();
            for j in 0..12 {
                let (lo, hi) = p.joint_range(j);
                assert!(o.joint_pos[j] >= lo - 1e-3 && o.joint_pos[j] <= hi + 1e-3);
            }
        }
    }

    #[test]
    fn rolled_torso_is_not_alive() {
        let mut p = plant();
        p.reset();
        p.set_torso([0.0, 0.0, 0.35], [61f64.to_radians(), 0.0, 0.0]);
        assert!(!alive_indicator(&p.observation(), 0.5));
    }

    #[test]
    fn kinematics_single_code_path() {
        let mut p = plant();
        p.reset();
        let world = p.foot_positions_world();
        for leg in 0..4 {
            let f = p.pos + p.rot * p.leg_points(leg).1.pos;
            assert_eq!(world[leg], f);
        }
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut p = plant();
            p.reset();
            let mut out = Vec::new();
            for k in 0..500 {
                let t = (k as f64 * 0.05).sin() * 30.0;
                let o = p.step(&[0.0, t, -t, 0.0, -t, t, 0.0, t, t, 0.0, -t, -t]).unwrap();
                out.push(o);
            }
            out
        };
        assert_eq!(run(), run());
    }
}
