use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::MotionFrame;
use crate::error::{Error, Result};
use crate::geometry::{quat_sub, UnitQuat, Vec3};
use crate::math::{exp, sqrt};

/// Joint deviation (m) beyond which a tracking episode terminates.
pub const TERMINATION_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_p: f64,
    pub w_r: f64,
    pub w_v: f64,
    pub w_omega: f64,
    pub w_h: f64,
    pub w_e: f64,
    pub alpha_p: f64,
    pub alpha_r: f64,
    pub alpha_v: f64,
    pub alpha_omega: f64,
    pub alpha_h: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w_p: 2.5,
            w_r: 1.5,
            w_v: 0.5,
            w_omega: 0.5,
            w_h: 1.0,
            w_e: 0.001,
            alpha_p: 1.5,
            alpha_r: 0.3,
            alpha_v: 0.12,
            alpha_omega: 0.05,
            alpha_h: 20.0,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.w_p, self.w_r, self.w_v, self.w_omega, self.w_h, self.w_e, self.alpha_p, self.alpha_r, self.alpha_v,
            self.alpha_omega, self.alpha_h,
        ];
        if all.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidConfig("reward weights must be finite and non-negative"))
        }
    }
}

/// How the energy term enters the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySign {
    /// Subtracted, as a penalty.
    #[default]
    Penalty,
    /// Added, as literally printed in the reward formula.
    Printed,
}

/// Per-joint torque and joint velocity for the energy term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointEffort {
    pub torque: Vec3,
    pub velocity: Vec3,
}

fn stacked(it: impl Iterator<Item = f64>) -> f64 {
    sqrt(it.map(|x| x * x).sum::<f64>())
}

/// Motion-tracking reward of a simulated state against its reference.
///
/// Each error channel stacks per-joint errors into one Euclidean norm; the
/// rotation channel uses the angle of each joint's quaternion difference.
/// Root height is the z coordinate of the root translation.
pub fn tracking_reward(
    sim: &MotionFrame,
    reference: &MotionFrame,
    effort: &[JointEffort],
    weights: &RewardWeights,
    sign: EnergySign,
) -> Result<f64> {
    if sim.joints.len() != reference.joints.len() {
        return Err(Error::LengthMismatch(sim.joints.len(), reference.joints.len()));
    }
    let pairs = || sim.joints.iter().zip(&reference.joints);
    let e_p = stacked(pairs().flat_map(|(s, r)| (r.position - s.position).to_array()));
    let e_r = stacked(pairs().map(|(s, r)| quat_sub(r.orientation, s.orientation).angle()));
    let e_v = stacked(pairs().flat_map(|(s, r)| (r.linear_velocity - s.linear_velocity).to_array()));
    let e_w = stacked(pairs().flat_map(|(s, r)| (r.angular_velocity - s.angular_velocity).to_array()));
    let e_h = (reference.root.translation.z - sim.root.translation.z).abs();
    let energy: f64 = effort
        .iter()
        .map(|j| {
            let p = Vec3::new(
                j.torque.x * j.velocity.x,
                j.torque.y * j.velocity.y,
                j.torque.z * j.velocity.z,
            );
            p.norm()
        })
        .sum();
    let w = weights;
    let tracking = w.w_p * exp(-w.alpha_p * e_p)
        + w.w_r * exp(-w.alpha_r * e_r)
        + w.w_v * exp(-w.alpha_v * e_v)
        + w.w_omega * exp(-w.alpha_omega * e_w)
        + w.w_h * exp(-w.alpha_h * e_h);
    Ok(match sign {
        EnergySign::Penalty => tracking - w.w_e * energy,
        EnergySign::Printed => tracking + w.w_e * energy,
    })
}

/// True iff some joint is more than 0.5 m from its reference position.
pub fn early_termination_check(sim: &MotionFrame, reference: &MotionFrame) -> Result<bool> {
    if sim.joints.len() != reference.joints.len() {
        return Err(Error::LengthMismatch(sim.joints.len(), reference.joints.len()));
    }
    Ok(sim
        .joints
        .iter()
        .zip(&reference.joints)
        .any(|(s, r)| s.position.distance(r.position) > TERMINATION_DISTANCE))
}

/// Policy observation: current state and future targets, both expressed in
/// the frame of the simulated root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Features {
    /// Per joint, 13 values: `θ_j ⊖ θ_root` (w, x, y, z), root-frame
    /// position relative to the root (3), root-frame linear (3) and angular
    /// (3) velocity.
    pub state: Vec<f64>,
    /// Per target and joint, 14 values: `θ̂_j ⊖ θ_j` (4), `θ̂_j ⊖ θ_root`
    /// (4), root-frame `p̂_j − p_j` (3), root-frame `p̂_j − p_root` (3).
    pub goal: Vec<f64>,
}

pub const STATE_FEATURES_PER_JOINT: usize = 13;
pub const GOAL_FEATURES_PER_JOINT: usize = 14;

pub fn featurize(sim: &MotionFrame, targets: &[MotionFrame]) -> Result<Features> {
    if targets.is_empty() {
        return Err(Error::EmptySet("featurize needs at least one target"));
    }
    let root_q = sim.root.rotation;
    let root_p = sim.root.translation;
    let local = |v: Vec3| root_q.inverse_rotate(v).to_array();
    let quat = |q: UnitQuat| q.to_array();
    let mut state = Vec::with_capacity(sim.joints.len() * STATE_FEATURES_PER_JOINT);
    for j in &sim.joints {
        state.extend(quat(quat_sub(j.orientation, root_q)));
        state.extend(local(j.position - root_p));
        state.extend(local(j.linear_velocity));
        state.extend(local(j.angular_velocity));
    }
    let mut goal = Vec::with_capacity(targets.len() * sim.joints.len() * GOAL_FEATURES_PER_JOINT);
    for tgt in targets {
        if tgt.joints.len() != sim.joints.len() {
            return Err(Error::LengthMismatch(tgt.joints.len(), sim.joints.len()));
        }
        for (t, s) in tgt.joints.iter().zip(&sim.joints) {
            goal.extend(quat(quat_sub(t.orientation, s.orientation)));
            goal.extend(quat(quat_sub(t.orientation, root_q)));
            goal.extend(local(t.position - s.position));
            goal.extend(local(t.position - root_p));
        }
    }
    Ok(Features { state, goal })
}
