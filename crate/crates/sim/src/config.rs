//! Simulation parameters.

use serde::{Deserialize, Serialize};

use morph_core::{MorphError, Result};

/// Physics and control constants. Control runs at `1/dt` Hz and each
/// control step integrates `substeps` physics substeps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Seconds per control step.
    pub dt: f64,
    /// Physics substeps per control step. The contact damper is explicit,
    /// so the substep rate must keep `damping·dt/m_eff` small for the
    /// lightest contact chain; 16 substeps (480 Hz) holds that margin for
    /// the default skeleton, 4 does not.
    pub substeps: u32,
    /// Gravity magnitude, m/s² (applied along -Z).
    pub gravity: f64,
    /// Ground penalty spring stiffness, N/m.
    pub contact_stiffness: f64,
    /// Ground penalty damping, N·s/m (also the tangential viscosity).
    pub contact_damping: f64,
    /// Coulomb friction coefficient capping tangential force.
    pub friction_coeff: f64,
    /// PD proportional gain, N·m/rad.
    pub pd_kp: f64,
    /// PD derivative gain, N·m·s/rad.
    pub pd_kd: f64,
    /// Joint torque magnitude cap, N·m.
    pub torque_limit: f64,
    /// Rotor inertia added to every actuated degree of freedom, kg·m².
    /// Keeps the point-mass tree's mass matrix positive definite at leaf
    /// joints whose subtree carries no mass.
    pub armature: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1.0 / 30.0,
            substeps: 16,
            gravity: 9.81,
            contact_stiffness: 2.0e4,
            contact_damping: 500.0,
            friction_coeff: 0.9,
            pd_kp: 200.0,
            pd_kd: 20.0,
            torque_limit: 150.0,
            armature: 0.05,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.dt > 0.0
            && self.substeps > 0
            && self.gravity > 0.0
            && self.contact_stiffness > 0.0
            && self.contact_damping > 0.0
            && self.friction_coeff > 0.0
            && self.pd_kp > 0.0
            && self.pd_kd > 0.0
            && self.torque_limit > 0.0
            && self.armature > 0.0;
        if !all_positive {
            return Err(MorphError::InvalidInput(
                "all simulation parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Checked at rollout setup: one control step must span exactly one
    /// motion frame.
    pub fn check_fps(&self, fps: u32) -> Result<()> {
        let frame_dt = 1.0 / fps as f64;
        if (self.dt - frame_dt).abs() > 1e-9 {
            return Err(MorphError::InvalidInput(format!(
                "control dt {} does not match motion frame time {} (fps {})",
                self.dt, frame_dt, fps
            )));
        }
        Ok(())
    }

    pub fn substep_dt(&self) -> f64 {
        self.dt / self.substeps as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_30hz() {
        let c = SimConfig::default();
        c.validate().unwrap();
        c.check_fps(30).unwrap();
        assert!(c.check_fps(60).is_err());
    }
}
