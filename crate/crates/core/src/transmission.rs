//! Spiral-guide transmission: servo angle to finger radius and module opening.
//!
//! Each finger pin rides in a spiral guide whose radius falls linearly with
//! servo angle, so all fingers close synchronously. The opening is measured
//! face-to-face between opposing module contact faces.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GraspError, Result};
use crate::math::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransmissionLaw {
    /// Guide radius at 0° servo angle, mm.
    pub r0: f64,
    /// Radius lost per degree of servo rotation, mm/°.
    pub slope: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for TransmissionLaw {
    fn default() -> Self {
        TransmissionLaw {
            r0: 54.0,
            slope: 25.0 / 90.0,
            theta_min: 0.0,
            theta_max: 90.0,
        }
    }
}

impl TransmissionLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.slope > 0.0) {
            return Err(GraspError::invalid("law.slope", "must be positive"));
        }
        if !(self.theta_min < self.theta_max) {
            return Err(GraspError::invalid("law.theta_min", "must be smaller than theta_max"));
        }
        if !(self.r0 > 0.0) {
            return Err(GraspError::invalid("law.r0", "must be positive"));
        }
        Ok(())
    }

    fn check_angle(&self, theta: f64) -> Result<()> {
        if theta >= self.theta_min && theta <= self.theta_max {
            Ok(())
        } else {
            Err(GraspError::OutOfRange {
                what: "servo angle",
                value: theta,
                lo: self.theta_min,
                hi: self.theta_max,
            })
        }
    }

    fn radius_unchecked(&self, theta: f64) -> f64 {
        self.r0 - self.slope * theta
    }
}

/// Radial position of a finger guide pin, mm. Angles outside the law's range
/// are rejected, not clamped.
pub fn finger_radius(theta: f64, law: &TransmissionLaw) -> Result<f64> {
    law.check_angle(theta)?;
    Ok(law.radius_unchecked(theta))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GripperConfig {
    /// 2 or 4 fingers, evenly spaced around the gripper axis.
    pub finger_count: u8,
    pub law: TransmissionLaw,
    /// Guide pin to module contact face, mm. Also the radial distance of the
    /// origami panels, i.e. the half-width of a module face.
    pub module_offset: f64,
    /// Bottom height of each module level in the gripper frame, mm, ordered
    /// bottom to top.
    pub module_levels: Vec<f64>,
    /// Vertical span of one module (the panel span), mm.
    pub module_height: f64,
    /// Undeformed module thickness used for effective strain, mm.
    pub rest_depth: f64,
    /// Hinge-to-contact lever arm for bending contacts, mm.
    pub bend_lever: f64,
    /// Curved surfaces with radius <= `curvature_threshold * module_height`
    /// are grasped in v-enveloping mode.
    pub curvature_threshold: f64,
}

impl Default for GripperConfig {
    fn default() -> Self {
        GripperConfig {
            finger_count: 2,
            law: TransmissionLaw::default(),
            module_offset: 15.0,
            module_levels: vec![0.0, 50.0],
            module_height: 50.0,
            rest_depth: 15.0,
            bend_lever: 30.0,
            curvature_threshold: 1.0,
        }
    }
}

impl GripperConfig {
    pub fn with_fingers(finger_count: u8) -> Self {
        GripperConfig {
            finger_count,
            ..GripperConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        if self.finger_count != 2 && self.finger_count != 4 {
            return Err(GraspError::invalid("finger_count", "must be 2 or 4"));
        }
        if !(self.module_offset >= 0.0) {
            return Err(GraspError::invalid("module_offset", "must be non-negative"));
        }
        if !(self.module_offset < self.law.radius_unchecked(self.law.theta_max)) {
            return Err(GraspError::invalid(
                "module_offset",
                "must be smaller than the finger radius at theta_max",
            ));
        }
        if self.module_levels.is_empty() {
            return Err(GraspError::invalid("module_levels", "needs at least one level"));
        }
        if self.module_levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GraspError::invalid("module_levels", "must be strictly increasing"));
        }
        for (field, v) in [
            ("module_height", self.module_height),
            ("rest_depth", self.rest_depth),
            ("bend_lever", self.bend_lever),
            ("curvature_threshold", self.curvature_threshold),
        ] {
            if !(v > 0.0) {
                return Err(GraspError::invalid(field, "must be positive"));
            }
        }
        Ok(())
    }

    /// Unit vector from the gripper axis toward finger `i`.
    pub fn finger_direction(&self, i: usize) -> Vec2 {
        Vec2::from_angle_deg(360.0 * i as f64 / f64::from(self.finger_count))
    }

    /// Vertical extent `[lo, hi]` of module level `k`.
    pub fn level_span(&self, k: usize) -> (f64, f64) {
        let lo = self.module_levels[k];
        (lo, lo + self.module_height)
    }

    pub fn opening_range(&self) -> (f64, f64) {
        let law = &self.law;
        (
            2.0 * (law.radius_unchecked(law.theta_max) - self.module_offset),
            2.0 * (law.radius_unchecked(law.theta_min) - self.module_offset),
        )
    }
}

/// Face-to-face opening between opposing modules, mm.
pub fn opening(theta: f64, config: &GripperConfig) -> Result<f64> {
    Ok(2.0 * (finger_radius(theta, &config.law)? - config.module_offset))
}

/// Exact inverse of [`opening`].
pub fn theta_for_opening(target: f64, config: &GripperConfig) -> Result<f64> {
    let (min, max) = config.opening_range();
    if !(target >= min && target <= max) {
        return Err(GraspError::OpeningUnreachable { target, min, max });
    }
    let radius = target / 2.0 + config.module_offset;
    let theta = (config.law.r0 - radius) / config.law.slope;
    // Pin the endpoints against rounding so the result is always in range.
    Ok(theta.clamp(config.law.theta_min, config.law.theta_max))
}
