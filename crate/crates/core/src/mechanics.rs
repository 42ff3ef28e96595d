//! Phenomenological constitutive curves for one origami module.
//!
//! Both curves share the same shape: a linear loading ramp up to the start of
//! the effective range, a flat plateau across it, and an out-of-range branch.
//! Compression stiffens past `strain_hi`; bending holds the plateau torque
//! past `angle_hi` and raises an overfold flag instead.
//!
//! The deviation bands are tolerances on the measured plateaus. Nominal curves
//! are deterministic; [`MaterialModel::scaled`] is the hook for perturbing a
//! material inside its band.

use alloc::string::String;

use crate::error::{GraspError, Result};

/// Multiplier converting the configured torque values to N·mm.
///
/// Measured torques are reported as "39" and "9.5" in N·m, which is far too
/// large for a 30 mm module; the default reads them as N·mm.
pub const DEFAULT_TORQUE_UNIT_SCALE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaterialModel {
    pub name: String,
    /// Plateau compression force, N.
    pub plateau_force: f64,
    /// Fractional half-width of the compression plateau band.
    pub force_band: f64,
    pub strain_lo: f64,
    pub strain_hi: f64,
    /// Plateau bending torque, in configured torque units.
    pub plateau_torque: f64,
    pub torque_band: f64,
    /// Degrees.
    pub angle_lo: f64,
    pub angle_hi: f64,
    /// Stiffness past `strain_hi`, N per unit strain.
    pub overload_stiffness: f64,
}

impl MaterialModel {
    /// Builds a material with the default effective ranges and an overload
    /// stiffness of ten times the mean loading-ramp slope.
    pub fn with_plateaus(
        name: &str,
        plateau_force: f64,
        force_band: f64,
        plateau_torque: f64,
        torque_band: f64,
    ) -> Self {
        let strain_lo = 0.1;
        MaterialModel {
            name: name.into(),
            plateau_force,
            force_band,
            strain_lo,
            strain_hi: 0.5,
            plateau_torque,
            torque_band,
            angle_lo: 5.0,
            angle_hi: 25.0,
            overload_stiffness: 10.0 * plateau_force / strain_lo,
        }
    }

    /// 3D-printed TPU, Shore 95A: 4.5–5 N compression band, 39 ±5 % torque.
    pub fn tpu95a() -> Self {
        Self::with_plateaus("TPU95A", 4.75, 0.25 / 4.75, 39.0, 0.05)
    }

    /// Cast Smooth-Sil 950 silicone: 1 N compression, 9.5 ±3 % torque.
    pub fn sil950() -> Self {
        Self::with_plateaus("SIL950", 1.0, 0.03, 9.5, 0.03)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "TPU95A" => Some(Self::tpu95a()),
            "SIL950" => Some(Self::sil950()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.strain_lo && self.strain_lo < self.strain_hi) {
            return Err(GraspError::invalid("strain_lo", "need 0 < strain_lo < strain_hi"));
        }
        if !(0.0 < self.angle_lo && self.angle_lo < self.angle_hi) {
            return Err(GraspError::invalid("angle_lo", "need 0 < angle_lo < angle_hi"));
        }
        if !(self.plateau_force > 0.0) {
            return Err(GraspError::invalid("plateau_force", "must be positive"));
        }
        if !(self.plateau_torque > 0.0) {
            return Err(GraspError::invalid("plateau_torque", "must be positive"));
        }
        if !(0.0..=0.2).contains(&self.force_band) {
            return Err(GraspError::invalid("force_band", "must lie in [0, 0.2]"));
        }
        if !(0.0..=0.2).contains(&self.torque_band) {
            return Err(GraspError::invalid("torque_band", "must lie in [0, 0.2]"));
        }
        if !(self.overload_stiffness >= 0.0) {
            return Err(GraspError::invalid("overload_stiffness", "must be non-negative"));
        }
        Ok(())
    }

    /// Plateau force band `[lo, hi]`, N.
    pub fn force_bounds(&self) -> (f64, f64) {
        (
            self.plateau_force * (1.0 - self.force_band),
            self.plateau_force * (1.0 + self.force_band),
        )
    }

    pub fn torque_bounds(&self) -> (f64, f64) {
        (
            self.plateau_torque * (1.0 - self.torque_band),
            self.plateau_torque * (1.0 + self.torque_band),
        )
    }

    /// Copy with both plateaus multiplied by the given factors. Factors must
    /// keep the plateau inside its deviation band.
    pub fn scaled(&self, force_factor: f64, torque_factor: f64) -> Result<Self> {
        if !((force_factor - 1.0).abs() <= self.force_band + 1e-12) {
            return Err(GraspError::OutOfRange {
                what: "force factor",
                value: force_factor,
                lo: 1.0 - self.force_band,
                hi: 1.0 + self.force_band,
            });
        }
        if !((torque_factor - 1.0).abs() <= self.torque_band + 1e-12) {
            return Err(GraspError::OutOfRange {
                what: "torque factor",
                value: torque_factor,
                lo: 1.0 - self.torque_band,
                hi: 1.0 + self.torque_band,
            });
        }
        let mut m = self.clone();
        m.plateau_force *= force_factor;
        m.plateau_torque *= torque_factor;
        m.overload_stiffness *= force_factor;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionResponse {
    pub force: f64,
    /// Strain above 1: the module is pressed past its own thickness.
    pub overcompressed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingResponse {
    pub torque: f64,
    /// Bend angle beyond the stable range.
    pub overfolded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendingForce {
    pub force: f64,
    pub overfolded: bool,
}

/// Face penetration over rest depth.
pub fn effective_strain(penetration: f64, rest_depth: f64) -> Result<f64> {
    if !(rest_depth > 0.0) {
        return Err(GraspError::invalid("rest_depth", "must be positive"));
    }
    if !(penetration >= 0.0) {
        return Err(GraspError::OutOfRange {
            what: "penetration",
            value: penetration,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(penetration / rest_depth)
}

/// Compression force for a non-negative strain. Negative strain is treated as
/// unloaded.
pub fn compression_force(strain: f64, material: &MaterialModel) -> CompressionResponse {
    let m = material;
    let force = if strain <= 0.0 {
        0.0
    } else if strain < m.strain_lo {
        m.plateau_force * strain / m.strain_lo
    } else if strain <= m.strain_hi {
        m.plateau_force
    } else {
        m.plateau_force + m.overload_stiffness * (strain - m.strain_hi)
    };
    CompressionResponse {
        force,
        overcompressed: strain > 1.0,
    }
}

pub fn bending_torque(angle: f64, material: &MaterialModel) -> Result<BendingResponse> {
    if !(angle >= 0.0) {
        return Err(GraspError::OutOfRange {
            what: "bend angle",
            value: angle,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let m = material;
    let torque = if angle < m.angle_lo {
        m.plateau_torque * angle / m.angle_lo
    } else {
        m.plateau_torque
    };
    Ok(BendingResponse {
        torque,
        overfolded: angle > m.angle_hi,
    })
}

/// Contact force produced by the bending torque acting through `lever_arm`
/// (mm). `torque_unit_scale` converts configured torque units to N·mm.
pub fn bending_contact_force(
    angle: f64,
    lever_arm: f64,
    material: &MaterialModel,
    torque_unit_scale: f64,
) -> Result<BendingForce> {
    if !(lever_arm > 0.0) {
        return Err(GraspError::OutOfRange {
            what: "lever arm",
            value: lever_arm,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let b = bending_torque(angle, material)?;
    Ok(BendingForce {
        force: b.torque * torque_unit_scale / lever_arm,
        overfolded: b.overfolded,
    })
}
