//! Canonical rigid objects. All lengths are mm, mass is kg.

use crate::error::{GraspError, Result};
use crate::math::{self, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Shape {
    Sphere {
        diameter: f64,
    },
    Cube {
        edge: f64,
    },
    Cuboid {
        width: f64,
        depth: f64,
        height: f64,
    },
    Cylinder {
        diameter: f64,
        height: f64,
    },
    /// Block whose two faces across `width` are convex arcs of `radius`.
    /// The cross-section is the lens cut from two discs of that radius.
    CurvedBlock {
        radius: f64,
        width: f64,
        height: f64,
    },
}

/// Placement in the gripper frame: planar centre offset, yaw about the
/// vertical axis (degrees), and the height of the object's bottom.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectShape {
    pub shape: Shape,
    pub mass: f64,
    pub pose: Pose,
}

impl ObjectShape {
    pub fn new(shape: Shape, mass: f64) -> Self {
        ObjectShape {
            shape,
            mass,
            pose: Pose::default(),
        }
    }

    pub fn sphere(diameter: f64, mass: f64) -> Self {
        Self::new(Shape::Sphere { diameter }, mass)
    }

    pub fn cube(edge: f64, mass: f64) -> Self {
        Self::new(Shape::Cube { edge }, mass)
    }

    pub fn cuboid(width: f64, depth: f64, height: f64, mass: f64) -> Self {
        Self::new(Shape::Cuboid { width, depth, height }, mass)
    }

    pub fn cylinder(diameter: f64, height: f64, mass: f64) -> Self {
        Self::new(Shape::Cylinder { diameter, height }, mass)
    }

    pub fn curved_block(radius: f64, width: f64, height: f64, mass: f64) -> Self {
        Self::new(Shape::CurvedBlock { radius, width, height }, mass)
    }

    pub fn at(mut self, pose: Pose) -> Self {
        self.pose = pose;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let dims_ok = match self.shape {
            Shape::Sphere { diameter } => diameter > 0.0,
            Shape::Cube { edge } => edge > 0.0,
            Shape::Cuboid { width, depth, height } => width > 0.0 && depth > 0.0 && height > 0.0,
            Shape::Cylinder { diameter, height } => diameter > 0.0 && height > 0.0,
            Shape::CurvedBlock { radius, width, height } => radius > 0.0 && width > 0.0 && height > 0.0,
        };
        if !dims_ok {
            return Err(GraspError::invalid("dims", "all dimensions must be positive"));
        }
        if let Shape::CurvedBlock { radius, width, .. } = self.shape {
            if radius < width / 2.0 {
                return Err(GraspError::invalid(
                    "radius",
                    "curved block radius must be at least half its width",
                ));
            }
        }
        if !(self.mass >= 0.0) {
            return Err(GraspError::invalid("mass", "must be non-negative"));
        }
        Ok(())
    }

    /// Vertical extent of the object.
    pub fn height(&self) -> f64 {
        match self.shape {
            Shape::Sphere { diameter } => diameter,
            Shape::Cube { edge } => edge,
            Shape::Cuboid { height, .. } | Shape::Cylinder { height, .. } | Shape::CurvedBlock { height, .. } => height,
        }
    }

    /// Vertical span `[bottom, top]` in the gripper frame.
    pub fn vertical_span(&self) -> (f64, f64) {
        (self.pose.z, self.pose.z + self.height())
    }

    fn local_angle(&self, dir: Vec2) -> f64 {
        dir.angle_deg() - self.pose.yaw
    }

    /// Support distance of the horizontal cross-section along unit `dir`,
    /// measured from the object's centre.
    pub fn half_extent_along(&self, dir: Vec2) -> f64 {
        let a = self.local_angle(dir);
        let (c, s) = (math::cos_deg(a).abs(), math::sin_deg(a).abs());
        match self.shape {
            Shape::Sphere { diameter } | Shape::Cylinder { diameter, .. } => diameter / 2.0,
            Shape::Cube { edge } => edge / 2.0 * (c + s),
            Shape::Cuboid { width, depth, .. } => width / 2.0 * c + depth / 2.0 * s,
            Shape::CurvedBlock { radius, width, .. } => {
                let centre_gap = radius - width / 2.0;
                let corner = math::sqrt(radius * radius - centre_gap * centre_gap);
                // Arc normals span |a| <= asin(corner / radius) around the width axis.
                if s * radius <= corner {
                    radius - centre_gap * c
                } else {
                    corner * s
                }
            }
        }
    }

    /// Full extent along the x axis of the gripper frame.
    pub fn grasp_width(&self) -> f64 {
        2.0 * self.half_extent_along(Vec2::new(1.0, 0.0))
    }

    /// Radius of curvature of the surface facing `dir`; `None` for flat faces
    /// and corners.
    pub fn curvature_radius_along(&self, dir: Vec2) -> Option<f64> {
        match self.shape {
            Shape::Sphere { diameter } | Shape::Cylinder { diameter, .. } => Some(diameter / 2.0),
            Shape::Cube { .. } | Shape::Cuboid { .. } => None,
            Shape::CurvedBlock { radius, width, .. } => {
                let a = self.local_angle(dir);
                let centre_gap = radius - width / 2.0;
                let corner = math::sqrt(radius * radius - centre_gap * centre_gap);
                if math::sin_deg(a).abs() * radius <= corner {
                    Some(radius)
                } else {
                    None
                }
            }
        }
    }

    /// Radius of the smallest circle about the centre enclosing the
    /// cross-section; used to normalise torques.
    pub fn bounding_radius(&self) -> f64 {
        match self.shape {
            Shape::Sphere { diameter } | Shape::Cylinder { diameter, .. } => diameter / 2.0,
            Shape::Cube { edge } => edge / 2.0 * core::f64::consts::SQRT_2,
            Shape::Cuboid { width, depth, .. } => math::hypot(width, depth) / 2.0,
            Shape::CurvedBlock { radius, width, .. } => {
                let centre_gap = radius - width / 2.0;
                let corner = math::sqrt(radius * radius - centre_gap * centre_gap);
                f64::max(width / 2.0, corner)
            }
        }
    }

    pub fn weight(&self, gravity: f64) -> f64 {
        self.mass * gravity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(ObjectShape::sphere(60.0, 0.1).grasp_width(), 60.0);
        assert!((ObjectShape::cube(50.0, 0.1).grasp_width() - 50.0).abs() < 1e-12);
        let c = ObjectShape::cuboid(60.0, 40.0, 90.0, 0.1);
        assert!((c.grasp_width() - 60.0).abs() < 1e-12);
        assert!((c.half_extent_along(Vec2::new(0.0, 1.0)) - 20.0).abs() < 1e-12);
        let b = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.1);
        assert!((b.grasp_width() - 66.0).abs() < 1e-12);
    }

    #[test]
    fn yawed_cube_extent() {
        let cube = ObjectShape::cube(50.0, 0.1).at(Pose {
            yaw: 45.0,
            ..Pose::default()
        });
        let w = cube.grasp_width();
        assert!((w - 50.0 * core::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn curved_block_support_is_continuous_at_corner() {
        let b = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0);
        let gap: f64 = 45.5 - 33.0;
        let corner = libm::sqrt(45.5 * 45.5 - gap * gap);
        let a_corner = libm::asin(corner / 45.5).to_degrees();
        let below = b.half_extent_along(Vec2::from_angle_deg(a_corner - 1e-7));
        let above = b.half_extent_along(Vec2::from_angle_deg(a_corner + 1e-7));
        assert!((below - above).abs() < 1e-5);
        assert!((b.half_extent_along(Vec2::new(0.0, 1.0)) - corner).abs() < 1e-9);
    }

    #[test]
    fn curvature() {
        let x = Vec2::new(1.0, 0.0);
        assert_eq!(ObjectShape::sphere(60.0, 0.0).curvature_radius_along(x), Some(30.0));
        assert_eq!(ObjectShape::cube(60.0, 0.0).curvature_radius_along(x), None);
        let b = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0);
        assert_eq!(b.curvature_radius_along(x), Some(45.5));
        assert_eq!(b.curvature_radius_along(Vec2::new(0.0, 1.0)), None);
    }

    #[test]
    fn validation() {
        assert!(ObjectShape::sphere(-1.0, 0.1).validate().is_err());
        assert!(ObjectShape::sphere(10.0, -0.1).validate().is_err());
        assert!(ObjectShape::curved_block(20.0, 66.0, 100.0, 0.1).validate().is_err());
        assert!(ObjectShape::curved_block(45.5, 66.0, 100.0, 0.1).validate().is_ok());
    }
}
