//! Hold windows and selective-release plans for two stacked objects.
//!
//! The bottom object faces the bottom module level and the top object the top
//! level. An object is *held* at servo angle θ when every finger compresses it
//! inside the module's plateau strain range and the resulting pull-out
//! capacity carries its weight times a safety factor. Because the opening
//! grows monotonically as θ falls, a narrower bottom object drops out of its
//! window first while the top object is still gripped.

use alloc::vec::Vec;

use crate::error::{GraspError, Infeasibility, Result};
use crate::grasp::{finger_penetration, lift_check, resolve_contacts_at_level, Environment};
use crate::mechanics::MaterialModel;
use crate::object::ObjectShape;
use crate::transmission::{opening, theta_for_opening, GripperConfig};

/// Samples used to locate lift-capacity limits inside the strain window.
const LIFT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StackedScene {
    pub top: ObjectShape,
    pub bottom: ObjectShape,
    /// Vertical gap between the objects, mm. Informational.
    pub stack_gap: f64,
    pub gripper: GripperConfig,
    pub material: MaterialModel,
    pub env: Environment,
    /// Safety factor applied to the weight in the lift check.
    pub safety: f64,
}

impl StackedScene {
    pub fn new(top: ObjectShape, bottom: ObjectShape, gripper: GripperConfig, material: MaterialModel) -> Self {
        StackedScene {
            top,
            bottom,
            stack_gap: 0.0,
            gripper,
            material,
            env: Environment::default(),
            safety: 1.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gripper.validate()?;
        self.material.validate()?;
        self.env.validate()?;
        self.top.validate()?;
        self.bottom.validate()?;
        if !(self.safety > 0.0) {
            return Err(GraspError::invalid("safety", "must be positive"));
        }
        if !(self.stack_gap >= 0.0) {
            return Err(GraspError::invalid("stack_gap", "must be non-negative"));
        }
        Ok(())
    }

    pub fn top_level(&self) -> usize {
        self.gripper.module_levels.len() - 1
    }

    pub const fn bottom_level(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LimitingFactor {
    StrainRange,
    LiftCapacity,
    OpeningRange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HoldWindow {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub limiting_factor: LimitingFactor,
}

impl HoldWindow {
    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_lo && theta <= self.theta_hi
    }

    pub fn midpoint(&self) -> f64 {
        (self.theta_lo + self.theta_hi) / 2.0
    }
}

fn lift_holds(object: &ObjectShape, level: usize, theta: f64, scene: &StackedScene) -> Result<bool> {
    let cs = resolve_contacts_at_level(theta, object, &scene.gripper, &scene.material, &scene.env, level)?;
    if cs.is_empty() {
        return Ok(false);
    }
    Ok(lift_check(&cs, object, scene.env.gravity, scene.safety).holds)
}

fn strain_ok(object: &ObjectShape, theta: f64, config: &GripperConfig, material: &MaterialModel) -> Result<bool> {
    let open = opening(theta, config)?;
    Ok((0..usize::from(config.finger_count)).all(|i| {
        let strain = finger_penetration(object, config, i, open) / config.rest_depth;
        strain >= material.strain_lo && strain <= material.strain_hi
    }))
}

/// Whether `object`, facing module level `level`, is held at `theta`.
pub fn is_held(object: &ObjectShape, level: usize, theta: f64, scene: &StackedScene) -> Result<bool> {
    Ok(strain_ok(object, theta, &scene.gripper, &scene.material)? && lift_holds(object, level, theta, scene)?)
}

/// Maximal servo-angle interval over which `object` (facing `level`) is held.
/// `None` when no angle holds it.
pub fn hold_window(object: &ObjectShape, level: usize, scene: &StackedScene) -> Result<Option<HoldWindow>> {
    scene.validate()?;
    object.validate()?;
    let cfg = &scene.gripper;
    let m = &scene.material;

    // Strain window as an opening interval, intersected over fingers.
    let mut o_lo = f64::NEG_INFINITY;
    let mut o_hi = f64::INFINITY;
    for i in 0..usize::from(cfg.finger_count) {
        // penetration at zero opening
        let reach = finger_penetration(object, cfg, i, 0.0);
        o_lo = f64::max(o_lo, 2.0 * (reach - cfg.rest_depth * m.strain_hi));
        o_hi = f64::min(o_hi, 2.0 * (reach - cfg.rest_depth * m.strain_lo));
    }
    let (min_open, max_open) = cfg.opening_range();
    let clipped = o_lo < min_open || o_hi > max_open;
    let o_lo = f64::max(o_lo, min_open);
    let o_hi = f64::min(o_hi, max_open);
    if o_lo > o_hi {
        return Ok(None);
    }
    let theta_lo = theta_for_opening(o_hi, cfg)?;
    let theta_hi = theta_for_opening(o_lo, cfg)?;

    // Longest run of lift-capable samples.
    let n = if theta_hi > theta_lo { LIFT_SAMPLES } else { 0 };
    let at = |j: usize| {
        if n == 0 {
            theta_lo
        } else {
            theta_lo + (theta_hi - theta_lo) * j as f64 / n as f64
        }
    };
    let mut flags = Vec::with_capacity(n + 1);
    for j in 0..=n {
        flags.push(lift_holds(object, level, at(j), scene)?);
    }
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (j, &held) in flags.iter().enumerate() {
        match (held, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                if best.is_none_or(|(bs, be)| j - 1 - s > be - bs) {
                    best = Some((s, j - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if best.is_none_or(|(bs, be)| n - s > be - bs) {
            best = Some((s, n));
        }
    }
    let Some((s, e)) = best else {
        return Ok(None);
    };

    let refine = |held: f64, dropped: f64| -> Result<f64> {
        let (mut a, mut b) = (held, dropped);
        for _ in 0..60 {
            let mid = (a + b) / 2.0;
            if lift_holds(object, level, mid, scene)? {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(a)
    };
    let lo = if s > 0 { refine(at(s), at(s - 1))? } else { theta_lo };
    let hi = if e < n { refine(at(e), at(e + 1))? } else { theta_hi };
    let truncated = s > 0 || e < n;
    let limiting_factor = if truncated {
        LimitingFactor::LiftCapacity
    } else if clipped {
        LimitingFactor::OpeningRange
    } else {
        LimitingFactor::StrainRange
    };
    Ok(Some(HoldWindow {
        theta_lo: lo,
        theta_hi: hi,
        limiting_factor,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageState {
    pub top_held: bool,
    pub bottom_held: bool,
}

impl StageState {
    pub const fn new(top_held: bool, bottom_held: bool) -> Self {
        StageState { top_held, bottom_held }
    }
}

/// Pick both, drop the bottom object, drop the top object.
pub const EXPECTED_STAGES: [StageState; 3] = [
    StageState::new(true, true),
    StageState::new(true, false),
    StageState::new(false, false),
];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plan {
    pub theta_grasp: f64,
    pub theta_release_bottom: f64,
    pub theta_release_top: f64,
    pub stage_states: [StageState; 3],
}

impl Plan {
    pub fn new(theta_grasp: f64, theta_release_bottom: f64, theta_release_top: f64) -> Self {
        Plan {
            theta_grasp,
            theta_release_bottom,
            theta_release_top,
            stage_states: EXPECTED_STAGES,
        }
    }

    pub fn stage_angles(&self) -> [f64; 3] {
        [self.theta_grasp, self.theta_release_bottom, self.theta_release_top]
    }
}

fn max_width(object: &ObjectShape, cfg: &GripperConfig) -> f64 {
    (0..usize::from(cfg.finger_count))
        .map(|i| 2.0 * object.half_extent_along(cfg.finger_direction(i)))
        .fold(0.0, f64::max)
}

/// Synthesises the three-stage schedule: grasp at the middle of the joint
/// hold window, release the bottom object in the middle of the part of the top
/// window below the bottom window, and release the top object at the widest
/// opening.
pub fn plan_stacked(scene: &StackedScene) -> Result<Plan> {
    scene.validate()?;
    let infeasible = |why| Err(GraspError::Infeasible(why));
    let top_width = max_width(&scene.top, &scene.gripper);
    let bottom_width = max_width(&scene.bottom, &scene.gripper);
    if !(bottom_width < top_width) {
        return infeasible(Infeasibility::SizeOrdering {
            top_width,
            bottom_width,
        });
    }
    let Some(wt) = hold_window(&scene.top, scene.top_level(), scene)? else {
        return infeasible(Infeasibility::TopNotHoldable);
    };
    let Some(wb) = hold_window(&scene.bottom, scene.bottom_level(), scene)? else {
        return infeasible(Infeasibility::BottomNotHoldable);
    };
    let grasp_lo = f64::max(wt.theta_lo, wb.theta_lo);
    let grasp_hi = f64::min(wt.theta_hi, wb.theta_hi);
    if grasp_lo > grasp_hi {
        return infeasible(Infeasibility::EmptyGraspIntersection);
    }
    let gap_hi = f64::min(wt.theta_hi, wb.theta_lo);
    if !(gap_hi > wt.theta_lo) {
        return infeasible(Infeasibility::EmptyReleaseGap);
    }
    let theta_min = scene.gripper.law.theta_min;
    if !(theta_min < wt.theta_lo) {
        return infeasible(Infeasibility::TopReleaseUnreachable);
    }
    let plan = Plan::new((grasp_lo + grasp_hi) / 2.0, (wt.theta_lo + gap_hi) / 2.0, theta_min);
    let timeline = simulate_plan(&plan, scene)?;
    if let Some(stage) = timeline.failed_stage {
        return infeasible(Infeasibility::SimulationMismatch { stage });
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageEval {
    pub theta: f64,
    pub state: StageState,
    pub top_capacity: f64,
    pub bottom_capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Timeline {
    pub stages: Vec<StageEval>,
    pub passed: bool,
    /// 1-based index of the first stage whose hold state is wrong.
    pub failed_stage: Option<usize>,
}

/// Re-evaluates the mechanics at each stage angle and compares the hold
/// states with `(T,T), (T,F), (F,F)`.
pub fn simulate_plan(plan: &Plan, scene: &StackedScene) -> Result<Timeline> {
    scene.validate()?;
    let mut stages = Vec::with_capacity(3);
    let mut failed_stage = None;
    for (idx, theta) in plan.stage_angles().into_iter().enumerate() {
        let top_cs = resolve_contacts_at_level(
            theta,
            &scene.top,
            &scene.gripper,
            &scene.material,
            &scene.env,
            scene.top_level(),
        )?;
        let bottom_cs = resolve_contacts_at_level(
            theta,
            &scene.bottom,
            &scene.gripper,
            &scene.material,
            &scene.env,
            scene.bottom_level(),
        )?;
        let state = StageState::new(
            is_held(&scene.top, scene.top_level(), theta, scene)?,
            is_held(&scene.bottom, scene.bottom_level(), theta, scene)?,
        );
        if failed_stage.is_none() && state != EXPECTED_STAGES[idx] {
            failed_stage = Some(idx + 1);
        }
        stages.push(StageEval {
            theta,
            state,
            top_capacity: crate::grasp::pullout_capacity(&top_cs),
            bottom_capacity: crate::grasp::pullout_capacity(&bottom_cs),
        });
    }
    Ok(Timeline {
        stages,
        passed: failed_stage.is_none(),
        failed_stage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene(top: ObjectShape, bottom: ObjectShape) -> StackedScene {
        StackedScene::new(top, bottom, GripperConfig::with_fingers(4), MaterialModel::tpu95a())
    }

    #[test]
    fn sphere_windows() {
        let s = scene(ObjectShape::sphere(60.0, 0.05), ObjectShape::sphere(50.0, 0.03));
        let w60 = hold_window(&s.top, 1, &s).unwrap().unwrap();
        assert!((w60.theta_lo - 37.8).abs() < 1e-9, "{w60:?}");
        assert!((w60.theta_hi - 59.4).abs() < 1e-9);
        assert_eq!(w60.limiting_factor, LimitingFactor::StrainRange);
        let w50 = hold_window(&s.bottom, 0, &s).unwrap().unwrap();
        assert!((w50.theta_lo - 55.8).abs() < 1e-9);
        assert!((w50.theta_hi - 77.4).abs() < 1e-9);
        let big = ObjectShape::sphere(100.0, 0.1);
        assert!(hold_window(&big, 1, &s).unwrap().is_none());
    }

    #[test]
    fn clipped_window_reports_opening_range() {
        // 30 mm sphere: plateau openings [15, 27] lie below the 28 mm minimum.
        let s = scene(ObjectShape::sphere(60.0, 0.05), ObjectShape::sphere(32.0, 0.01));
        let w = hold_window(&s.bottom, 0, &s).unwrap().unwrap();
        assert_eq!(w.theta_hi, 90.0);
        assert_eq!(w.limiting_factor, LimitingFactor::OpeningRange);
    }

    #[test]
    fn heavy_object_is_lift_limited() {
        let s = scene(ObjectShape::sphere(60.0, 0.05), ObjectShape::sphere(50.0, 0.03));
        let heavy = ObjectShape::sphere(60.0, 100.0);
        assert!(hold_window(&heavy, 1, &s).unwrap().is_none());
    }

    #[test]
    fn sphere_plan() {
        let s = scene(ObjectShape::sphere(60.0, 0.05), ObjectShape::sphere(50.0, 0.03));
        let plan = plan_stacked(&s).unwrap();
        assert!((plan.theta_grasp - 57.6).abs() < 1e-9);
        assert!(plan.theta_release_bottom >= 37.8 && plan.theta_release_bottom < 55.8);
        assert!((plan.theta_release_bottom - 46.8).abs() < 1e-9);
        assert_eq!(plan.theta_release_top, 0.0);
        assert!(simulate_plan(&plan, &s).unwrap().passed);
    }

    #[test]
    fn ordering_violations() {
        let s = scene(ObjectShape::sphere(50.0, 0.03), ObjectShape::sphere(60.0, 0.05));
        assert!(matches!(
            plan_stacked(&s),
            Err(GraspError::Infeasible(Infeasibility::SizeOrdering { .. }))
        ));
        let same = scene(ObjectShape::sphere(55.0, 0.03), ObjectShape::sphere(55.0, 0.03));
        assert!(matches!(plan_stacked(&same), Err(GraspError::Infeasible(_))));
    }

    #[test]
    fn bad_plans_fail_the_right_stage() {
        let s = scene(ObjectShape::sphere(60.0, 0.05), ObjectShape::sphere(50.0, 0.03));
        let plan = plan_stacked(&s).unwrap();
        let stuck = Plan::new(plan.theta_grasp, plan.theta_grasp, plan.theta_release_top);
        assert_eq!(simulate_plan(&stuck, &s).unwrap().failed_stage, Some(2));
        let clinging = Plan::new(plan.theta_grasp, plan.theta_release_bottom, 45.0);
        assert_eq!(simulate_plan(&clinging, &s).unwrap().failed_stage, Some(3));
    }
}
