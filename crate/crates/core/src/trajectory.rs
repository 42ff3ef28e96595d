//! Timed pick-and-place paths for handling two stacked objects either one at
//! a time or together in a single pass.
//!
//! Every segment runs at constant speed: vertical moves at `descend_speed`
//! (both directions) and horizontal moves at `travel_speed`. Dwells add time
//! but no distance.
//!
//! Sequential template, starting `approach_height` above the pick location:
//!
//! ```text
//! top object:    descend, grasp, ascend, travel P->T, descend, release, ascend, travel T->P
//! bottom object: descend, grasp, ascend, travel P->B, descend, release, ascend
//! end pose:      travel B->T
//! ```
//!
//! Multi-object template:
//!
//! ```text
//! descend, grasp, ascend, travel P->B, descend, release, ascend,
//! travel B->T, descend, release, ascend
//! ```
//!
//! Both strategies end above the top place location, so the sequential path
//! is longer by exactly one `P<->T` round trip and one descend/ascend pair.

use alloc::vec::Vec;

use crate::error::{GraspError, Result};
use crate::math;
use crate::planner::Plan;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PickPlaceScene {
    pub pick: [f64; 2],
    pub place_bottom: [f64; 2],
    pub place_top: [f64; 2],
    pub approach_height: f64,
    pub descend_speed: f64,
    pub travel_speed: f64,
    pub grasp_dwell: f64,
    pub release_dwell: f64,
}

impl Default for PickPlaceScene {
    fn default() -> Self {
        PickPlaceScene::layout(300.0, 50.0)
    }
}

impl PickPlaceScene {
    /// Pick at the origin; both place locations at `separation` from it and
    /// `place_gap` apart, symmetric about the x axis.
    pub fn layout(separation: f64, place_gap: f64) -> Self {
        let half = place_gap / 2.0;
        let x = math::sqrt(f64::max(separation * separation - half * half, 0.0));
        PickPlaceScene {
            pick: [0.0, 0.0],
            place_bottom: [x, -half],
            place_top: [x, half],
            approach_height: 60.0,
            descend_speed: 10.0,
            travel_speed: 50.0,
            grasp_dwell: 2.0,
            release_dwell: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .pick
            .iter()
            .chain(&self.place_bottom)
            .chain(&self.place_top)
            .all(|v| v.is_finite());
        if !finite {
            return Err(GraspError::invalid("locations", "must be finite"));
        }
        if !(self.approach_height > 0.0 && self.approach_height.is_finite()) {
            return Err(GraspError::invalid("approach_height", "must be positive"));
        }
        if !(self.descend_speed > 0.0 && self.descend_speed.is_finite()) {
            return Err(GraspError::invalid("descend_speed", "must be positive"));
        }
        if !(self.travel_speed > 0.0 && self.travel_speed.is_finite()) {
            return Err(GraspError::invalid("travel_speed", "must be positive"));
        }
        if !(self.grasp_dwell >= 0.0 && self.release_dwell >= 0.0) {
            return Err(GraspError::invalid("dwell", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Strategy {
    Sequential,
    MultiObject,
}

/// What the arm did to arrive at a waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Action {
    Start,
    Descend,
    Ascend,
    Travel,
    Grasp,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Waypoint {
    pub position: [f64; 3],
    pub time: f64,
    pub action: Action,
    /// Servo angle commanded at grasp and release waypoints.
    pub servo_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (dx, dy, dz) = (b[0] - a[0], b[1] - a[1], b[2] - a[2]);
    math::sqrt(dx * dx + dy * dy + dz * dz)
}

impl Trajectory {
    pub fn starting_at(position: [f64; 3]) -> Self {
        Trajectory {
            waypoints: alloc::vec![Waypoint {
                position,
                time: 0.0,
                action: Action::Start,
                servo_angle: None,
            }],
        }
    }

    fn last(&self) -> Waypoint {
        *self.waypoints.last().expect("trajectory has a start waypoint")
    }

    pub fn end_time(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.time)
    }

    /// Constant-speed move. Zero-length moves are dropped.
    pub fn move_to(&mut self, action: Action, to: [f64; 3], speed: f64) {
        let from = self.last();
        let len = dist(from.position, to);
        if len > 0.0 {
            self.waypoints.push(Waypoint {
                position: to,
                time: from.time + len / speed,
                action,
                servo_angle: None,
            });
        }
    }

    /// Stationary dwell. A zero dwell still records the servo command when
    /// one is given, otherwise it is dropped.
    pub fn dwell(&mut self, action: Action, duration: f64, servo_angle: Option<f64>) {
        let from = self.last();
        if duration > 0.0 {
            self.waypoints.push(Waypoint {
                position: from.position,
                time: from.time + duration,
                action,
                servo_angle,
            });
        } else if servo_angle.is_some() {
            if let Some(w) = self.waypoints.last_mut() {
                w.servo_angle = servo_angle;
            }
        }
    }

    /// Appends `next`, which is assumed to start where `self` ends, shifting
    /// its timestamps by `self`'s end time.
    pub fn then(mut self, next: &Trajectory) -> Trajectory {
        let offset = self.end_time();
        self.waypoints.extend(next.waypoints.iter().skip(1).map(|w| Waypoint {
            time: w.time + offset,
            ..*w
        }));
        self
    }
}

pub fn path_distance(t: &Trajectory) -> f64 {
    t.waypoints.windows(2).map(|w| dist(w[0].position, w[1].position)).sum()
}

pub fn process_time(t: &Trajectory) -> f64 {
    t.end_time()
}

struct Builder<'a> {
    scene: &'a PickPlaceScene,
    t: Trajectory,
}

impl Builder<'_> {
    fn above(&self, p: [f64; 2]) -> [f64; 3] {
        [p[0], p[1], self.scene.approach_height]
    }

    fn travel(&mut self, to: [f64; 2]) {
        let to = self.above(to);
        self.t.move_to(Action::Travel, to, self.scene.travel_speed);
    }

    /// Descend, act, ascend at the current planar position.
    fn dip(&mut self, action: Action, servo_angle: Option<f64>) {
        let top = self.t.last().position;
        let v = self.scene.descend_speed;
        self.t.move_to(Action::Descend, [top[0], top[1], 0.0], v);
        let dwell = match action {
            Action::Grasp => self.scene.grasp_dwell,
            _ => self.scene.release_dwell,
        };
        self.t.dwell(action, dwell, servo_angle);
        self.t.move_to(Action::Ascend, top, v);
    }
}

/// Builds the timed path for `strategy`. Servo angles are taken from `plan`
/// when it is feasible; the multi-object strategy requires a feasible plan.
pub fn build_trajectory(scene: &PickPlaceScene, strategy: Strategy, plan: &Result<Plan>) -> Result<Trajectory> {
    scene.validate()?;
    let mut b = Builder {
        scene,
        t: Trajectory::starting_at([scene.pick[0], scene.pick[1], scene.approach_height]),
    };
    match strategy {
        Strategy::Sequential => {
            let angles = plan.as_ref().ok().map(|p| (p.theta_grasp, p.theta_release_top));
            let (grip, open) = (angles.map(|a| a.0), angles.map(|a| a.1));
            b.dip(Action::Grasp, grip);
            b.travel(scene.place_top);
            b.dip(Action::Release, open);
            b.travel(scene.pick);
            b.dip(Action::Grasp, grip);
            b.travel(scene.place_bottom);
            b.dip(Action::Release, open);
            b.travel(scene.place_top);
        }
        Strategy::MultiObject => {
            let plan = plan.as_ref().map_err(Clone::clone)?;
            b.dip(Action::Grasp, Some(plan.theta_grasp));
            b.travel(scene.place_bottom);
            b.dip(Action::Release, Some(plan.theta_release_bottom));
            b.travel(scene.place_top);
            b.dip(Action::Release, Some(plan.theta_release_top));
        }
    }
    Ok(b.t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub sequential_distance: f64,
    pub sequential_time: f64,
    pub multi_distance: f64,
    pub multi_time: f64,
    /// Percent.
    pub distance_reduction: f64,
    /// Percent.
    pub time_reduction: f64,
}

pub fn compare(scene: &PickPlaceScene, plan: &Result<Plan>) -> Result<Comparison> {
    let seq = build_trajectory(scene, Strategy::Sequential, plan)?;
    let multi = build_trajectory(scene, Strategy::MultiObject, plan)?;
    let (sd, st) = (path_distance(&seq), process_time(&seq));
    let (md, mt) = (path_distance(&multi), process_time(&multi));
    Ok(Comparison {
        sequential_distance: sd,
        sequential_time: st,
        multi_distance: md,
        multi_time: mt,
        distance_reduction: 100.0 * (1.0 - md / sd),
        time_reduction: 100.0 * (1.0 - mt / st),
    })
}

fn bisect<F>(mut lo: f64, mut hi: f64, target: f64, what: &'static str, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (f_lo, f_hi) = (f(lo)? - target, f(hi)? - target);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(GraspError::LayoutUnreachable { what, target });
    }
    let rising = f_lo < 0.0;
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if mid == lo || mid == hi {
            break;
        }
        if (f(mid)? < target) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / 2.0)
}

/// Picks the pick-to-place separation that yields `distance_target` percent
/// distance reduction, then the travel speed that yields `time_target`
/// percent time reduction. Everything else is taken from `base`.
pub fn calibrate_layout(
    base: &PickPlaceScene,
    place_gap: f64,
    plan: &Result<Plan>,
    distance_target: f64,
    time_target: f64,
) -> Result<PickPlaceScene> {
    base.validate()?;
    if !(place_gap >= 0.0) {
        return Err(GraspError::invalid("place_gap", "must be non-negative"));
    }
    let with_sep = |sep: f64| {
        let l = PickPlaceScene::layout(sep, place_gap);
        PickPlaceScene {
            pick: l.pick,
            place_bottom: l.place_bottom,
            place_top: l.place_top,
            ..*base
        }
    };
    let sep = bisect(place_gap / 2.0, 1e6, distance_target, "separation", |s| {
        Ok(compare(&with_sep(s), plan)?.distance_reduction)
    })?;
    let placed = with_sep(sep);
    let speed = bisect(1e-3, 1e6, time_target, "travel speed", |v| {
        Ok(compare(
            &PickPlaceScene {
                travel_speed: v,
                ..placed
            },
            plan,
        )?
        .time_reduction)
    })?;
    Ok(PickPlaceScene {
        travel_speed: speed,
        ..placed
    })
}
