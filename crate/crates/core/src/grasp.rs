//! Contact resolution, grasp classification, closure analysis and pull-out.
//!
//! The model is 2.5-D: closure is analysed in the horizontal cross-section
//! (wrenches `fx, fy, τz`), while vertical pull-out resistance comes from the
//! friction and inclination of each contact.

use alloc::vec::Vec;

use crate::error::{GraspError, Result};
use crate::lp::{self, LpOutcome};
use crate::math::{self, Vec2};
use crate::mechanics::{
    bending_contact_force, compression_force, effective_strain, MaterialModel, DEFAULT_TORQUE_UNIT_SCALE,
};
use crate::object::ObjectShape;
use crate::transmission::{opening, GripperConfig};

/// Wrap contacts are never tilted all the way to vertical.
const MAX_INCLINATION: f64 = 89.9;

/// Default slip allowance on each side of a half-circle wrap, degrees.
pub const DEFAULT_SLIP_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Environment {
    pub mu: f64,
    /// m/s².
    pub gravity: f64,
    pub torque_unit_scale: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            mu: 0.5,
            gravity: 9.81,
            torque_unit_scale: DEFAULT_TORQUE_UNIT_SCALE,
        }
    }
}

impl Environment {
    pub fn with_mu(mu: f64) -> Self {
        Environment {
            mu,
            ..Environment::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(GraspError::invalid("mu", "must be non-negative"));
        }
        if !(self.gravity >= 0.0) {
            return Err(GraspError::invalid("gravity", "must be non-negative"));
        }
        if !(self.torque_unit_scale > 0.0) {
            return Err(GraspError::invalid("torque_unit_scale", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GraspMode {
    Parallel,
    VEnveloping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ContactMode {
    Compression,
    Bending,
}

/// Module deformation at a contact; the variant always matches the mode.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Deformation {
    /// Face penetration, mm.
    Penetration(f64),
    /// Degrees.
    BendAngle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactFlags {
    pub overcompressed: bool,
    pub overfolded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactRecord {
    pub finger_index: usize,
    /// 0 is the bottom module.
    pub level: usize,
    pub mode: ContactMode,
    pub deformation: Deformation,
    /// N, always >= 0.
    pub normal_force: f64,
    /// Direction of the force the module applies to the object.
    pub normal_direction: Vec2,
    /// Contact location relative to the object centre, mm.
    pub contact_point: Vec2,
    /// Out-of-plane tilt of the contact normal, degrees in [0, 90).
    pub inclination: f64,
    pub mu: f64,
    pub flags: ContactFlags,
}

impl ContactRecord {
    pub fn penetration(&self) -> Option<f64> {
        match self.deformation {
            Deformation::Penetration(p) => Some(p),
            Deformation::BendAngle(_) => None,
        }
    }

    pub fn bend_angle(&self) -> Option<f64> {
        match self.deformation {
            Deformation::BendAngle(a) => Some(a),
            Deformation::Penetration(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactSet {
    pub mode: GraspMode,
    pub finger_count: u8,
    /// Torque normalisation length (object bounding-circle radius), mm.
    pub characteristic_radius: f64,
    pub contacts: Vec<ContactRecord>,
}

impl ContactSet {
    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    /// Sorted, de-duplicated module levels that carry at least one contact.
    pub fn engaged_levels(&self) -> Vec<usize> {
        let mut levels: Vec<usize> = self.contacts.iter().map(|c| c.level).collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    /// Copy with every normal force multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> ContactSet {
        let mut out = self.clone();
        for c in &mut out.contacts {
            c.normal_force *= factor;
        }
        out
    }
}

/// Parallel for flat faces; v-enveloping for convex surfaces whose radius of
/// curvature is at most `curvature_threshold` panel spans.
pub fn grasp_mode(object: &ObjectShape, config: &GripperConfig) -> GraspMode {
    match object.curvature_radius_along(config.finger_direction(0)) {
        Some(r) if r <= config.curvature_threshold * config.module_height => GraspMode::VEnveloping,
        _ => GraspMode::Parallel,
    }
}

/// Bend angle of a module face wrapping a surface of radius `radius` after
/// `penetration`: the surface tangent angle at the edge of the contact patch,
/// whose half-chord is limited by the face half-width.
pub fn wrap_bend_angle(penetration: f64, radius: f64, face_half_width: f64) -> f64 {
    if penetration <= 0.0 {
        return 0.0;
    }
    let half_chord = if penetration >= radius {
        radius
    } else {
        math::sqrt(penetration * (2.0 * radius - penetration))
    };
    math::asin_deg(f64::min(half_chord, face_half_width) / radius)
}

/// Penetrations at or below this are treated as touching without load, mm.
pub const CONTACT_TOL: f64 = 1e-9;

#[derive(Clone, Copy)]
enum Levels {
    /// Every level overlapping the object's vertical span.
    Overlapping,
    /// One level, assumed vertically aligned with the object.
    Only(usize),
}

/// Per-side penetration of the object into finger `i`'s module faces at the
/// given opening. Positive means contact.
pub(crate) fn finger_penetration(object: &ObjectShape, config: &GripperConfig, i: usize, opening_mm: f64) -> f64 {
    let u = config.finger_direction(i);
    let centre = Vec2::new(object.pose.x, object.pose.y);
    centre.dot(u) + object.half_extent_along(u) - opening_mm / 2.0
}

fn resolve(
    theta: f64,
    object: &ObjectShape,
    config: &GripperConfig,
    material: &MaterialModel,
    env: &Environment,
    levels: Levels,
) -> Result<ContactSet> {
    config.validate()?;
    object.validate()?;
    material.validate()?;
    env.validate()?;
    let open = opening(theta, config)?;
    let mode = grasp_mode(object, config);
    let mut contacts = Vec::new();
    let (obj_lo, obj_hi) = object.vertical_span();

    for i in 0..usize::from(config.finger_count) {
        let p = finger_penetration(object, config, i, open);
        if p <= CONTACT_TOL {
            continue;
        }
        let u = config.finger_direction(i);
        let half = object.half_extent_along(u);
        let radius = match mode {
            GraspMode::VEnveloping => object.curvature_radius_along(u),
            GraspMode::Parallel => None,
        };
        for k in 0..config.module_levels.len() {
            let centroid_offset = match levels {
                Levels::Only(only) if only == k => 0.0,
                Levels::Only(_) => continue,
                Levels::Overlapping => {
                    let (lo, hi) = config.level_span(k);
                    let top = f64::min(hi, obj_hi);
                    let bottom = f64::max(lo, obj_lo);
                    if top - bottom <= 0.0 {
                        continue;
                    }
                    ((top + bottom) / 2.0 - (lo + hi) / 2.0).abs()
                }
            };
            let overcompressed = p > config.rest_depth;
            let record = match radius {
                None => {
                    let strain = effective_strain(p, config.rest_depth)?;
                    let r = compression_force(strain, material);
                    ContactRecord {
                        finger_index: i,
                        level: k,
                        mode: ContactMode::Compression,
                        deformation: Deformation::Penetration(p),
                        normal_force: r.force,
                        normal_direction: -u,
                        contact_point: u * half,
                        inclination: 0.0,
                        mu: env.mu,
                        flags: ContactFlags {
                            overcompressed: r.overcompressed,
                            overfolded: false,
                        },
                    }
                }
                Some(r) => {
                    let bend = wrap_bend_angle(p, r, config.module_offset);
                    let lever = config.bend_lever + centroid_offset;
                    let f = bending_contact_force(bend, lever, material, env.torque_unit_scale)?;
                    ContactRecord {
                        finger_index: i,
                        level: k,
                        mode: ContactMode::Bending,
                        deformation: Deformation::BendAngle(bend),
                        normal_force: f.force,
                        normal_direction: -u,
                        contact_point: u * half,
                        inclination: f64::min(bend, MAX_INCLINATION),
                        mu: env.mu,
                        flags: ContactFlags {
                            overcompressed,
                            overfolded: f.overfolded,
                        },
                    }
                }
            };
            contacts.push(record);
        }
    }
    Ok(ContactSet {
        mode,
        finger_count: config.finger_count,
        characteristic_radius: object.bounding_radius(),
        contacts,
    })
}

/// Resolves every module/object contact at servo angle `theta`.
///
/// Each finger's faces penetrate by `max(0, (width - opening) / 2)` (generalised
/// to off-centre objects). Flat faces compress; curved faces in v-enveloping
/// mode bend. A module level contributes only while it overlaps the object
/// vertically.
pub fn resolve_contacts(
    theta: f64,
    object: &ObjectShape,
    config: &GripperConfig,
    material: &MaterialModel,
    env: &Environment,
) -> Result<ContactSet> {
    resolve(theta, object, config, material, env, Levels::Overlapping)
}

/// Like [`resolve_contacts`] but only module level `level` is considered,
/// with the object taken as vertically aligned to it. Used for stacked scenes
/// where each object faces one level.
pub fn resolve_contacts_at_level(
    theta: f64,
    object: &ObjectShape,
    config: &GripperConfig,
    material: &MaterialModel,
    env: &Environment,
    level: usize,
) -> Result<ContactSet> {
    if level >= config.module_levels.len() {
        return Err(GraspError::OutOfRange {
            what: "module level",
            value: level as f64,
            lo: 0.0,
            hi: (config.module_levels.len() - 1) as f64,
        });
    }
    resolve(theta, object, config, material, env, Levels::Only(level))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Wrench {
    pub fx: f64,
    pub fy: f64,
    /// Torque divided by the characteristic radius.
    pub tz: f64,
}

impl Wrench {
    fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.tz]
    }
}

/// Two friction-cone edge wrenches per contact, `Fn (n ± mu t)`, with torque
/// about the object centre normalised by the characteristic radius.
pub fn contact_wrench_primitives(contacts: &ContactSet) -> Result<Vec<Wrench>> {
    if contacts.is_empty() {
        return Err(GraspError::EmptyContacts);
    }
    let rho = contacts.characteristic_radius;
    if !(rho > 0.0) {
        return Err(GraspError::invalid("characteristic_radius", "must be positive"));
    }
    let mut out = Vec::with_capacity(2 * contacts.len());
    for c in &contacts.contacts {
        let n = c.normal_direction;
        let t = n.perp();
        for sign in [1.0, -1.0] {
            let f = (n + t * (sign * c.mu)) * c.normal_force;
            out.push(Wrench {
                fx: f.x,
                fy: f.y,
                tz: c.contact_point.cross(f) / rho,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClosureResult {
    pub force_closure: bool,
    pub form_closure: bool,
    /// Distance from the origin to the primitive hull boundary, with wrenches
    /// scaled by their mean force magnitude. Zero when not force-closed.
    pub margin: f64,
    /// Angular wrap coverage, degrees; v-enveloping grasps only.
    pub wrap_angle: Option<f64>,
}

/// Force closure: the origin lies strictly inside the convex hull of the
/// primitive wrenches.
///
/// Decided by an LP that maximises `t` subject to `Σ λ_i w_i = 0`,
/// `Σ λ_i = 1`, `λ_i >= t`. The primitives positively span wrench space iff
/// they have full rank and the optimum is positive.
pub fn is_force_closure(primitives: &[Wrench]) -> Result<ClosureResult> {
    if primitives.len() < 2 {
        return Err(GraspError::TooFewPrimitives(primitives.len()));
    }
    let not_closed = ClosureResult {
        force_closure: false,
        form_closure: false,
        margin: 0.0,
        wrap_angle: None,
    };
    let scale = primitives.iter().map(|w| math::hypot(w.fx, w.fy)).sum::<f64>() / primitives.len() as f64;
    if !(scale > 0.0) {
        return Ok(not_closed);
    }
    let pts: Vec<[f64; 3]> = primitives
        .iter()
        .map(|w| {
            let a = w.as_array();
            [a[0] / scale, a[1] / scale, a[2] / scale]
        })
        .collect();

    let rows: Vec<Vec<f64>> = (0..3).map(|j| pts.iter().map(|p| p[j]).collect()).collect();
    if lp::rank(&rows, 1e-9) < 3 {
        return Ok(not_closed);
    }

    // Variables: t, then slack s_i = λ_i - t >= 0.
    let n = pts.len();
    let mut a = Vec::with_capacity(4);
    for row in &rows {
        let mut line = Vec::with_capacity(n + 1);
        line.push(row.iter().sum());
        line.extend_from_slice(row);
        a.push(line);
    }
    let mut last = Vec::with_capacity(n + 1);
    last.push(n as f64);
    last.extend(core::iter::repeat_n(1.0, n));
    a.push(last);
    let mut c = alloc::vec![0.0; n + 1];
    c[0] = -1.0;
    let t = match lp::solve(&c, &a, &[0.0, 0.0, 0.0, 1.0]) {
        LpOutcome::Optimal { x, .. } => x[0],
        LpOutcome::Infeasible | LpOutcome::Unbounded => 0.0,
    };
    if t <= 1e-9 {
        return Ok(not_closed);
    }
    let margin = hull_margin(&pts);
    Ok(ClosureResult {
        force_closure: margin > 0.0,
        margin: f64::max(margin, 0.0),
        ..not_closed
    })
}

/// Smallest distance from the origin to a supporting facet plane of the hull.
fn hull_margin(pts: &[[f64; 3]]) -> f64 {
    let mut uniq: Vec<[f64; 3]> = Vec::new();
    for p in pts {
        if !uniq.iter().any(|q| dist3(p, q) < 1e-12) {
            uniq.push(*p);
        }
    }
    let n = uniq.len();
    let tol = 1e-9;
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let e1 = sub3(&uniq[j], &uniq[i]);
                let e2 = sub3(&uniq[k], &uniq[i]);
                let mut normal = cross3(&e1, &e2);
                let len = norm3(&normal);
                if len < 1e-12 {
                    continue;
                }
                normal = [normal[0] / len, normal[1] / len, normal[2] / len];
                let mut offset = dot3(&normal, &uniq[i]);
                let (mut above, mut below) = (false, false);
                for p in &uniq {
                    let s = dot3(&normal, p) - offset;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                if above {
                    offset = -offset;
                }
                // Outward normal now has every point at or below the plane;
                // origin distance to the facet plane is `offset`.
                best = f64::min(best, offset);
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    math::sqrt(dot3(a, a))
}

fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    norm3(&sub3(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FormClosure {
    pub closed: bool,
    /// Union of the angular sectors covered by wrap contacts, degrees.
    pub wrap_angle: f64,
}

/// Frictionless restraint by wrapping. Each bending contact covers a sector of
/// ±bend angle around its finger direction; the grasp is form-closed when the
/// union covers at least `180° + 2 * slip_margin`.
pub fn is_form_closure(contacts: &ContactSet) -> Result<FormClosure> {
    is_form_closure_with(contacts, 180.0 + 2.0 * DEFAULT_SLIP_MARGIN)
}

pub fn is_form_closure_with(contacts: &ContactSet, wrap_threshold: f64) -> Result<FormClosure> {
    if contacts.mode != GraspMode::VEnveloping {
        return Err(GraspError::ParallelFormClosure);
    }
    let mut arcs: Vec<(f64, f64)> = Vec::new();
    for c in &contacts.contacts {
        let Some(bend) = c.bend_angle() else { continue };
        if bend <= 0.0 {
            continue;
        }
        let centre = math::wrap_deg((-c.normal_direction).angle_deg());
        let (lo, hi) = (centre - bend, centre + bend);
        if lo < 0.0 {
            arcs.push((lo + 360.0, 360.0));
            arcs.push((0.0, hi));
        } else if hi > 360.0 {
            arcs.push((lo, 360.0));
            arcs.push((0.0, hi - 360.0));
        } else {
            arcs.push((lo, hi));
        }
    }
    arcs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for (lo, hi) in arcs {
        current = match current {
            Some((clo, chi)) if lo <= chi => Some((clo, f64::max(chi, hi))),
            Some((clo, chi)) => {
                covered += chi - clo;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((clo, chi)) = current {
        covered += chi - clo;
    }
    let wrap_angle = f64::min(covered, 360.0);
    Ok(FormClosure {
        closed: wrap_angle >= wrap_threshold,
        wrap_angle,
    })
}

/// Force closure plus, for v-enveloping grasps, form closure and wrap angle.
pub fn closure(contacts: &ContactSet) -> Result<ClosureResult> {
    let prims = contact_wrench_primitives(contacts)?;
    let mut result = is_force_closure(&prims)?;
    if contacts.mode == GraspMode::VEnveloping {
        let form = is_form_closure(contacts)?;
        result.form_closure = form.closed;
        result.wrap_angle = Some(form.wrap_angle);
    }
    Ok(result)
}

/// Vertical extraction resistance: `Σ Fn (mu cos i + sin i)`, N.
pub fn pullout_capacity(contacts: &ContactSet) -> f64 {
    contacts
        .contacts
        .iter()
        .map(|c| c.normal_force * (c.mu * math::cos_deg(c.inclination) + math::sin_deg(c.inclination)))
        .sum()
}

/// Share of [`pullout_capacity`] carried by one finger side, which is what a
/// gauge clamped on one side of the probe reads.
pub fn pullout_per_finger(contacts: &ContactSet) -> f64 {
    pullout_capacity(contacts) / f64::from(contacts.finger_count)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftCheck {
    pub holds: bool,
    /// capacity - weight, N.
    pub margin: f64,
    pub capacity: f64,
    pub weight: f64,
}

pub fn lift_check(contacts: &ContactSet, object: &ObjectShape, gravity: f64, safety: f64) -> LiftCheck {
    let capacity = pullout_capacity(contacts);
    let weight = object.weight(gravity);
    LiftCheck {
        holds: capacity >= safety * weight,
        margin: capacity - weight,
        capacity,
        weight,
    }
}

/// Friction coefficient that makes the per-finger pull-out capacity equal
/// `target_per_finger` at the given pose. Capacity is affine in mu.
pub fn calibrate_mu(
    target_per_finger: f64,
    theta: f64,
    probe: &ObjectShape,
    config: &GripperConfig,
    material: &MaterialModel,
    env: &Environment,
) -> Result<f64> {
    let frictionless = Environment { mu: 0.0, ..*env };
    let cs = resolve_contacts(theta, probe, config, material, &frictionless)?;
    let floor = pullout_capacity(&cs);
    let slope: f64 = cs
        .contacts
        .iter()
        .map(|c| c.normal_force * math::cos_deg(c.inclination))
        .sum();
    if !(slope > 0.0) {
        return Err(GraspError::EmptyContacts);
    }
    let target = target_per_finger * f64::from(config.finger_count);
    let mu = (target - floor) / slope;
    if mu < 0.0 {
        return Err(GraspError::CalibrationUnreachable { target, floor });
    }
    Ok(mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceSample {
    /// Gripper lift from the grasp pose, mm.
    pub lift: f64,
    /// Resisting force, N.
    pub force: f64,
    pub engaged_levels: usize,
}

/// Lifts (mm) of the key pull-out stages: grasp and stage start (`t1`), top
/// modules fully pulled out (`t2`), first sample held by the bottom modules
/// alone (`t3`), and full release (`t4`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageMarkers {
    pub t1: f64,
    pub t2: f64,
    pub t3: Option<f64>,
    pub t4: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulloutTrace {
    pub mode: GraspMode,
    pub samples: Vec<TraceSample>,
    pub stages: StageMarkers,
}

impl PulloutTrace {
    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|s| s.force).fold(0.0, f64::max)
    }
}

/// Quasi-static pull-out: the gripper rises by each value in `lift_grid`
/// while the probe stays fixed, and contacts are re-resolved at every step.
pub fn pullout_trace(
    theta: f64,
    probe: &ObjectShape,
    config: &GripperConfig,
    material: &MaterialModel,
    env: &Environment,
    lift_grid: &[f64],
) -> Result<PulloutTrace> {
    if lift_grid.is_empty() {
        return Err(GraspError::EmptyLiftGrid);
    }
    config.validate()?;
    let (lo, hi) = probe.vertical_span();
    let spans_all = (0..config.module_levels.len()).all(|k| {
        let (a, b) = config.level_span(k);
        f64::min(b, hi) - f64::max(a, lo) > 0.0
    });
    if !spans_all {
        return Err(GraspError::invalid(
            "probe",
            "must overlap every module level at zero lift",
        ));
    }
    let top_level = config.module_levels.len() - 1;
    let t2 = hi - config.level_span(top_level).0;
    let t4 = hi - config.level_span(0).0;

    let mut samples = Vec::with_capacity(lift_grid.len());
    let mut mode = grasp_mode(probe, config);
    for &lift in lift_grid {
        let mut moved = *probe;
        moved.pose.z -= lift;
        let cs = resolve_contacts(theta, &moved, config, material, env)?;
        mode = cs.mode;
        samples.push(TraceSample {
            lift,
            force: pullout_capacity(&cs),
            engaged_levels: cs.engaged_levels().len(),
        });
    }
    let t3 = lift_grid.iter().copied().find(|&l| l >= t2 && l < t4);
    Ok(PulloutTrace {
        mode,
        samples,
        stages: StageMarkers { t1: 0.0, t2, t3, t4 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::MaterialModel;

    fn cfg2() -> GripperConfig {
        GripperConfig::default()
    }

    #[test]
    fn mode_examples() {
        let cfg = cfg2();
        assert_eq!(
            grasp_mode(&ObjectShape::sphere(60.0, 0.0), &cfg),
            GraspMode::VEnveloping
        );
        assert_eq!(grasp_mode(&ObjectShape::cube(50.0, 0.0), &cfg), GraspMode::Parallel);
        assert_eq!(
            grasp_mode(&ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0), &cfg),
            GraspMode::VEnveloping
        );
        assert_eq!(grasp_mode(&ObjectShape::sphere(120.0, 0.0), &cfg), GraspMode::Parallel);
    }

    #[test]
    fn cube_at_forty_degrees() {
        let cfg = cfg2();
        let cube = ObjectShape::cube(60.0, 0.1);
        let sil = MaterialModel::sil950();
        let cs = resolve_contacts(40.0, &cube, &cfg, &sil, &Environment::default()).unwrap();
        assert_eq!(cs.len(), 4);
        let open = 78.0 - 50.0 / 90.0 * 40.0;
        let expected_strain = (60.0 - open) / 2.0 / 15.0;
        for c in &cs.contacts {
            let strain = c.penetration().unwrap() / 15.0;
            assert!((strain - expected_strain).abs() < 1e-9);
            assert!((strain - 0.141).abs() < 1e-3);
            assert_eq!(c.normal_force, 1.0);
            assert!(c.bend_angle().is_none());
        }
    }

    #[test]
    fn open_gripper_has_no_contacts() {
        let cube = ObjectShape::cube(60.0, 0.1);
        let cs = resolve_contacts(0.0, &cube, &cfg2(), &MaterialModel::sil950(), &Environment::default()).unwrap();
        assert!(cs.is_empty());
    }

    #[test]
    fn zero_penetration_emits_nothing() {
        // opening at 40° equals the cube width exactly
        let open = 78.0 - 50.0 / 90.0 * 36.0;
        let cube = ObjectShape::cube(open, 0.1);
        let cs = resolve_contacts(36.0, &cube, &cfg2(), &MaterialModel::sil950(), &Environment::default()).unwrap();
        assert!(cs.is_empty());
    }

    #[test]
    fn curved_block_bends_in_range() {
        let probe = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0);
        let cs = resolve_contacts(60.0, &probe, &cfg2(), &MaterialModel::tpu95a(), &Environment::default()).unwrap();
        assert_eq!(cs.len(), 4);
        for c in &cs.contacts {
            let a = c.bend_angle().unwrap();
            assert!((5.0..=25.0).contains(&a), "bend {a}");
            assert!(!c.flags.overfolded);
            assert_eq!(c.inclination, a);
        }
    }

    #[test]
    fn overcompression_is_a_flag() {
        let cube = ObjectShape::cube(70.0, 0.1);
        let cs = resolve_contacts(90.0, &cube, &cfg2(), &MaterialModel::sil950(), &Environment::default()).unwrap();
        assert!(cs.contacts.iter().all(|c| c.flags.overcompressed));
    }

    #[test]
    fn primitives_degenerate_without_friction() {
        let cs = ContactSet {
            mode: GraspMode::Parallel,
            finger_count: 2,
            characteristic_radius: 1.0,
            contacts: alloc::vec![ContactRecord {
                finger_index: 0,
                level: 0,
                mode: ContactMode::Compression,
                deformation: Deformation::Penetration(1.0),
                normal_force: 1.0,
                normal_direction: Vec2::new(-1.0, 0.0),
                contact_point: Vec2::new(0.0, 0.0),
                inclination: 0.0,
                mu: 0.0,
                flags: ContactFlags::default(),
            }],
        };
        let p = contact_wrench_primitives(&cs).unwrap();
        assert_eq!(p.len(), 2);
        for w in p {
            assert_eq!((w.fx, w.fy, w.tz), (-1.0, 0.0, 0.0));
        }
        let empty = ContactSet {
            contacts: Vec::new(),
            ..cs
        };
        assert_eq!(contact_wrench_primitives(&empty), Err(GraspError::EmptyContacts));
    }

    #[test]
    fn degenerate_primitives_are_not_closed() {
        let w = Wrench {
            fx: 1.0,
            fy: 0.0,
            tz: 0.0,
        };
        let r = is_force_closure(&[w, w, w]).unwrap();
        assert!(!r.force_closure);
        assert_eq!(r.margin, 0.0);
        assert!(is_force_closure(&[w]).is_err());
    }

    #[test]
    fn form_closure_guard_and_coverage() {
        let cube = ObjectShape::cube(60.0, 0.1);
        let cs = resolve_contacts(60.0, &cube, &cfg2(), &MaterialModel::sil950(), &Environment::default()).unwrap();
        assert_eq!(is_form_closure(&cs), Err(GraspError::ParallelFormClosure));

        let cfg4 = GripperConfig::with_fingers(4);
        let sphere = ObjectShape::sphere(60.0, 0.05);
        let cs = resolve_contacts(60.0, &sphere, &cfg4, &MaterialModel::sil950(), &Environment::default()).unwrap();
        let f = is_form_closure(&cs).unwrap();
        assert!((f.wrap_angle - 240.0).abs() < 1e-9);
        assert!(f.closed);
    }

    #[test]
    fn capacity_sums_friction() {
        let cube = ObjectShape::cube(60.0, 0.1);
        let cs = resolve_contacts(40.0, &cube, &cfg2(), &MaterialModel::sil950(), &Environment::default()).unwrap();
        assert!((pullout_capacity(&cs) - 2.0).abs() < 1e-12);
        assert!((pullout_per_finger(&cs) - 1.0).abs() < 1e-12);
        assert_eq!(pullout_capacity(&cs.scaled(0.0)), 0.0);
    }

    #[test]
    fn lift_examples() {
        let cube = ObjectShape::cube(60.0, 0.2);
        let cs = resolve_contacts(
            40.0,
            &cube,
            &cfg2(),
            &MaterialModel::sil950(),
            &Environment::with_mu(0.75),
        )
        .unwrap();
        let l = lift_check(&cs, &cube, 9.81, 1.0);
        assert!((l.capacity - 3.0).abs() < 1e-12);
        assert!(l.holds);
        assert!((l.margin - (3.0 - 0.2 * 9.81)).abs() < 1e-12);
        assert!((l.margin - 1.038).abs() < 1e-3);

        let weightless = ObjectShape::cube(60.0, 0.0);
        let l = lift_check(&cs, &weightless, 9.81, 1.2);
        assert!(l.holds && l.margin == l.capacity);

        let l = lift_check(&cs.scaled(0.0), &cube, 9.81, 1.0);
        assert!(!l.holds);
    }

    #[test]
    fn trace_rejects_empty_grid_and_short_probe() {
        let probe = ObjectShape::cuboid(66.0, 45.4, 100.0, 0.0);
        let sil = MaterialModel::sil950();
        let env = Environment::default();
        assert_eq!(
            pullout_trace(30.0, &probe, &cfg2(), &sil, &env, &[]),
            Err(GraspError::EmptyLiftGrid)
        );
        let short = ObjectShape::cuboid(66.0, 45.4, 40.0, 0.0);
        assert!(pullout_trace(30.0, &short, &cfg2(), &sil, &env, &[0.0]).is_err());
    }

    #[test]
    fn calibration_inverts_capacity() {
        let probe = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0);
        let cfg = cfg2();
        let tpu = MaterialModel::tpu95a();
        let env = Environment::default();
        let mu = calibrate_mu(1.5, 60.0, &probe, &cfg, &tpu, &env).unwrap();
        let cs = resolve_contacts(60.0, &probe, &cfg, &tpu, &Environment { mu, ..env }).unwrap();
        assert!((pullout_per_finger(&cs) - 1.5).abs() < 1e-9);
        // Unreachable when the frictionless floor already exceeds the target.
        assert!(matches!(
            calibrate_mu(0.1, 60.0, &probe, &cfg, &tpu, &env),
            Err(GraspError::CalibrationUnreachable { .. })
        ));
    }
}
