//! Scenario files.
//!
//! Scenarios are TOML documents with a strict schema: unknown keys are
//! rejected and every problem found is reported with its field path, not
//! just the first one. Units are fixed: mm, N, degrees, kg, s.
//!
//! ```toml
//! kind = "stacked"            # single_grasp | pullout | stacked | pick_place
//!
//! [gripper]
//! finger_count = 4
//!
//! [environment]
//! mu = 0.5
//!
//! [[objects]]
//! name = "top"
//! kind = "sphere"
//! diameter = 60.0
//! mass = 0.05
//! material = "TPU95A"
//!
//! [stacked]
//! top = "top"
//! bottom = "bottom"
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use origami_grasp_core::trajectory::PickPlaceScene;
use origami_grasp_core::{
    Environment, GraspError, GripperConfig, MaterialModel, ObjectShape, Pose, Shape, TransmissionLaw,
};
use toml::{Table, Value};

/// Environment variable naming a TOML file of extra or replacement materials.
pub const MATERIALS_ENV: &str = "ORIGAMI_GRASP_MATERIALS";

#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every validation problem found in one document.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ScenarioErrors(pub Vec<FieldError>);

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        write!(f, "{n} validation error{}", if n == 1 { "" } else { "s" })?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl ScenarioErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }

    fn single(path: &str, message: impl Into<String>) -> Self {
        ScenarioErrors(vec![FieldError {
            path: path.into(),
            message: message.into(),
        }])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    SingleGrasp,
    Pullout,
    Stacked,
    PickPlace,
}

impl SceneKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SceneKind::SingleGrasp => "single_grasp",
            SceneKind::Pullout => "pullout",
            SceneKind::Stacked => "stacked",
            SceneKind::PickPlace => "pick_place",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            SceneKind::SingleGrasp,
            SceneKind::Pullout,
            SceneKind::Stacked,
            SceneKind::PickPlace,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedObject {
    pub name: String,
    pub material: String,
    pub object: ObjectShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspSection {
    pub theta: f64,
    /// Objects to grasp, one at a time. Empty means all.
    pub objects: Vec<String>,
    pub safety: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuCalibration {
    pub object: String,
    pub theta: f64,
    pub target_per_finger: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulloutSection {
    pub theta: f64,
    pub objects: Vec<String>,
    pub lift_step: f64,
    pub lift_max: f64,
    pub calibrate: Option<MuCalibration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedSection {
    pub top: String,
    pub bottom: String,
    pub safety: f64,
    pub stack_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutCalibration {
    pub place_gap: f64,
    pub distance_target: f64,
    pub time_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PickPlaceSection {
    pub scene: PickPlaceScene,
    pub calibrate: Option<LayoutCalibration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub kind: SceneKind,
    pub gripper: GripperConfig,
    pub environment: Environment,
    /// Every material available to the scenario, keyed by name.
    pub materials: BTreeMap<String, MaterialModel>,
    pub objects: Vec<NamedObject>,
    pub grasp: Option<GraspSection>,
    pub pullout: Option<PulloutSection>,
    pub stacked: Option<StackedSection>,
    pub pick_place: Option<PickPlaceSection>,
}

impl ScenarioFile {
    pub fn object(&self, name: &str) -> Option<&NamedObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn material_of(&self, name: &str) -> Option<&MaterialModel> {
        self.object(name).and_then(|o| self.materials.get(&o.material))
    }
}

/// Named materials that object entries may refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable(pub BTreeMap<String, MaterialModel>);

impl Default for MaterialTable {
    fn default() -> Self {
        MaterialTable::builtin()
    }
}

impl MaterialTable {
    pub fn builtin() -> Self {
        let mut m = BTreeMap::new();
        for mat in [MaterialModel::tpu95a(), MaterialModel::sil950()] {
            m.insert(mat.name.clone(), mat);
        }
        MaterialTable(m)
    }

    /// Built-ins overlaid with a `[materials.NAME]` TOML document.
    pub fn with_overrides(text: &str) -> Result<Self, ScenarioErrors> {
        let doc: Table = toml::from_str(text).map_err(|e| ScenarioErrors::single("", e.message().to_string()))?;
        let mut cx = Cx::default();
        cx.known(&doc, &["materials"], "");
        let mut table = MaterialTable::builtin();
        if let Some(t) = cx.table(&doc, "materials", "") {
            for (name, m) in parse_materials(&mut cx, t) {
                table.0.insert(name, m);
            }
        }
        cx.finish()?;
        Ok(table)
    }

    /// Built-ins, overlaid by the file named in [`MATERIALS_ENV`] if set.
    pub fn from_env() -> Result<Self, ScenarioErrors> {
        match std::env::var_os(MATERIALS_ENV) {
            None => Ok(MaterialTable::builtin()),
            Some(p) => {
                let path = Path::new(&p);
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ScenarioErrors::single("", format!("cannot read {}: {e}", path.display())))?;
                MaterialTable::with_overrides(&text)
            }
        }
    }
}

#[derive(Default)]
struct Cx {
    errors: Vec<FieldError>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Cx {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError {
            path: path.into(),
            message: message.into(),
        });
    }

    fn finish(self) -> Result<(), ScenarioErrors> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(ScenarioErrors(self.errors))
        }
    }

    fn known(&mut self, t: &Table, allowed: &[&str], path: &str) {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(
                    join(path, key),
                    format!("unknown field (expected one of: {})", allowed.join(", ")),
                );
            }
        }
    }

    fn table<'a>(&mut self, t: &'a Table, key: &str, path: &str) -> Option<&'a Table> {
        match t.get(key) {
            None => None,
            Some(Value::Table(inner)) => Some(inner),
            Some(_) => {
                self.err(join(path, key), "expected a table");
                None
            }
        }
    }

    fn req_table<'a>(&mut self, t: &'a Table, key: &str, path: &str) -> Option<&'a Table> {
        if !t.contains_key(key) {
            self.err(join(path, key), "missing required field");
        }
        self.table(t, key, path)
    }

    fn num(&mut self, t: &Table, key: &str, path: &str) -> Option<f64> {
        match t.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            _ => {
                self.err(join(path, key), "expected a number");
                None
            }
        }
    }

    fn req_num(&mut self, t: &Table, key: &str, path: &str) -> Option<f64> {
        if !t.contains_key(key) {
            self.err(join(path, key), "missing required field");
        }
        self.num(t, key, path)
    }

    fn num_or(&mut self, t: &Table, key: &str, path: &str, default: f64) -> f64 {
        self.num(t, key, path).unwrap_or(default)
    }

    fn text(&mut self, t: &Table, key: &str, path: &str) -> Option<String> {
        match t.get(key)? {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.err(join(path, key), "expected a string");
                None
            }
        }
    }

    fn req_text(&mut self, t: &Table, key: &str, path: &str) -> Option<String> {
        if !t.contains_key(key) {
            self.err(join(path, key), "missing required field");
        }
        self.text(t, key, path)
    }

    fn texts(&mut self, t: &Table, key: &str, path: &str) -> Vec<String> {
        match t.get(key) {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| match v {
                    Value::String(s) => Some(s.clone()),
                    _ => {
                        self.err(format!("{}[{i}]", join(path, key)), "expected a string");
                        None
                    }
                })
                .collect(),
            Some(_) => {
                self.err(join(path, key), "expected an array of strings");
                Vec::new()
            }
        }
    }

    fn nums(&mut self, t: &Table, key: &str, path: &str) -> Option<Vec<f64>> {
        match t.get(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        _ => self.err(format!("{}[{i}]", join(path, key)), "expected a number"),
                    }
                }
                Some(out)
            }
            _ => {
                self.err(join(path, key), "expected an array of numbers");
                None
            }
        }
    }

    fn point(&mut self, t: &Table, key: &str, path: &str) -> Option<[f64; 2]> {
        if !t.contains_key(key) {
            self.err(join(path, key), "missing required field");
            return None;
        }
        let v = self.nums(t, key, path)?;
        if v.len() != 2 {
            self.err(join(path, key), "expected [x, y]");
            return None;
        }
        Some([v[0], v[1]])
    }

    fn positive(&mut self, path: &str, key: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.err(join(path, key), "must be positive");
        }
    }

    fn non_negative(&mut self, path: &str, key: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.err(join(path, key), "must be non-negative");
        }
    }

    /// Reports a core validation failure under `path`.
    fn core(&mut self, path: &str, r: Result<(), GraspError>) {
        match r {
            Ok(()) => {}
            Err(GraspError::Invalid { field, reason }) => self.err(join(path, field), reason),
            Err(e) => self.err(path, e.to_string()),
        }
    }
}

fn parse_law(cx: &mut Cx, t: &Table, path: &str) -> TransmissionLaw {
    cx.known(t, &["r0", "slope", "theta_min", "theta_max"], path);
    let d = TransmissionLaw::default();
    TransmissionLaw {
        r0: cx.num_or(t, "r0", path, d.r0),
        slope: cx.num_or(t, "slope", path, d.slope),
        theta_min: cx.num_or(t, "theta_min", path, d.theta_min),
        theta_max: cx.num_or(t, "theta_max", path, d.theta_max),
    }
}

const GRIPPER_KEYS: &[&str] = &[
    "finger_count",
    "law",
    "module_offset",
    "module_levels",
    "module_height",
    "rest_depth",
    "bend_lever",
    "curvature_threshold",
];

fn parse_gripper(cx: &mut Cx, t: &Table, path: &str) -> GripperConfig {
    cx.known(t, GRIPPER_KEYS, path);
    let mut g = GripperConfig::default();
    match t.get("finger_count") {
        None => cx.err(join(path, "finger_count"), "missing required field"),
        Some(Value::Integer(n)) if *n == 2 || *n == 4 => g.finger_count = *n as u8,
        Some(Value::Integer(_)) => cx.err(join(path, "finger_count"), "must be 2 or 4"),
        Some(_) => cx.err(join(path, "finger_count"), "expected an integer (2 or 4)"),
    }
    if let Some(law) = cx.table(t, "law", path) {
        g.law = parse_law(cx, law, &join(path, "law"));
    }
    g.module_offset = cx.num_or(t, "module_offset", path, g.module_offset);
    if let Some(levels) = cx.nums(t, "module_levels", path) {
        g.module_levels = levels;
    }
    g.module_height = cx.num_or(t, "module_height", path, g.module_height);
    g.rest_depth = cx.num_or(t, "rest_depth", path, g.rest_depth);
    g.bend_lever = cx.num_or(t, "bend_lever", path, g.bend_lever);
    g.curvature_threshold = cx.num_or(t, "curvature_threshold", path, g.curvature_threshold);
    if g.finger_count == 2 || g.finger_count == 4 {
        cx.core(path, g.law.validate().and_then(|_| g.validate()));
    }
    g
}

fn parse_environment(cx: &mut Cx, t: &Table, path: &str) -> Environment {
    cx.known(t, &["mu", "gravity", "torque_unit_scale"], path);
    let d = Environment::default();
    let env = Environment {
        mu: cx.num_or(t, "mu", path, d.mu),
        gravity: cx.num_or(t, "gravity", path, d.gravity),
        torque_unit_scale: cx.num_or(t, "torque_unit_scale", path, d.torque_unit_scale),
    };
    cx.core(path, env.validate());
    env
}

const MATERIAL_KEYS: &[&str] = &[
    "plateau_force",
    "force_band",
    "strain_lo",
    "strain_hi",
    "plateau_torque",
    "torque_band",
    "angle_lo",
    "angle_hi",
    "overload_stiffness",
];

fn parse_materials(cx: &mut Cx, t: &Table) -> Vec<(String, MaterialModel)> {
    let mut out = Vec::new();
    for (name, v) in t {
        let path = join("materials", name);
        let Value::Table(m) = v else {
            cx.err(path, "expected a table");
            continue;
        };
        cx.known(m, MATERIAL_KEYS, &path);
        let force = cx.req_num(m, "plateau_force", &path);
        let torque = cx.req_num(m, "plateau_torque", &path);
        let (Some(force), Some(torque)) = (force, torque) else {
            continue;
        };
        let mut mat = MaterialModel::with_plateaus(name, force, 0.0, torque, 0.0);
        mat.force_band = cx.num_or(m, "force_band", &path, 0.0);
        mat.torque_band = cx.num_or(m, "torque_band", &path, 0.0);
        mat.strain_lo = cx.num_or(m, "strain_lo", &path, mat.strain_lo);
        mat.strain_hi = cx.num_or(m, "strain_hi", &path, mat.strain_hi);
        mat.angle_lo = cx.num_or(m, "angle_lo", &path, mat.angle_lo);
        mat.angle_hi = cx.num_or(m, "angle_hi", &path, mat.angle_hi);
        let default_k = 10.0 * mat.plateau_force / mat.strain_lo;
        mat.overload_stiffness = cx.num_or(m, "overload_stiffness", &path, default_k);
        cx.core(&path, mat.validate());
        out.push((name.clone(), mat));
    }
    out
}

const POSE_KEYS: [&str; 4] = ["x", "y", "yaw", "z"];

fn dims_for(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "sphere" => &["diameter"],
        "cube" => &["edge"],
        "cuboid" => &["width", "depth", "height"],
        "cylinder" => &["diameter", "height"],
        "curved_block" => &["radius", "width", "height"],
        _ => return None,
    })
}

fn parse_object(
    cx: &mut Cx,
    t: &Table,
    path: &str,
    materials: &BTreeMap<String, MaterialModel>,
) -> Option<NamedObject> {
    let name = cx.req_text(t, "name", path);
    let material = cx.req_text(t, "material", path);
    let mass = cx.req_num(t, "mass", path);
    let kind = cx.req_text(t, "kind", path);
    let dims = kind.as_deref().and_then(|k| {
        let d = dims_for(k);
        if d.is_none() {
            cx.err(
                join(path, "kind"),
                format!("unknown object kind {k:?} (expected sphere, cube, cuboid, cylinder or curved_block)"),
            );
        }
        d
    });
    let mut allowed = vec!["name", "material", "mass", "kind"];
    allowed.extend(POSE_KEYS);
    allowed.extend(dims.unwrap_or(&[]));
    cx.known(t, &allowed, path);
    if let Some(m) = &material {
        if !materials.contains_key(m) {
            let known: Vec<&str> = materials.keys().map(String::as_str).collect();
            cx.err(
                join(path, "material"),
                format!("undefined material {m:?} (defined: {})", known.join(", ")),
            );
        }
    }
    let dims = dims?;
    let mut vals = Vec::with_capacity(dims.len());
    for d in dims {
        let v = cx.req_num(t, d, path);
        if let Some(v) = v {
            cx.positive(path, d, v);
        }
        vals.push(v);
    }
    if let Some(m) = mass {
        cx.non_negative(path, "mass", m);
    }
    let vals: Option<Vec<f64>> = vals.into_iter().collect();
    let vals = vals?;
    let shape = match kind.as_deref()? {
        "sphere" => Shape::Sphere { diameter: vals[0] },
        "cube" => Shape::Cube { edge: vals[0] },
        "cuboid" => Shape::Cuboid {
            width: vals[0],
            depth: vals[1],
            height: vals[2],
        },
        "cylinder" => Shape::Cylinder {
            diameter: vals[0],
            height: vals[1],
        },
        _ => Shape::CurvedBlock {
            radius: vals[0],
            width: vals[1],
            height: vals[2],
        },
    };
    let pose = Pose {
        x: cx.num_or(t, "x", path, 0.0),
        y: cx.num_or(t, "y", path, 0.0),
        yaw: cx.num_or(t, "yaw", path, 0.0),
        z: cx.num_or(t, "z", path, 0.0),
    };
    let object = ObjectShape::new(shape, mass?).at(pose);
    if let Shape::CurvedBlock { radius, width, .. } = shape {
        if radius < width / 2.0 {
            cx.err(join(path, "radius"), "must be at least half the width");
        }
    }
    Some(NamedObject {
        name: name?,
        material: material?,
        object,
    })
}

fn check_ref(cx: &mut Cx, objects: &[NamedObject], path: &str, key: &str, name: &str) {
    if !objects.iter().any(|o| o.name == name) {
        cx.err(join(path, key), format!("undefined object {name:?}"));
    }
}

fn parse_grasp(cx: &mut Cx, t: &Table, objects: &[NamedObject]) -> Option<GraspSection> {
    let path = "grasp";
    cx.known(t, &["theta", "objects", "safety"], path);
    let theta = cx.req_num(t, "theta", path);
    let names = cx.texts(t, "objects", path);
    for (i, n) in names.iter().enumerate() {
        check_ref(cx, objects, path, &format!("objects[{i}]"), n);
    }
    let safety = cx.num_or(t, "safety", path, 1.0);
    cx.positive(path, "safety", safety);
    Some(GraspSection {
        theta: theta?,
        objects: names,
        safety,
    })
}

fn parse_pullout(cx: &mut Cx, t: &Table, objects: &[NamedObject], gripper: &GripperConfig) -> Option<PulloutSection> {
    let path = "pullout";
    cx.known(t, &["theta", "objects", "lift_step", "lift_max", "calibrate"], path);
    let theta = cx.req_num(t, "theta", path);
    let names = cx.texts(t, "objects", path);
    for (i, n) in names.iter().enumerate() {
        check_ref(cx, objects, path, &format!("objects[{i}]"), n);
    }
    let lift_step = cx.num_or(t, "lift_step", path, 0.5);
    cx.positive(path, "lift_step", lift_step);
    // default: far enough for every probe to clear the bottom level
    let default_max = objects
        .iter()
        .map(|o| o.object.vertical_span().1 - gripper.module_levels.first().copied().unwrap_or(0.0))
        .fold(0.0, f64::max)
        + 10.0;
    let lift_max = cx.num_or(t, "lift_max", path, default_max);
    cx.non_negative(path, "lift_max", lift_max);
    let calibrate = match cx.table(t, "calibrate", path) {
        None => None,
        Some(c) => {
            let cpath = "pullout.calibrate";
            cx.known(c, &["object", "theta", "target_per_finger"], cpath);
            let object = cx.req_text(c, "object", cpath);
            if let Some(o) = &object {
                check_ref(cx, objects, cpath, "object", o);
            }
            let ctheta = cx.req_num(c, "theta", cpath);
            let target = cx.req_num(c, "target_per_finger", cpath);
            if let Some(v) = target {
                cx.positive(cpath, "target_per_finger", v);
            }
            Some(MuCalibration {
                object: object?,
                theta: ctheta?,
                target_per_finger: target?,
            })
        }
    };
    Some(PulloutSection {
        theta: theta?,
        objects: names,
        lift_step,
        lift_max,
        calibrate,
    })
}

fn parse_stacked(cx: &mut Cx, t: &Table, objects: &[NamedObject]) -> Option<StackedSection> {
    let path = "stacked";
    cx.known(t, &["top", "bottom", "safety", "stack_gap"], path);
    let top = cx.req_text(t, "top", path);
    let bottom = cx.req_text(t, "bottom", path);
    for (key, v) in [("top", &top), ("bottom", &bottom)] {
        if let Some(n) = v {
            check_ref(cx, objects, path, key, n);
        }
    }
    if let (Some(a), Some(b)) = (&top, &bottom) {
        let ma = objects.iter().find(|o| &o.name == a).map(|o| &o.material);
        let mb = objects.iter().find(|o| &o.name == b).map(|o| &o.material);
        if let (Some(ma), Some(mb)) = (ma, mb) {
            if ma != mb {
                cx.err(
                    join(path, "bottom"),
                    format!("stacked objects must share one module material ({ma} vs {mb})"),
                );
            }
        }
    }
    let safety = cx.num_or(t, "safety", path, 1.2);
    cx.positive(path, "safety", safety);
    let stack_gap = cx.num_or(t, "stack_gap", path, 0.0);
    cx.non_negative(path, "stack_gap", stack_gap);
    Some(StackedSection {
        top: top?,
        bottom: bottom?,
        safety,
        stack_gap,
    })
}

const PICK_PLACE_KEYS: &[&str] = &[
    "pick",
    "place_bottom",
    "place_top",
    "approach_height",
    "descend_speed",
    "travel_speed",
    "grasp_dwell",
    "release_dwell",
    "calibrate",
];

fn parse_pick_place(cx: &mut Cx, t: &Table) -> Option<PickPlaceSection> {
    let path = "pick_place";
    cx.known(t, PICK_PLACE_KEYS, path);
    let d = PickPlaceScene::default();
    let pick = cx.point(t, "pick", path);
    let place_bottom = cx.point(t, "place_bottom", path);
    let place_top = cx.point(t, "place_top", path);
    let scene = PickPlaceScene {
        pick: pick.unwrap_or(d.pick),
        place_bottom: place_bottom.unwrap_or(d.place_bottom),
        place_top: place_top.unwrap_or(d.place_top),
        approach_height: cx.num_or(t, "approach_height", path, d.approach_height),
        descend_speed: cx.num_or(t, "descend_speed", path, d.descend_speed),
        travel_speed: cx.num_or(t, "travel_speed", path, d.travel_speed),
        grasp_dwell: cx.num_or(t, "grasp_dwell", path, d.grasp_dwell),
        release_dwell: cx.num_or(t, "release_dwell", path, d.release_dwell),
    };
    cx.positive(path, "approach_height", scene.approach_height);
    cx.positive(path, "descend_speed", scene.descend_speed);
    cx.positive(path, "travel_speed", scene.travel_speed);
    cx.non_negative(path, "grasp_dwell", scene.grasp_dwell);
    cx.non_negative(path, "release_dwell", scene.release_dwell);
    let calibrate = match cx.table(t, "calibrate", path) {
        None => None,
        Some(c) => {
            let cpath = "pick_place.calibrate";
            cx.known(c, &["place_gap", "distance_target", "time_target"], cpath);
            let gap = cx.num_or(c, "place_gap", cpath, 50.0);
            cx.non_negative(cpath, "place_gap", gap);
            let dist = cx.req_num(c, "distance_target", cpath);
            let time = cx.req_num(c, "time_target", cpath);
            Some(LayoutCalibration {
                place_gap: gap,
                distance_target: dist?,
                time_target: time?,
            })
        }
    };
    let _ = (pick?, place_bottom?, place_top?);
    Some(PickPlaceSection { scene, calibrate })
}

const TOP_KEYS: &[&str] = &[
    "kind",
    "gripper",
    "environment",
    "materials",
    "objects",
    "grasp",
    "pullout",
    "stacked",
    "pick_place",
];

/// Parses and validates a scenario against the built-in materials.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioErrors> {
    parse_scenario_with(text, &MaterialTable::builtin())
}

/// Parses and validates a scenario. Materials defined in the document are
/// layered over `base`.
pub fn parse_scenario_with(text: &str, base: &MaterialTable) -> Result<ScenarioFile, ScenarioErrors> {
    let doc: Table = toml::from_str(text).map_err(|e| {
        let msg = match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}: {}", e.message())
            }
            None => e.message().to_string(),
        };
        ScenarioErrors::single("", msg)
    })?;
    let mut cx = Cx::default();
    cx.known(&doc, TOP_KEYS, "");

    let kind = match cx.req_text(&doc, "kind", "") {
        Some(k) => {
            let parsed = SceneKind::parse(&k);
            if parsed.is_none() {
                cx.err(
                    "kind",
                    format!("unknown scene kind {k:?} (expected single_grasp, pullout, stacked or pick_place)"),
                );
            }
            parsed
        }
        None => None,
    };
    let gripper = cx
        .req_table(&doc, "gripper", "")
        .map(|t| parse_gripper(&mut cx, t, "gripper"))
        .unwrap_or_default();
    let environment = cx
        .table(&doc, "environment", "")
        .map(|t| parse_environment(&mut cx, t, "environment"))
        .unwrap_or_default();
    let mut materials = base.0.clone();
    if let Some(t) = cx.table(&doc, "materials", "") {
        for (name, m) in parse_materials(&mut cx, t) {
            materials.insert(name, m);
        }
    }

    let mut objects: Vec<NamedObject> = Vec::new();
    match doc.get("objects") {
        None => cx.err("objects", "missing required field"),
        Some(Value::Array(items)) => {
            if items.is_empty() {
                cx.err("objects", "at least one object is required");
            }
            for (i, item) in items.iter().enumerate() {
                let path = format!("objects[{i}]");
                match item {
                    Value::Table(t) => {
                        if let Some(o) = parse_object(&mut cx, t, &path, &materials) {
                            if objects.iter().any(|p| p.name == o.name) {
                                cx.err(join(&path, "name"), format!("duplicate object name {:?}", o.name));
                            }
                            objects.push(o);
                        }
                    }
                    _ => cx.err(path, "expected a table"),
                }
            }
        }
        Some(_) => cx.err("objects", "expected an array of tables"),
    }

    let grasp = cx
        .table(&doc, "grasp", "")
        .and_then(|t| parse_grasp(&mut cx, t, &objects));
    let pullout = cx
        .table(&doc, "pullout", "")
        .and_then(|t| parse_pullout(&mut cx, t, &objects, &gripper));
    let stacked = cx
        .table(&doc, "stacked", "")
        .and_then(|t| parse_stacked(&mut cx, t, &objects));
    let pick_place = cx
        .table(&doc, "pick_place", "")
        .and_then(|t| parse_pick_place(&mut cx, t));

    if let Some(kind) = kind {
        let needed: &[&str] = match kind {
            SceneKind::SingleGrasp => &["grasp"],
            SceneKind::Pullout => &["pullout"],
            SceneKind::Stacked => &["stacked"],
            SceneKind::PickPlace => &["pick_place", "stacked"],
        };
        for section in needed {
            if !doc.contains_key(*section) {
                cx.err(
                    *section,
                    format!("missing required section for kind {:?}", kind.as_str()),
                );
            }
        }
    }

    cx.finish()?;
    Ok(ScenarioFile {
        kind: kind.expect("validated"),
        gripper,
        environment,
        materials,
        objects,
        grasp,
        pullout,
        stacked,
        pick_place,
    })
}

fn num_array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

fn text_array(v: &[String]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.clone())).collect())
}

fn tbl<const N: usize>(entries: [(&str, Value); N]) -> Table {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Every field written out explicitly, so the document parses back to an
/// identical scenario regardless of defaults or the material table in use.
pub fn to_table(s: &ScenarioFile) -> Table {
    let g = &s.gripper;
    let mut doc = Table::new();
    doc.insert("kind".into(), Value::String(s.kind.as_str().into()));
    doc.insert(
        "gripper".into(),
        Value::Table(tbl([
            ("finger_count", Value::Integer(i64::from(g.finger_count))),
            (
                "law",
                Value::Table(tbl([
                    ("r0", Value::Float(g.law.r0)),
                    ("slope", Value::Float(g.law.slope)),
                    ("theta_min", Value::Float(g.law.theta_min)),
                    ("theta_max", Value::Float(g.law.theta_max)),
                ])),
            ),
            ("module_offset", Value::Float(g.module_offset)),
            ("module_levels", num_array(&g.module_levels)),
            ("module_height", Value::Float(g.module_height)),
            ("rest_depth", Value::Float(g.rest_depth)),
            ("bend_lever", Value::Float(g.bend_lever)),
            ("curvature_threshold", Value::Float(g.curvature_threshold)),
        ])),
    );
    let e = &s.environment;
    doc.insert(
        "environment".into(),
        Value::Table(tbl([
            ("mu", Value::Float(e.mu)),
            ("gravity", Value::Float(e.gravity)),
            ("torque_unit_scale", Value::Float(e.torque_unit_scale)),
        ])),
    );
    let mut mats = Table::new();
    for (name, m) in &s.materials {
        mats.insert(
            name.clone(),
            Value::Table(tbl([
                ("plateau_force", Value::Float(m.plateau_force)),
                ("force_band", Value::Float(m.force_band)),
                ("strain_lo", Value::Float(m.strain_lo)),
                ("strain_hi", Value::Float(m.strain_hi)),
                ("plateau_torque", Value::Float(m.plateau_torque)),
                ("torque_band", Value::Float(m.torque_band)),
                ("angle_lo", Value::Float(m.angle_lo)),
                ("angle_hi", Value::Float(m.angle_hi)),
                ("overload_stiffness", Value::Float(m.overload_stiffness)),
            ])),
        );
    }
    doc.insert("materials".into(), Value::Table(mats));
    let objects = s
        .objects
        .iter()
        .map(|o| {
            let mut t = Table::new();
            t.insert("name".into(), Value::String(o.name.clone()));
            t.insert("material".into(), Value::String(o.material.clone()));
            t.insert("mass".into(), Value::Float(o.object.mass));
            let (kind, dims): (&str, Vec<(&str, f64)>) = match o.object.shape {
                Shape::Sphere { diameter } => ("sphere", vec![("diameter", diameter)]),
                Shape::Cube { edge } => ("cube", vec![("edge", edge)]),
                Shape::Cuboid { width, depth, height } => {
                    ("cuboid", vec![("width", width), ("depth", depth), ("height", height)])
                }
                Shape::Cylinder { diameter, height } => ("cylinder", vec![("diameter", diameter), ("height", height)]),
                Shape::CurvedBlock { radius, width, height } => (
                    "curved_block",
                    vec![("radius", radius), ("width", width), ("height", height)],
                ),
            };
            t.insert("kind".into(), Value::String(kind.into()));
            for (k, v) in dims {
                t.insert(k.into(), Value::Float(v));
            }
            let p = o.object.pose;
            for (k, v) in POSE_KEYS.iter().zip([p.x, p.y, p.yaw, p.z]) {
                t.insert((*k).into(), Value::Float(v));
            }
            Value::Table(t)
        })
        .collect();
    doc.insert("objects".into(), Value::Array(objects));
    if let Some(gs) = &s.grasp {
        doc.insert(
            "grasp".into(),
            Value::Table(tbl([
                ("theta", Value::Float(gs.theta)),
                ("objects", text_array(&gs.objects)),
                ("safety", Value::Float(gs.safety)),
            ])),
        );
    }
    if let Some(p) = &s.pullout {
        let mut t = tbl([
            ("theta", Value::Float(p.theta)),
            ("objects", text_array(&p.objects)),
            ("lift_step", Value::Float(p.lift_step)),
            ("lift_max", Value::Float(p.lift_max)),
        ]);
        if let Some(c) = &p.calibrate {
            t.insert(
                "calibrate".into(),
                Value::Table(tbl([
                    ("object", Value::String(c.object.clone())),
                    ("theta", Value::Float(c.theta)),
                    ("target_per_finger", Value::Float(c.target_per_finger)),
                ])),
            );
        }
        doc.insert("pullout".into(), Value::Table(t));
    }
    if let Some(st) = &s.stacked {
        doc.insert(
            "stacked".into(),
            Value::Table(tbl([
                ("top", Value::String(st.top.clone())),
                ("bottom", Value::String(st.bottom.clone())),
                ("safety", Value::Float(st.safety)),
                ("stack_gap", Value::Float(st.stack_gap)),
            ])),
        );
    }
    if let Some(pp) = &s.pick_place {
        let sc = &pp.scene;
        let mut t = tbl([
            ("pick", num_array(&sc.pick)),
            ("place_bottom", num_array(&sc.place_bottom)),
            ("place_top", num_array(&sc.place_top)),
            ("approach_height", Value::Float(sc.approach_height)),
            ("descend_speed", Value::Float(sc.descend_speed)),
            ("travel_speed", Value::Float(sc.travel_speed)),
            ("grasp_dwell", Value::Float(sc.grasp_dwell)),
            ("release_dwell", Value::Float(sc.release_dwell)),
        ]);
        if let Some(c) = &pp.calibrate {
            t.insert(
                "calibrate".into(),
                Value::Table(tbl([
                    ("place_gap", Value::Float(c.place_gap)),
                    ("distance_target", Value::Float(c.distance_target)),
                    ("time_target", Value::Float(c.time_target)),
                ])),
            );
        }
        doc.insert("pick_place".into(), Value::Table(t));
    }
    doc
}

pub fn to_toml(s: &ScenarioFile) -> String {
    toml::to_string(&to_table(s)).expect("scenario tables always serialize")
}

/// Parses a plan override: a table with `theta_grasp`, `theta_release_bottom`
/// and `theta_release_top`.
pub fn parse_plan(text: &str) -> Result<origami_grasp_core::Plan, ScenarioErrors> {
    let doc: Table = toml::from_str(text).map_err(|e| ScenarioErrors::single("", e.message().to_string()))?;
    let mut cx = Cx::default();
    let keys = ["theta_grasp", "theta_release_bottom", "theta_release_top"];
    cx.known(&doc, &keys, "");
    let v: Vec<Option<f64>> = keys.iter().map(|k| cx.req_num(&doc, k, "")).collect();
    cx.finish()?;
    Ok(origami_grasp_core::Plan::new(
        v[0].expect("validated"),
        v[1].expect("validated"),
        v[2].expect("validated"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "single_grasp"
[gripper]
finger_count = 2
[[objects]]
name = "cube"
kind = "cube"
edge = 60
mass = 0.1
material = "SIL950"
[grasp]
theta = 40
"#;

    #[test]
    fn minimal_document() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.kind, SceneKind::SingleGrasp);
        assert_eq!(s.gripper, GripperConfig::default());
        assert_eq!(s.objects[0].object, ObjectShape::cube(60.0, 0.1));
        assert_eq!(s.grasp.as_ref().unwrap().theta, 40.0);
    }

    #[test]
    fn round_trip() {
        let s = parse_scenario(MINIMAL).unwrap();
        let again = parse_scenario(&to_toml(&s)).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn three_fingers_rejected() {
        let doc = MINIMAL.replace("finger_count = 2", "finger_count = 3");
        let e = parse_scenario(&doc).unwrap_err();
        assert_eq!(e.paths(), vec!["gripper.finger_count"]);
        assert!(e.to_string().contains("must be 2 or 4"));
    }

    #[test]
    fn empty_document_lists_required_fields() {
        let e = parse_scenario("").unwrap_err();
        assert_eq!(e.paths(), vec!["kind", "gripper", "objects"]);
    }

    #[test]
    fn collects_every_error() {
        let doc = MINIMAL
            .replace("edge = 60", "edge = -60\ncolour = \"red\"")
            .replace("SIL950", "Unobtainium")
            .replace("[grasp]", "[environment]\nmu = -0.1\n[grasp]");
        let e = parse_scenario(&doc).unwrap_err();
        let paths = e.paths();
        for p in [
            "environment.mu",
            "objects[0].material",
            "objects[0].colour",
            "objects[0].edge",
        ] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let e = parse_scenario("kind = \n").unwrap_err();
        assert!(e.0[0].message.starts_with("line 1"), "{e}");
    }

    #[test]
    fn material_overrides() {
        let t =
            MaterialTable::with_overrides("[materials.SIL950]\nplateau_force = 1.2\nplateau_torque = 9.5\n").unwrap();
        assert_eq!(t.0["SIL950"].plateau_force, 1.2);
        assert_eq!(t.0["TPU95A"], MaterialModel::tpu95a());
        assert!(MaterialTable::with_overrides("[materials.X]\nplateau_force = 1\n").is_err());
    }

    #[test]
    fn plan_file() {
        let p = parse_plan("theta_grasp = 57.6\ntheta_release_bottom = 46.8\ntheta_release_top = 0\n").unwrap();
        assert_eq!(p.theta_release_top, 0.0);
        assert!(parse_plan("theta_grasp = 1\n").is_err());
    }
}
