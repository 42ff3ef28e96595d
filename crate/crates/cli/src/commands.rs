//! One function per CLI command. Each turns a validated scenario into a
//! [`ResultRecord`]; none of them touch the filesystem.

use std::collections::BTreeMap;

use origami_grasp_core::grasp::{closure, pullout_trace, resolve_contacts};
use origami_grasp_core::mechanics::{bending_torque, compression_force};
use origami_grasp_core::trajectory::{
    build_trajectory, calibrate_layout, compare as compare_paths, Strategy, Trajectory,
};
use origami_grasp_core::{
    calibrate_mu, finger_radius, hold_window, lift_check, opening, plan_stacked, pullout_capacity, pullout_per_finger,
    simulate_plan, GraspError, GripperConfig, HoldWindow, LimitingFactor, MaterialModel, Plan, StackedScene,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::output::{Cell, ResultRecord, Table};
use crate::scenario::{to_toml, ScenarioFile};

/// Whether the command's physical goal was met.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub record: ResultRecord,
    pub status: Status,
    /// Timed waypoints, for `compare` only.
    pub waypoints: Option<Table>,
}

impl Outcome {
    fn ok(record: ResultRecord) -> Self {
        Outcome {
            record,
            status: Status::Ok,
            waypoints: None,
        }
    }
}

/// Commands that run against a scenario file; also the sweepable ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioCommand {
    Grasp,
    Pullout,
    Multi,
    Compare,
}

impl ScenarioCommand {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioCommand::Grasp => "grasp",
            ScenarioCommand::Pullout => "pullout",
            ScenarioCommand::Multi => "multi",
            ScenarioCommand::Compare => "compare",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            ScenarioCommand::Grasp,
            ScenarioCommand::Pullout,
            ScenarioCommand::Multi,
            ScenarioCommand::Compare,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

pub fn run(command: ScenarioCommand, scn: &ScenarioFile) -> Result<Outcome, CliError> {
    match command {
        ScenarioCommand::Grasp => grasp(scn),
        ScenarioCommand::Pullout => pullout(scn),
        ScenarioCommand::Multi => multi(scn),
        ScenarioCommand::Compare => compare(scn, None),
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn positive_step(name: &'static str, step: f64) -> Result<(), CliError> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive")))
    }
}

/// Finger radius and opening over the servo range.
pub fn kinematics(gripper: &GripperConfig, step: f64) -> Result<ResultRecord, CliError> {
    positive_step("step", step)?;
    gripper.validate()?;
    let law = &gripper.law;
    let mut rec = ResultRecord::new("kinematics", &format!("{gripper:?}\nstep={step}"));
    rec.table = Table::new(&["theta_deg", "radius_mm", "opening_mm"]);
    let mut thetas = grid(law.theta_min, law.theta_max, step);
    if thetas.last().is_some_and(|&t| t < law.theta_max) {
        thetas.push(law.theta_max);
    }
    for th in thetas {
        rec.table.push(vec![
            Cell::num(th),
            Cell::num(finger_radius(th, law)?),
            Cell::num(opening(th, gripper)?),
        ]);
    }
    let (min, max) = gripper.opening_range();
    rec.set_num("opening_min_mm", min);
    rec.set_num("opening_max_mm", max);
    Ok(rec)
}

/// Force-strain and torque-angle curves for each material.
pub fn material_curve(
    materials: &[MaterialModel],
    strain_step: f64,
    angle_step: f64,
) -> Result<ResultRecord, CliError> {
    positive_step("strain step", strain_step)?;
    positive_step("angle step", angle_step)?;
    let mut rec = ResultRecord::new(
        "material-curve",
        &format!("{materials:?}\nstrain_step={strain_step}\nangle_step={angle_step}"),
    );
    rec.table = Table::new(&["material", "curve", "x", "value", "flag"]);
    for m in materials {
        m.validate()?;
        let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in grid(0.0, 1.2, strain_step) {
            let r = compression_force(s, m);
            if s >= m.strain_lo && s <= m.strain_hi {
                fmin = fmin.min(r.force);
                fmax = fmax.max(r.force);
            }
            rec.table.push(vec![
                Cell::text(&m.name),
                Cell::text("compression"),
                Cell::num(s),
                Cell::num(r.force),
                r.overcompressed.into(),
            ]);
        }
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in grid(0.0, 40.0, angle_step) {
            let r = bending_torque(a, m)?;
            if a >= m.angle_lo && a <= m.angle_hi {
                tmin = tmin.min(r.torque);
                tmax = tmax.max(r.torque);
            }
            rec.table.push(vec![
                Cell::text(&m.name),
                Cell::text("bending"),
                Cell::num(a),
                Cell::num(r.torque),
                r.overfolded.into(),
            ]);
        }
        let n = &m.name;
        rec.set_num(&format!("{n}.plateau_force_min"), fmin);
        rec.set_num(&format!("{n}.plateau_force_max"), fmax);
        rec.set_num(&format!("{n}.plateau_torque_min"), tmin);
        rec.set_num(&format!("{n}.plateau_torque_max"), tmax);
    }
    Ok(rec)
}

fn selected<'a>(scn: &'a ScenarioFile, names: &'a [String]) -> Vec<&'a crate::scenario::NamedObject> {
    if names.is_empty() {
        scn.objects.iter().collect()
    } else {
        names.iter().filter_map(|n| scn.object(n)).collect()
    }
}

fn material<'a>(scn: &'a ScenarioFile, object: &str) -> &'a MaterialModel {
    scn.material_of(object)
        .expect("validated scenario resolves every material")
}

/// Contacts, closure and lift capacity for each object at one servo angle.
pub fn grasp(scn: &ScenarioFile) -> Result<Outcome, CliError> {
    let section = scn
        .grasp
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [grasp] section".into()))?;
    let mut rec = ResultRecord::new("grasp", &to_toml(scn));
    rec.table = Table::new(&[
        "object",
        "finger",
        "level",
        "mode",
        "penetration_mm",
        "bend_angle_deg",
        "normal_force_n",
        "inclination_deg",
        "overcompressed",
        "overfolded",
    ]);
    let mut all_hold = true;
    for o in selected(scn, &section.objects) {
        let m = material(scn, &o.name);
        let cs = resolve_contacts(section.theta, &o.object, &scn.gripper, m, &scn.environment)?;
        for c in &cs.contacts {
            rec.table.push(vec![
                Cell::text(&o.name),
                c.finger_index.into(),
                c.level.into(),
                Cell::text(match c.mode {
                    origami_grasp_core::ContactMode::Compression => "compression",
                    origami_grasp_core::ContactMode::Bending => "bending",
                }),
                Cell::opt(c.penetration()),
                Cell::opt(c.bend_angle()),
                Cell::num(c.normal_force),
                Cell::num(c.inclination),
                c.flags.overcompressed.into(),
                c.flags.overfolded.into(),
            ]);
        }
        let n = &o.name;
        rec.set(&format!("{n}.mode"), mode_name(cs.mode));
        rec.set(&format!("{n}.contacts"), cs.len());
        if !cs.is_empty() {
            let cl = closure(&cs)?;
            rec.set(&format!("{n}.force_closure"), cl.force_closure);
            rec.set(&format!("{n}.form_closure"), cl.form_closure);
            rec.set_num(&format!("{n}.margin"), cl.margin);
            rec.summary
                .insert(format!("{n}.wrap_angle_deg"), Cell::opt(cl.wrap_angle));
        } else {
            rec.set(&format!("{n}.force_closure"), false);
            rec.set(&format!("{n}.form_closure"), false);
        }
        let lift = lift_check(&cs, &o.object, scn.environment.gravity, section.safety);
        rec.set_num(&format!("{n}.capacity_n"), lift.capacity);
        rec.set_num(&format!("{n}.per_finger_n"), pullout_per_finger(&cs));
        rec.set_num(&format!("{n}.weight_n"), lift.weight);
        rec.set(&format!("{n}.lift_holds"), lift.holds);
        all_hold &= lift.holds;
    }
    rec.set_num("theta_deg", section.theta);
    rec.set_num("mu", scn.environment.mu);
    Ok(Outcome {
        record: rec,
        status: if all_hold { Status::Ok } else { Status::Infeasible },
        waypoints: None,
    })
}

fn mode_name(m: origami_grasp_core::GraspMode) -> &'static str {
    match m {
        origami_grasp_core::GraspMode::Parallel => "parallel",
        origami_grasp_core::GraspMode::VEnveloping => "v_enveloping",
    }
}

/// Quasi-static pull-out traces, optionally after calibrating mu.
pub fn pullout(scn: &ScenarioFile) -> Result<Outcome, CliError> {
    let section = scn
        .pullout
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [pullout] section".into()))?;
    let mut rec = ResultRecord::new("pullout", &to_toml(scn));
    let mut env = scn.environment;
    if let Some(c) = &section.calibrate {
        let probe = scn.object(&c.object).expect("validated reference");
        env.mu = calibrate_mu(
            c.target_per_finger,
            c.theta,
            &probe.object,
            &scn.gripper,
            material(scn, &c.object),
            &env,
        )?;
    }
    rec.set_num("mu", env.mu);
    rec.set("mu_calibrated", section.calibrate.is_some());
    rec.set_num("theta_deg", section.theta);
    rec.table = Table::new(&["object", "material", "mode", "lift_mm", "force_n", "engaged_levels"]);
    let lifts = grid(0.0, section.lift_max, section.lift_step);
    for o in selected(scn, &section.objects) {
        let m = material(scn, &o.name);
        let tr = pullout_trace(section.theta, &o.object, &scn.gripper, m, &env, &lifts)?;
        let cs = resolve_contacts(section.theta, &o.object, &scn.gripper, m, &env)?;
        for s in &tr.samples {
            rec.table.push(vec![
                Cell::text(&o.name),
                Cell::text(&m.name),
                Cell::text(mode_name(tr.mode)),
                Cell::num(s.lift),
                Cell::num(s.force),
                s.engaged_levels.into(),
            ]);
        }
        let n = &o.name;
        rec.set(&format!("{n}.mode"), mode_name(tr.mode));
        rec.set_num(&format!("{n}.peak_n"), tr.peak());
        rec.set_num(&format!("{n}.capacity_n"), pullout_capacity(&cs));
        rec.set_num(&format!("{n}.per_finger_n"), pullout_per_finger(&cs));
        rec.set_num(&format!("{n}.t2_mm"), tr.stages.t2);
        rec.summary.insert(format!("{n}.t3_mm"), Cell::opt(tr.stages.t3));
        rec.set_num(&format!("{n}.t4_mm"), tr.stages.t4);
    }
    Ok(Outcome::ok(rec))
}

/// Builds the planner's scene from a scenario's `[stacked]` section.
pub fn stacked_scene(scn: &ScenarioFile) -> Result<StackedScene, CliError> {
    let st = scn
        .stacked
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [stacked] section".into()))?;
    let top = scn.object(&st.top).expect("validated reference");
    let bottom = scn.object(&st.bottom).expect("validated reference");
    let mut scene = StackedScene::new(
        top.object,
        bottom.object,
        scn.gripper.clone(),
        material(scn, &st.top).clone(),
    );
    scene.env = scn.environment;
    scene.safety = st.safety;
    scene.stack_gap = st.stack_gap;
    Ok(scene)
}

fn limit_name(l: LimitingFactor) -> &'static str {
    match l {
        LimitingFactor::StrainRange => "strain_range",
        LimitingFactor::LiftCapacity => "lift_capacity",
        LimitingFactor::OpeningRange => "opening_range",
    }
}

fn put_window(rec: &mut ResultRecord, prefix: &str, w: Option<HoldWindow>) {
    rec.summary
        .insert(format!("{prefix}.theta_lo_deg"), Cell::opt(w.map(|w| w.theta_lo)));
    rec.summary
        .insert(format!("{prefix}.theta_hi_deg"), Cell::opt(w.map(|w| w.theta_hi)));
    rec.set(
        &format!("{prefix}.limiting_factor"),
        w.map_or("not_holdable", |w| limit_name(w.limiting_factor)),
    );
}

/// Hold windows and the selective-release plan for a stacked pair.
pub fn multi(scn: &ScenarioFile) -> Result<Outcome, CliError> {
    let scene = stacked_scene(scn)?;
    let mut rec = ResultRecord::new("multi", &to_toml(scn));
    let wt = hold_window(&scene.top, scene.top_level(), &scene)?;
    let wb = hold_window(&scene.bottom, scene.bottom_level(), &scene)?;
    put_window(&mut rec, "top", wt);
    put_window(&mut rec, "bottom", wb);
    if let (Some(t), Some(b)) = (wt, wb) {
        let hi = t.theta_hi.min(b.theta_lo);
        let ok = hi > t.theta_lo;
        rec.summary.insert(
            "release_bottom.theta_lo_deg".into(),
            Cell::opt(ok.then_some(t.theta_lo)),
        );
        rec.summary
            .insert("release_bottom.theta_hi_deg".into(), Cell::opt(ok.then_some(hi)));
    }
    rec.table = Table::new(&[
        "stage",
        "theta_deg",
        "top_held",
        "bottom_held",
        "top_capacity_n",
        "bottom_capacity_n",
    ]);
    match plan_stacked(&scene) {
        Ok(plan) => {
            let tl = simulate_plan(&plan, &scene)?;
            for (i, s) in tl.stages.iter().enumerate() {
                rec.table.push(vec![
                    (i + 1).into(),
                    Cell::num(s.theta),
                    s.state.top_held.into(),
                    s.state.bottom_held.into(),
                    Cell::num(s.top_capacity),
                    Cell::num(s.bottom_capacity),
                ]);
            }
            rec.set("feasible", true);
            rec.set("simulation_passed", tl.passed);
            rec.set_num("theta_grasp_deg", plan.theta_grasp);
            rec.set_num("theta_release_bottom_deg", plan.theta_release_bottom);
            rec.set_num("theta_release_top_deg", plan.theta_release_top);
            Ok(Outcome::ok(rec))
        }
        Err(GraspError::Infeasible(why)) => {
            rec.set("feasible", false);
            rec.set("infeasibility", why.to_string().as_str());
            Ok(Outcome {
                record: rec,
                status: Status::Infeasible,
                waypoints: None,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn waypoint_rows(table: &mut Table, strategy: &str, t: &Trajectory) {
    for (i, w) in t.waypoints.iter().enumerate() {
        table.push(vec![
            Cell::text(strategy),
            i.into(),
            Cell::num(w.position[0]),
            Cell::num(w.position[1]),
            Cell::num(w.position[2]),
            Cell::num(w.time),
            Cell::text(format!("{:?}", w.action).to_lowercase()),
            Cell::opt(w.servo_angle),
        ]);
    }
}

/// Sequential vs multi-object pick-and-place. `plan` overrides planning from
/// the `[stacked]` section.
pub fn compare(scn: &ScenarioFile, plan: Option<Plan>) -> Result<Outcome, CliError> {
    let pp = scn
        .pick_place
        .as_ref()
        .ok_or_else(|| CliError::Usage("scenario has no [pick_place] section".into()))?;
    let plan_input = match plan {
        Some(p) => format!("{p:?}"),
        None => String::new(),
    };
    let mut rec = ResultRecord::new("compare", &format!("{}\n{plan_input}", to_toml(scn)));
    let plan = match plan {
        Some(p) => Ok(p),
        None => plan_stacked(&stacked_scene(scn)?),
    };
    if let Err(e) = &plan {
        if !matches!(e, GraspError::Infeasible(_)) {
            return Err(e.clone().into());
        }
    }
    let mut scene = pp.scene;
    let mut infeasible = None;
    if let Some(c) = &pp.calibrate {
        match calibrate_layout(&scene, c.place_gap, &plan, c.distance_target, c.time_target) {
            Ok(s) => scene = s,
            Err(GraspError::Infeasible(why)) => infeasible = Some(why),
            Err(e) => return Err(e.into()),
        }
    }
    rec.table = Table::new(&["strategy", "distance_mm", "time_s"]);
    let mut wp = Table::new(&[
        "strategy",
        "index",
        "x_mm",
        "y_mm",
        "z_mm",
        "time_s",
        "action",
        "servo_angle_deg",
    ]);
    let seq = build_trajectory(&scene, Strategy::Sequential, &plan)?;
    waypoint_rows(&mut wp, "sequential", &seq);
    let d = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    rec.set_num("separation_mm", d(scene.pick, scene.place_top));
    rec.set_num("place_gap_mm", d(scene.place_bottom, scene.place_top));
    rec.set_num("travel_speed_mm_s", scene.travel_speed);
    rec.set("calibrated", pp.calibrate.is_some());
    let status = match (infeasible, compare_paths(&scene, &plan)) {
        (None, Ok(c)) => {
            rec.table.push(vec![
                Cell::text("sequential"),
                Cell::num(c.sequential_distance),
                Cell::num(c.sequential_time),
            ]);
            rec.table.push(vec![
                Cell::text("multi_object"),
                Cell::num(c.multi_distance),
                Cell::num(c.multi_time),
            ]);
            let multi = build_trajectory(&scene, Strategy::MultiObject, &plan)?;
            waypoint_rows(&mut wp, "multi_object", &multi);
            rec.set_num("distance_reduction_pct", c.distance_reduction);
            rec.set_num("time_reduction_pct", c.time_reduction);
            Status::Ok
        }
        (Some(why), _) | (None, Err(GraspError::Infeasible(why))) => {
            rec.set("infeasibility", why.to_string().as_str());
            Status::Infeasible
        }
        (None, Err(e)) => return Err(e.into()),
    };
    rec.set("feasible", status == Status::Ok);
    Ok(Outcome {
        record: rec,
        status,
        waypoints: Some(wp),
    })
}

/// Draws every material's plateaus uniformly inside its deviation band.
pub fn perturb_materials(scn: &mut ScenarioFile, seed: u64) -> Result<(), CliError> {
    perturb_table(&mut scn.materials, seed)
}

/// Scales each plateau by a uniform draw inside its deviation band.
pub fn perturb_table(materials: &mut BTreeMap<String, MaterialModel>, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in materials.values_mut() {
        let f = 1.0 + m.force_band * rng.gen_range(-1.0..=1.0);
        let t = 1.0 + m.torque_band * rng.gen_range(-1.0..=1.0);
        *m = m.scaled(f, t)?;
    }
    Ok(())
}
