//! Scenarios shipped with the binary, addressable as `@name`.

use crate::commands::{self, ScenarioCommand, Status};
use crate::error::CliError;
use crate::output::{render, render_many, Format};
use crate::scenario::{parse_scenario_with, MaterialTable};
use crate::sweep::{run_sweep, SWEEP_KEY};

pub const DEMOS: &[(&str, &str)] = &[
    ("pullout_probes", include_str!("../demos/pullout_probes.toml")),
    ("stacked_spheres", include_str!("../demos/stacked_spheres.toml")),
    ("stacked_cubes", include_str!("../demos/stacked_cubes.toml")),
    ("stacked_sphere_cube", include_str!("../demos/stacked_sphere_cube.toml")),
    ("stacked_cuboids", include_str!("../demos/stacked_cuboids.toml")),
    ("pick_place", include_str!("../demos/pick_place.toml")),
];

pub const STACKED_DEMOS: [&str; 4] = [
    "stacked_spheres",
    "stacked_cubes",
    "stacked_sphere_cube",
    "stacked_cuboids",
];

pub fn demo(name: &str) -> Option<&'static str> {
    DEMOS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Every demo output as `(file name, contents)`, in a fixed order.
pub fn run_demo_suite(materials: &MaterialTable, format: Format) -> Result<Vec<(String, String)>, CliError> {
    let ext = format.extension();
    let mut out = Vec::new();
    let load = |name: &str| parse_scenario_with(demo(name).expect("shipped demo"), materials);

    let kin = commands::kinematics(&Default::default(), 5.0)?;
    out.push((format!("kinematics.{ext}"), render(&kin, format)));
    let mats: Vec<_> = materials.0.values().cloned().collect();
    let curves = commands::material_curve(&mats, 0.01, 0.5)?;
    out.push((format!("material_curve.{ext}"), render(&curves, format)));

    let probes = load("pullout_probes")?;
    let traces: Vec<_> = run_sweep(&probes, "pullout.theta", &[30.0, 60.0], ScenarioCommand::Pullout)?
        .into_iter()
        .map(|o| o.record)
        .collect();
    out.push((
        format!("pullout_probes.{ext}"),
        render_many(&traces, &[SWEEP_KEY], format),
    ));

    for name in STACKED_DEMOS {
        let o = commands::multi(&load(name)?)?;
        out.push((format!("{name}.{ext}"), render(&o.record, format)));
    }

    let cmp = commands::compare(&load("pick_place")?, None)?;
    if cmp.status == Status::Infeasible {
        return Err(CliError::Usage("pick_place demo has no feasible plan".into()));
    }
    out.push((format!("pick_place.{ext}"), render(&cmp.record, format)));
    if let Some(wp) = &cmp.waypoints {
        out.push(("pick_place_waypoints.csv".into(), wp.to_csv()));
    }
    Ok(out)
}
