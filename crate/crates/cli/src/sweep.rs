//! Batch sweeps over one numeric scenario field.
//!
//! Axis paths follow the scenario document: `environment.mu`,
//! `gripper.law.r0`, `materials.TPU95A.plateau_force`, `pullout.theta`.
//! Objects are addressed by name, e.g. `objects.top.mass`.

use rayon::prelude::*;
use toml::{Table, Value};

use crate::commands::{run, Outcome, ScenarioCommand};
use crate::error::CliError;
use crate::output::Cell;
use crate::scenario::{parse_scenario_with, to_table, MaterialTable, ScenarioFile};

/// Summary key holding the swept value in every record.
pub const SWEEP_KEY: &str = "sweep_value";

fn collect_paths(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Integer(_) | Value::Float(_) => out.push(prefix.to_string()),
        Value::Table(t) => {
            for (k, inner) in t {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                collect_paths(inner, &p, out);
            }
        }
        Value::Array(items) if prefix == "objects" => {
            for item in items {
                if let Some(Value::String(name)) = item.get("name") {
                    collect_paths(item, &format!("objects.{name}"), out);
                }
            }
        }
        _ => {}
    }
}

/// Every numeric scalar of `scn` that a sweep may vary.
pub fn sweepable_paths(scn: &ScenarioFile) -> Vec<String> {
    let mut out = Vec::new();
    collect_paths(&Value::Table(to_table(scn)), "", &mut out);
    out
}

fn lookup<'a>(doc: &'a mut Table, path: &str) -> Option<&'a mut Value> {
    let mut parts = path.split('.');
    let first = parts.next()?;
    let mut cur: &mut Value = doc.get_mut(first)?;
    if first == "objects" {
        let name = parts.next()?;
        let Value::Array(items) = cur else { return None };
        cur = items
            .iter_mut()
            .find(|o| o.get("name").and_then(Value::as_str) == Some(name))?;
    }
    for part in parts {
        cur = cur.as_table_mut()?.get_mut(part)?;
    }
    match cur {
        Value::Integer(_) | Value::Float(_) => Some(cur),
        _ => None,
    }
}

fn with_value(base: &Table, axis: &str, value: f64) -> Result<Table, CliError> {
    let mut doc = base.clone();
    let slot = lookup(&mut doc, axis).ok_or_else(|| CliError::Usage(format!("not sweepable: {axis}")))?;
    *slot = match slot {
        Value::Integer(_) if value.fract() == 0.0 => Value::Integer(value as i64),
        Value::Integer(_) => return Err(CliError::Usage(format!("{axis} takes integer values, got {value}"))),
        _ => Value::Float(value),
    };
    Ok(doc)
}

/// Runs `command` once per value with `axis` set to that value. Values are
/// evaluated in parallel; results come back in input order.
pub fn run_sweep(
    base: &ScenarioFile,
    axis: &str,
    values: &[f64],
    command: ScenarioCommand,
) -> Result<Vec<Outcome>, CliError> {
    let doc = to_table(base);
    if lookup(&mut doc.clone(), axis).is_none() {
        return Err(CliError::Usage(format!(
            "unknown sweep axis {axis:?}; sweepable paths: {}",
            sweepable_paths(base).join(", ")
        )));
    }
    // The serialized scenario carries its full material table.
    let materials = MaterialTable(Default::default());
    values
        .par_iter()
        .map(|&v| {
            let text = toml::to_string(&with_value(&doc, axis, v)?).expect("tables serialize");
            let scn = parse_scenario_with(&text, &materials)?;
            let mut out = run(command, &scn)?;
            out.record.summary.insert(SWEEP_KEY.into(), Cell::num(v));
            out.record.set("sweep_axis", axis);
            Ok(out)
        })
        .collect()
}
