use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use origami_grasp::commands::{self, perturb_materials, perturb_table, ScenarioCommand, Status};
use origami_grasp::demos::{demo, run_demo_suite};
use origami_grasp::output::{render, render_many, Format};
use origami_grasp::scenario::{parse_plan, parse_scenario_with, MaterialTable, ScenarioFile, SceneKind};
use origami_grasp::sweep::{run_sweep, SWEEP_KEY};
use origami_grasp::CliError;

#[derive(Parser)]
#[command(
    name = "origami-grasp",
    version,
    about = "Grasp mechanics for a 1-DoF origami-module gripper"
)]
struct Cli {
    /// Scenario file, or `@name` for a built-in demo.
    #[arg(long, global = true)]
    scene: Option<String>,
    /// Output file (directory for `demo`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Perturb material plateaus inside their deviation bands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Finger radius and opening over the servo range.
    Kinematics {
        #[arg(long, default_value_t = 5.0)]
        step: f64,
    },
    /// Force-strain and torque-angle curves.
    MaterialCurve {
        /// Restrict to these materials.
        #[arg(long)]
        material: Vec<String>,
        #[arg(long, default_value_t = 0.01)]
        strain_step: f64,
        #[arg(long, default_value_t = 0.5)]
        angle_step: f64,
    },
    /// Contacts, closure and lift capacity at one servo angle.
    Grasp,
    /// Pull-out traces.
    Pullout,
    /// Hold windows and a selective-release plan for two stacked objects.
    Multi,
    /// Sequential vs multi-object pick-and-place.
    Compare {
        /// Plan file with theta_grasp, theta_release_bottom, theta_release_top.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Also write the timed waypoints as CSV.
        #[arg(long)]
        emit_waypoints: Option<PathBuf>,
    },
    /// Run a command once per value of one numeric scenario field.
    Sweep {
        /// Field path, e.g. `environment.mu` or `objects.top.mass`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Command to run; defaults to the one matching the scenario kind.
        #[arg(long)]
        run: Option<String>,
    },
    /// Run every built-in demo and write the outputs into `--out`.
    Demo,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_scene(cli: &Cli, materials: &MaterialTable) -> Result<ScenarioFile, CliError> {
    let arg = cli
        .scene
        .as_deref()
        .ok_or_else(|| CliError::Usage("--scene is required for this command".into()))?;
    let text = match arg.strip_prefix('@') {
        Some(name) => demo(name)
            .ok_or_else(|| CliError::Usage(format!("no built-in demo named {name:?}")))?
            .to_string(),
        None => read(Path::new(arg))?,
    };
    let mut scn = parse_scenario_with(&text, materials)?;
    if let Some(seed) = cli.seed {
        perturb_materials(&mut scn, seed)?;
    }
    Ok(scn)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn default_command(kind: SceneKind) -> ScenarioCommand {
    match kind {
        SceneKind::SingleGrasp => ScenarioCommand::Grasp,
        SceneKind::Pullout => ScenarioCommand::Pullout,
        SceneKind::Stacked => ScenarioCommand::Multi,
        SceneKind::PickPlace => ScenarioCommand::Compare,
    }
}

fn execute(cli: &Cli) -> Result<Status, CliError> {
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let mut materials = MaterialTable::from_env()?;
    match &cli.command {
        Command::Kinematics { step } => {
            let gripper = match cli.scene {
                Some(_) => load_scene(cli, &materials)?.gripper,
                None => Default::default(),
            };
            emit(&cli.out, &render(&commands::kinematics(&gripper, *step)?, format))?;
            Ok(Status::Ok)
        }
        Command::MaterialCurve {
            material,
            strain_step,
            angle_step,
        } => {
            if cli.scene.is_some() {
                materials.0 = load_scene(cli, &materials)?.materials;
            } else if let Some(seed) = cli.seed {
                perturb_table(&mut materials.0, seed)?;
            }
            for m in material {
                if !materials.0.contains_key(m) {
                    return Err(CliError::Usage(format!("unknown material {m:?}")));
                }
            }
            let picked: Vec<_> = materials
                .0
                .values()
                .filter(|m| material.is_empty() || material.contains(&m.name))
                .cloned()
                .collect();
            emit(
                &cli.out,
                &render(&commands::material_curve(&picked, *strain_step, *angle_step)?, format),
            )?;
            Ok(Status::Ok)
        }
        Command::Grasp | Command::Pullout | Command::Multi => {
            let scn = load_scene(cli, &materials)?;
            let which = match cli.command {
                Command::Grasp => ScenarioCommand::Grasp,
                Command::Pullout => ScenarioCommand::Pullout,
                _ => ScenarioCommand::Multi,
            };
            let o = commands::run(which, &scn)?;
            emit(&cli.out, &render(&o.record, format))?;
            Ok(o.status)
        }
        Command::Compare { plan, emit_waypoints } => {
            let scn = load_scene(cli, &materials)?;
            let plan = match plan {
                Some(p) => Some(parse_plan(&read(p)?)?),
                None => None,
            };
            let o = commands::compare(&scn, plan)?;
            emit(&cli.out, &render(&o.record, format))?;
            if let (Some(path), Some(wp)) = (emit_waypoints, &o.waypoints) {
                std::fs::write(path, wp.to_csv()).map_err(|e| CliError::io(path, e))?;
            }
            Ok(o.status)
        }
        Command::Sweep { axis, values, run } => {
            let scn = load_scene(cli, &materials)?;
            let which = match run {
                Some(name) => ScenarioCommand::parse(name).ok_or_else(|| {
                    CliError::Usage(format!("--run must be grasp, pullout, multi or compare, got {name:?}"))
                })?,
                None => default_command(scn.kind),
            };
            let outcomes = run_sweep(&scn, axis, values, which)?;
            let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
            emit(&cli.out, &render_many(&records, &[SWEEP_KEY], format))?;
            Ok(if outcomes.iter().all(|o| o.status == Status::Ok) {
                Status::Ok
            } else {
                Status::Infeasible
            })
        }
        Command::Demo => {
            let dir = cli
                .out
                .as_ref()
                .ok_or_else(|| CliError::Usage("demo needs --out DIR".into()))?;
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            for (name, text) in run_demo_suite(&materials, format)? {
                let path = dir.join(name);
                std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            }
            Ok(Status::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Infeasible) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
