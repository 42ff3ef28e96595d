//! Quasi-static grasp mechanics for a multi-finger gripper whose fingers carry
//! constant-force origami modules and are driven by a single servo through a
//! spiral-guide transmission.
//!
//! The crate is `no_std` (it needs `alloc`) and purely computational:
//!
//! - [`transmission`] maps servo angle to finger radius and module opening.
//! - [`mechanics`] holds the piecewise constitutive curves of one module.
//! - [`object`] describes canonical grasped shapes.
//! - [`grasp`] resolves contacts, classifies grasp mode, and evaluates force
//!   closure, form closure, pull-out capacity and pull-out traces.
//! - [`planner`] computes servo-angle hold windows and stacked-object plans.
//! - [`trajectory`] builds timed pick-and-place paths and compares strategies.
//!
//! File formats, the CLI and batch sweeps live in the companion std crate.
#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod grasp;
pub mod lp;
pub mod math;
pub mod mechanics;
pub mod object;
pub mod planner;
pub mod trajectory;
pub mod transmission;

pub use error::{GraspError, Infeasibility, Result};
pub use grasp::{
    calibrate_mu, contact_wrench_primitives, grasp_mode, is_force_closure, is_form_closure, lift_check,
    pullout_capacity, pullout_per_finger, pullout_trace, resolve_contacts, ClosureResult, ContactFlags, ContactMode,
    ContactRecord, ContactSet, Deformation, Environment, FormClosure, GraspMode, LiftCheck, PulloutTrace, StageMarkers,
    TraceSample, Wrench,
};
pub use mechanics::{MaterialModel, DEFAULT_TORQUE_UNIT_SCALE};
pub use object::{ObjectShape, Pose, Shape};
pub use planner::{
    hold_window, plan_stacked, simulate_plan, HoldWindow, LimitingFactor, Plan, StackedScene, StageEval, StageState,
    Timeline,
};
pub use trajectory::{
    build_trajectory, compare, path_distance, process_time, Action, Comparison, PickPlaceScene, Strategy, Trajectory,
    Waypoint,
};
pub use transmission::{finger_radius, opening, theta_for_opening, GripperConfig, TransmissionLaw};
