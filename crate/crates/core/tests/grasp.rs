mod common;

use origami_grasp_core::grasp::{
    calibrate_mu, closure, contact_wrench_primitives, is_force_closure, is_form_closure, pullout_capacity,
    pullout_per_finger, pullout_trace, resolve_contacts, ContactFlags, ContactMode, ContactRecord, ContactSet,
    Deformation, GraspMode,
};
use origami_grasp_core::math::Vec2;
use origami_grasp_core::{grasp_mode, Environment, GraspError, GripperConfig, MaterialModel, ObjectShape, Shape};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn contact(angle: f64, tilt: f64, force: f64, mu: f64) -> ContactRecord {
    let u = Vec2::from_angle_deg(angle);
    ContactRecord {
        finger_index: 0,
        level: 0,
        mode: ContactMode::Compression,
        deformation: Deformation::Penetration(1.0),
        normal_force: force,
        normal_direction: -Vec2::from_angle_deg(angle + tilt),
        contact_point: u * 30.0,
        inclination: 0.0,
        mu,
        flags: ContactFlags::default(),
    }
}

fn set(contacts: Vec<ContactRecord>) -> ContactSet {
    ContactSet {
        mode: GraspMode::Parallel,
        finger_count: 2,
        characteristic_radius: 30.0,
        contacts,
    }
}

fn random_set(rng: &mut ChaCha8Rng) -> ContactSet {
    let n = rng.gen_range(2..=8);
    let frictionless = rng.gen_bool(0.3);
    set((0..n)
        .map(|_| {
            contact(
                rng.gen_range(0.0..360.0),
                rng.gen_range(-40.0..40.0),
                rng.gen_range(0.1..5.0),
                if frictionless { 0.0 } else { rng.gen_range(0.0..1.0) },
            )
        })
        .collect())
}

#[test]
fn lp_matches_sampling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut closed, mut open) = (0, 0);
    for trial in 0..200 {
        let cs = random_set(&mut rng);
        let prims = contact_wrench_primitives(&cs).unwrap();
        let lp = is_force_closure(&prims).unwrap().force_closure;
        assert_eq!(lp, common::sampled_force_closure(&prims), "trial {trial}: {cs:?}");
        if lp {
            closed += 1;
        } else {
            open += 1;
        }
    }
    assert!(closed > 20 && open > 20, "closed {closed}, open {open}");
}

#[test]
fn margin_is_positive_iff_closed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let prims = contact_wrench_primitives(&random_set(&mut rng)).unwrap();
        let r = is_force_closure(&prims).unwrap();
        assert_eq!(r.force_closure, r.margin > 0.0);
    }
}

#[test]
fn opposing_frictionless_pair_is_open() {
    let cs = set(vec![contact(0.0, 0.0, 1.0, 0.0), contact(180.0, 0.0, 1.0, 0.0)]);
    let prims = contact_wrench_primitives(&cs).unwrap();
    assert!(prims.iter().all(|w| w.fy.abs() < 1e-12 && w.tz.abs() < 1e-12));
    assert!(!is_force_closure(&prims).unwrap().force_closure);
}

#[test]
fn primitive_examples() {
    let one = set(vec![contact(0.0, 0.0, 2.0, 0.5)]);
    let prims = contact_wrench_primitives(&one).unwrap();
    assert_eq!(prims.len(), 2);
    for w in &prims {
        let angle = w.fy.atan2(-w.fx).to_degrees().abs();
        assert!((angle - 0.5f64.atan().to_degrees()).abs() < 1e-9);
        assert!((w.fx.hypot(w.fy) - 2.0 * 1.25f64.sqrt()).abs() < 1e-12);
    }
    assert!(contact_wrench_primitives(&set(vec![])).is_err());
    assert!(matches!(
        is_force_closure(&prims[..1]),
        Err(GraspError::TooFewPrimitives(1))
    ));
    // identical primitives are degenerate
    let same = vec![prims[0]; 4];
    let r = is_force_closure(&same).unwrap();
    assert!(!r.force_closure && r.margin == 0.0);
}

#[test]
fn enveloping_and_parallel_examples() {
    let env4 = set((0..4).map(|i| contact(90.0 * i as f64, 0.0, 1.0, 0.3)).collect());
    let p = contact_wrench_primitives(&env4).unwrap();
    assert!(is_force_closure(&p).unwrap().force_closure);
    assert!(common::sampled_force_closure(&p));

    let cube = ObjectShape::cube(60.0, 0.1);
    let cs = resolve_contacts(
        40.0,
        &cube,
        &GripperConfig::default(),
        &MaterialModel::sil950(),
        &Environment::default(),
    )
    .unwrap();
    assert_eq!(cs.len(), 4);
    let r = closure(&cs).unwrap();
    assert!(r.force_closure);
    assert!(common::sampled_force_closure(&contact_wrench_primitives(&cs).unwrap()));
}

#[test]
fn form_closure_examples() {
    let cfg = GripperConfig::with_fingers(4);
    let sphere = ObjectShape::sphere(60.0, 0.05);
    let cs = resolve_contacts(60.0, &sphere, &cfg, &MaterialModel::tpu95a(), &Environment::default()).unwrap();
    let f = is_form_closure(&cs).unwrap();
    assert!(f.closed);
    assert!((f.wrap_angle - 240.0).abs() < 1e-9);

    let two = resolve_contacts(
        60.0,
        &sphere,
        &GripperConfig::default(),
        &MaterialModel::tpu95a(),
        &Environment::default(),
    )
    .unwrap();
    let f2 = is_form_closure(&two).unwrap();
    assert!(!f2.closed && f2.wrap_angle < 200.0);

    let cube = resolve_contacts(
        40.0,
        &ObjectShape::cube(60.0, 0.1),
        &GripperConfig::default(),
        &MaterialModel::sil950(),
        &Environment::default(),
    )
    .unwrap();
    assert_eq!(is_form_closure(&cube), Err(GraspError::ParallelFormClosure));
}

#[test]
fn capacity_examples() {
    let four = set((0..4).map(|i| contact(90.0 * i as f64, 0.0, 1.0, 0.5)).collect());
    assert_eq!(pullout_capacity(&four), 2.0);
    assert_eq!(pullout_capacity(&four.scaled(0.0)), 0.0);
}

#[test]
fn calibrated_mu_hits_target() {
    let cfg = GripperConfig::default();
    let probe = ObjectShape::curved_block(45.5, 66.0, 100.0, 0.0);
    let tpu = MaterialModel::tpu95a();
    let mu = calibrate_mu(1.5, 60.0, &probe, &cfg, &tpu, &Environment::default()).unwrap();
    let cs = resolve_contacts(60.0, &probe, &cfg, &tpu, &Environment::with_mu(mu)).unwrap();
    assert_eq!(cs.mode, GraspMode::VEnveloping);
    assert!((pullout_per_finger(&cs) - 1.5).abs() < 1e-9);
    assert!((pullout_capacity(&cs) - 3.0).abs() < 1e-9);
    // lower than the frictionless floor cannot be reached
    assert!(matches!(
        calibrate_mu(0.01, 60.0, &probe, &cfg, &tpu, &Environment::default()),
        Err(GraspError::CalibrationUnreachable { .. })
    ));
}

fn lift_grid(max: f64) -> Vec<f64> {
    (0..=(max as usize * 2)).map(|i| i as f64 * 0.5).collect()
}

#[test]
fn parallel_trace_shape() {
    let cfg = GripperConfig::default();
    let probe = ObjectShape::cuboid(66.0, 40.0, 100.0, 0.0);
    for material in [MaterialModel::tpu95a(), MaterialModel::sil950()] {
        let env = Environment::default();
        let tr = pullout_trace(30.0, &probe, &cfg, &material, &env, &lift_grid(120.0)).unwrap();
        assert_eq!(tr.mode, GraspMode::Parallel);
        let full = pullout_capacity(&resolve_contacts(30.0, &probe, &cfg, &material, &env).unwrap());
        assert_eq!(tr.samples[0].force, full);
        // bottom-only plateau: 2 contacts at mu * plateau force
        let t3 = tr.stages.t3.unwrap();
        let s3 = tr.samples.iter().find(|s| s.lift == t3).unwrap();
        assert!((s3.force - 2.0 * env.mu * material.plateau_force).abs() < 1e-9);
        for s in &tr.samples {
            if s.lift >= tr.stages.t4 {
                assert_eq!(s.force, 0.0);
            }
        }
        for w in tr.samples.windows(2) {
            assert!(w[1].force <= w[0].force);
        }
    }
}

#[test]
fn missing_lift_grid() {
    let r = pullout_trace(
        30.0,
        &ObjectShape::cuboid(66.0, 40.0, 100.0, 0.0),
        &GripperConfig::default(),
        &MaterialModel::tpu95a(),
        &Environment::default(),
        &[],
    );
    assert_eq!(r.unwrap_err(), GraspError::EmptyLiftGrid);
}

fn scale_shape(s: Shape, c: f64) -> Shape {
    match s {
        Shape::Sphere { diameter } => Shape::Sphere { diameter: diameter * c },
        Shape::Cube { edge } => Shape::Cube { edge: edge * c },
        Shape::Cuboid { width, depth, height } => Shape::Cuboid {
            width: width * c,
            depth: depth * c,
            height: height * c,
        },
        Shape::Cylinder { diameter, height } => Shape::Cylinder {
            diameter: diameter * c,
            height: height * c,
        },
        Shape::CurvedBlock { radius, width, height } => Shape::CurvedBlock {
            radius: radius * c,
            width: width * c,
            height: height * c,
        },
    }
}

fn any_shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        (10.0f64..200.0).prop_map(|d| Shape::Sphere { diameter: d }),
        (10.0f64..200.0).prop_map(|e| Shape::Cube { edge: e }),
        (10.0f64..200.0, 10.0f64..200.0).prop_map(|(d, h)| Shape::Cylinder { diameter: d, height: h }),
        (10.0f64..100.0, 1.0f64..3.0).prop_map(|(w, k)| Shape::CurvedBlock {
            radius: w / 2.0 * k,
            width: w,
            height: 100.0
        }),
    ]
}

proptest! {
    #[test]
    fn scaling_forces_keeps_decision(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = random_set(&mut rng);
        let a = is_force_closure(&contact_wrench_primitives(&cs).unwrap()).unwrap().force_closure;
        let b = is_force_closure(&contact_wrench_primitives(&cs.scaled(c)).unwrap()).unwrap().force_closure;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn friction_only_helps(seed in any::<u64>(), extra in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = random_set(&mut rng);
        let mut more = cs.clone();
        for c in &mut more.contacts {
            c.mu += extra;
        }
        let a = is_force_closure(&contact_wrench_primitives(&cs).unwrap()).unwrap().force_closure;
        let b = is_force_closure(&contact_wrench_primitives(&more).unwrap()).unwrap().force_closure;
        prop_assert!(!a || b);
    }

    #[test]
    fn parallel_capacity_is_linear_in_mu(edge in 50.0f64..75.0, theta in 0.0f64..=90.0, mu in 0.0f64..2.0) {
        let cfg = GripperConfig::default();
        let cube = ObjectShape::cube(edge, 0.1);
        let m = MaterialModel::tpu95a();
        let at = |mu: f64| pullout_capacity(&resolve_contacts(theta, &cube, &cfg, &m, &Environment::with_mu(mu)).unwrap());
        let unit = at(1.0);
        prop_assert!((at(mu) - mu * unit).abs() <= 1e-9 * (1.0 + unit));
    }

    #[test]
    fn mode_is_scale_invariant(shape in any_shape(), c in 0.1f64..10.0) {
        let cfg = GripperConfig::default();
        let mut scaled_cfg = cfg.clone();
        scaled_cfg.module_height *= c;
        let obj = ObjectShape::new(shape, 0.1);
        let big = ObjectShape::new(scale_shape(shape, c), 0.1);
        prop_assert_eq!(grasp_mode(&obj, &cfg), grasp_mode(&big, &scaled_cfg));
    }
}
