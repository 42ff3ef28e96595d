use origami_grasp_core::mechanics::{bending_torque, compression_force};
use origami_grasp_core::MaterialModel;
use proptest::prelude::*;

fn materials() -> [MaterialModel; 2] {
    [MaterialModel::tpu95a(), MaterialModel::sil950()]
}

#[test]
fn continuity_at_breakpoints() {
    let eps = 1e-6;
    for m in materials() {
        for x in [m.strain_lo, m.strain_hi] {
            let jump = (compression_force(x + eps, &m).force - compression_force(x - eps, &m).force).abs();
            // slopes are at most the overload stiffness
            assert!(
                jump <= 2.0 * eps * m.overload_stiffness + 1e-12,
                "{} strain {x}: {jump}",
                m.name
            );
        }
        for a in [m.angle_lo, m.angle_hi] {
            let jump =
                (bending_torque(a + eps, &m).unwrap().torque - bending_torque(a - eps, &m).unwrap().torque).abs();
            assert!(
                jump <= 2.0 * eps * m.plateau_torque / m.angle_lo + 1e-12,
                "{} angle {a}: {jump}",
                m.name
            );
        }
    }
}

#[test]
fn plateaus_are_flat() {
    for m in materials() {
        for i in 0..100 {
            let s = m.strain_lo + (m.strain_hi - m.strain_lo) * i as f64 / 99.0;
            assert_eq!(compression_force(s, &m).force, m.plateau_force);
            let a = m.angle_lo + (m.angle_hi - m.angle_lo) * i as f64 / 99.0;
            assert_eq!(bending_torque(a, &m).unwrap().torque, m.plateau_torque);
        }
    }
}

#[test]
fn measured_plateaus() {
    let sil = MaterialModel::sil950();
    let tpu = MaterialModel::tpu95a();
    assert_eq!(sil.plateau_force, 1.0);
    assert!((4.5..=5.0).contains(&tpu.plateau_force));
    let (lo, hi) = tpu.force_bounds();
    assert!((lo - 4.5).abs() < 1e-12 && (hi - 5.0).abs() < 1e-12);
    assert_eq!(tpu.plateau_torque, 39.0);
    assert_eq!(sil.plateau_torque, 9.5);
}

#[test]
fn overfold_holds_plateau() {
    let m = MaterialModel::tpu95a();
    let r = bending_torque(40.0, &m).unwrap();
    assert_eq!(r.torque, 39.0);
    assert!(r.overfolded);
    assert!(!bending_torque(25.0, &m).unwrap().overfolded);
}

proptest! {
    #[test]
    fn compression_is_monotone(a in 0.0f64..2.0, d in 0.0f64..1.0) {
        for m in materials() {
            prop_assert!(compression_force(a + d, &m).force >= compression_force(a, &m).force);
        }
    }

    #[test]
    fn bending_is_monotone(a in 0.0f64..60.0, d in 0.0f64..30.0) {
        for m in materials() {
            prop_assert!(bending_torque(a + d, &m).unwrap().torque >= bending_torque(a, &m).unwrap().torque);
        }
    }
}
