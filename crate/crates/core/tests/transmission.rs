use origami_grasp_core::{finger_radius, opening, theta_for_opening, GraspError, GripperConfig};
use proptest::prelude::*;

#[test]
fn endpoints_are_exact() {
    let cfg = GripperConfig::default();
    assert_eq!(opening(0.0, &cfg).unwrap(), 78.0);
    assert_eq!(opening(90.0, &cfg).unwrap(), 28.0);
    assert_eq!(finger_radius(45.0, &cfg.law).unwrap(), 41.5);
}

#[test]
fn forty_degrees() {
    let cfg = GripperConfig::default();
    let direct = 78.0 - 50.0 / 90.0 * 40.0;
    assert!((opening(40.0, &cfg).unwrap() - direct).abs() < 1e-12);
    assert!((theta_for_opening(direct, &cfg).unwrap() - 40.0).abs() < 1e-9);
}

#[test]
fn thousand_sample_round_trip() {
    let cfg = GripperConfig::default();
    for i in 0..1000 {
        let theta = 90.0 * i as f64 / 999.0;
        let back = theta_for_opening(opening(theta, &cfg).unwrap(), &cfg).unwrap();
        assert!((back - theta).abs() < 1e-9, "{theta} -> {back}");
    }
}

#[test]
fn out_of_range_is_rejected() {
    let cfg = GripperConfig::default();
    assert!(matches!(opening(-0.1, &cfg), Err(GraspError::OutOfRange { .. })));
    assert!(matches!(opening(90.1, &cfg), Err(GraspError::OutOfRange { .. })));
    assert!(matches!(
        theta_for_opening(80.0, &cfg),
        Err(GraspError::OpeningUnreachable { min, max, .. }) if min == 28.0 && max == 78.0
    ));
}

proptest! {
    #[test]
    fn round_trip(theta in 0.0f64..=90.0) {
        let cfg = GripperConfig::default();
        let back = theta_for_opening(opening(theta, &cfg).unwrap(), &cfg).unwrap();
        prop_assert!((back - theta).abs() < 1e-9);
    }

    #[test]
    fn opening_round_trip(target in 28.0f64..=78.0) {
        let cfg = GripperConfig::default();
        let o = opening(theta_for_opening(target, &cfg).unwrap(), &cfg).unwrap();
        prop_assert!((o - target).abs() < 1e-9);
    }

    #[test]
    fn strictly_decreasing(a in 0.0f64..90.0, d in 1e-6f64..90.0) {
        let cfg = GripperConfig::default();
        let b = (a + d).min(90.0);
        prop_assume!(b > a);
        prop_assert!(opening(a, &cfg).unwrap() > opening(b, &cfg).unwrap());
    }
}
