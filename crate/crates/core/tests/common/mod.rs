#![allow(dead_code)]

use origami_grasp_core::grasp::{pullout_capacity, resolve_contacts_at_level};
use origami_grasp_core::math::Vec2;
use origami_grasp_core::{ObjectShape, StackedScene, Wrench};

/// Force-closure oracle that never touches the LP: samples 360 directions of
/// wrench space on a Fibonacci sphere, then polishes the worst few by pattern
/// search. Closed iff every direction has strictly positive support.
pub fn sampled_force_closure(prims: &[Wrench]) -> bool {
    let pts: Vec<[f64; 3]> = prims.iter().map(|w| [w.fx, w.fy, w.tz]).collect();
    let scale = pts
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    let support = |d: [f64; 3]| {
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        pts.iter()
            .map(|p| (p[0] * d[0] + p[1] * d[1] + p[2] * d[2]) / (n * scale))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let n = 360;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut dirs: Vec<([f64; 3], f64)> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            let d = [r * a.cos(), r * a.sin(), z];
            (d, support(d))
        })
        .collect();
    dirs.sort_by(|a, b| a.1.total_cmp(&b.1));
    let tol = 1e-9;
    for &(start, h0) in dirs.iter().take(12) {
        let (mut d, mut h) = (start, h0);
        let mut step = 0.2;
        let mut iters = 0;
        while step > 1e-12 && h > tol && iters < 20_000 {
            iters += 1;
            let mut improved = false;
            for axis in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut c = d;
                    c[axis] += sign * step;
                    let len = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    c = [c[0] / len, c[1] / len, c[2] / len];
                    let hc = support(c);
                    if hc < h {
                        d = c;
                        h = hc;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        if h <= tol {
            return false;
        }
    }
    true
}

/// Hold predicate evaluated from first principles: the plateau strain test on
/// each finger from the raw opening formula, and the lift test from the
/// capacity of the level's contacts.
pub fn held_directly(object: &ObjectShape, level: usize, theta: f64, scene: &StackedScene) -> bool {
    let cfg = &scene.gripper;
    let law = &cfg.law;
    let open = 2.0 * (law.r0 - law.slope * theta - cfg.module_offset);
    let centre = Vec2::new(object.pose.x, object.pose.y);
    for i in 0..cfg.finger_count as usize {
        let u = cfg.finger_direction(i);
        let pen = centre.dot(u) + object.half_extent_along(u) - open / 2.0;
        let strain = pen / cfg.rest_depth;
        if strain < scene.material.strain_lo || strain > scene.material.strain_hi {
            return false;
        }
    }
    let cs = resolve_contacts_at_level(theta, object, cfg, &scene.material, &scene.env, level).unwrap();
    pullout_capacity(&cs) >= scene.safety * object.mass * scene.env.gravity
}

/// Longest run of held grid angles over the servo range in `step` increments.
pub fn swept_window(object: &ObjectShape, level: usize, scene: &StackedScene, step: f64) -> Option<(f64, f64)> {
    let law = &scene.gripper.law;
    let n = ((law.theta_max - law.theta_min) / step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|j| law.theta_min + step * j as f64).collect();
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (j, &th) in grid.iter().enumerate() {
        let h = held_directly(object, level, th, scene);
        match (h, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| j - 1 - s > b - a) {
                    best = Some((s, j - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if best.is_none_or(|(a, b)| n - s > b - a) {
            best = Some((s, n));
        }
    }
    best.map(|(a, b)| (grid[a], grid[b]))
}

use origami_grasp_core::{Environment, GripperConfig, MaterialModel};
use rand::Rng;

fn random_object<R: Rng>(rng: &mut R, size: f64) -> ObjectShape {
    let mass = rng.gen_range(0.01..0.8);
    match rng.gen_range(0..4) {
        0 => ObjectShape::sphere(size, mass),
        1 => ObjectShape::cube(size, mass),
        2 => ObjectShape::cylinder(size, rng.gen_range(40.0..100.0), mass),
        _ => ObjectShape::cuboid(size, rng.gen_range(0.5..1.0) * size, rng.gen_range(40.0..100.0), mass),
    }
}

/// Stacked scene with assorted shapes, sizes, masses, materials and friction.
pub fn random_scene<R: Rng>(rng: &mut R) -> StackedScene {
    let top_size = rng.gen_range(35.0..75.0);
    let bottom_size = rng.gen_range(30.0..top_size);
    let top = random_object(rng, top_size);
    let bottom = random_object(rng, bottom_size);
    let fingers = if rng.gen_bool(0.5) { 2 } else { 4 };
    let material = if rng.gen_bool(0.5) {
        MaterialModel::tpu95a()
    } else {
        MaterialModel::sil950()
    };
    let mut scene = StackedScene::new(top, bottom, GripperConfig::with_fingers(fingers), material);
    scene.env = Environment::with_mu(rng.gen_range(0.1..0.9));
    scene
}

/// Like [`random_scene`] but biased toward solvable stacks: light objects and
/// a bottom object 6 to 20 mm narrower than the top one.
pub fn random_plannable_scene<R: Rng>(rng: &mut R) -> StackedScene {
    let mut scene = random_scene(rng);
    let top_size = rng.gen_range(45.0..75.0);
    let bottom_size = top_size - rng.gen_range(6.0..20.0);
    scene.top = random_object(rng, top_size);
    scene.bottom = random_object(rng, bottom_size);
    scene.top.mass = rng.gen_range(0.005..0.1);
    scene.bottom.mass = rng.gen_range(0.005..0.1);
    scene
}
