mod common;

use interact_core::math::Vec3;
use interact_core::physics::{collide_pair, Shape};
use interact_core::scene::ColliderShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::oracles::{brute_force_planes, random_pose, random_shape, sample_overlap, Overlap, Solid};

#[test]
fn brute_force_planes_of_a_cube() {
    let v: Vec<Vec3> = (0..8)
        .map(|i| {
            let s = |b: usize| if i >> b & 1 == 1 { 1.0 } else { -1.0 };
            Vec3::new(s(0), s(1), s(2))
        })
        .collect();
    let planes = brute_force_planes(&v);
    assert_eq!(planes.len(), 6);
    let cube = Solid::new(ColliderShape::ConvexHull { vertices: v }, Default::default());
    assert_eq!(cube.measure(&Vec3::zeros()), -1.0);
    assert!((cube.measure(&Vec3::new(3.0, 0.0, 0.0)) - 2.0).abs() < 1e-12);
}

#[test]
fn box_measure_is_the_signed_distance() {
    let b = Solid::new(
        ColliderShape::Box {
            half_extents: Vec3::new(1.0, 2.0, 3.0),
        },
        Default::default(),
    );
    assert_eq!(b.measure(&Vec3::new(0.0, 0.0, 0.0)), -1.0);
    assert_eq!(b.measure(&Vec3::new(4.0, 0.0, 0.0)), 3.0);
    assert!((b.measure(&Vec3::new(4.0, 6.0, 0.0)) - 5.0).abs() < 1e-12);
}

/// Verdicts agree with sampling except for pairs within 1e-3 of touching.
#[test]
fn verdicts_match_the_sampling_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut deep, mut apart) = (0, 0);
    for i in 0..150 {
        let (ka, kb) = (random_shape(&mut rng), random_shape(&mut rng));
        let (pa, pb) = (random_pose(&mut rng, 0.35), random_pose(&mut rng, 0.35));
        let (oa, ob) = (Solid::new(ka.clone(), pa), Solid::new(kb.clone(), pb));
        let (verdict, m) = sample_overlap(&oa, &ob, 20_000, 1e-3, &mut rng);
        let engine = match collide_pair(&Shape::new(ka.clone()), &pa, &Shape::new(kb.clone()), &pb) {
            Ok(c) => c.is_some(),
            Err(e) => e.fallback.depth > 0.0,
        };
        match verdict {
            Overlap::Deep => {
                deep += 1;
                assert!(engine, "pair {i}: oracle overlap {m}, engine says apart\n{ka:?} {pa:?}\n{kb:?} {pb:?}");
            }
            Overlap::Apart => {
                apart += 1;
                assert!(!engine, "pair {i}: oracle gap {m}, engine says touching\n{ka:?} {pa:?}\n{kb:?} {pb:?}");
            }
            Overlap::Grazing => {}
        }
    }
    assert!(deep > 30 && apart > 30, "deep {deep}, apart {apart}");
}

#[test]
fn sphere_sphere_depth_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    use rand::Rng;
    for _ in 0..1000 {
        let (ra, rb) = (rng.random_range(0.01..1.0), rng.random_range(0.01..1.0));
        let ca = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let cb = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let want = ra + rb - (ca - cb).norm();
        let got = collide_pair(
            &Shape::new(ColliderShape::Sphere { radius: ra }),
            &interact_core::Pose::from_position(ca),
            &Shape::new(ColliderShape::Sphere { radius: rb }),
            &interact_core::Pose::from_position(cb),
        )
        .unwrap();
        match got {
            Some(c) => assert!((c.depth - want).abs() <= 1e-9),
            None => assert!(want <= 0.0),
        }
    }
}
