//! Drops a box and a ball onto a floor and slides a crate to a stop.
//!
//! ```text
//! cargo run -p interact-core --example physics
//! ```

use interact_core::math::{Pose, Vec3};
use interact_core::physics::{RigidBody, Shape, World, WorldConfig};
use interact_core::scene::ColliderShape;

fn cuboid(x: f64, y: f64, z: f64) -> Shape {
    Shape::new(ColliderShape::Box {
        half_extents: Vec3::new(x, y, z),
    })
}

fn at(x: f64, y: f64, z: f64) -> Pose {
    Pose::from_position(Vec3::new(x, y, z))
}

fn main() {
    let mut w = World::new(WorldConfig::default());
    w.add_body(RigidBody::new("floor", cuboid(5.0, 5.0, 0.5), 0.0, at(0.0, 0.0, -0.5)))
        .unwrap();
    w.add_body(RigidBody::new("box", cuboid(0.1, 0.1, 0.1), 1.0, at(-1.0, 0.0, 1.0)))
        .unwrap();
    w.add_body(RigidBody::new(
        "ball",
        Shape::new(ColliderShape::Sphere { radius: 0.05 }),
        0.2,
        at(1.0, 0.0, 0.5),
    ))
    .unwrap();
    let mut crate_body = RigidBody::new("crate", cuboid(0.1, 0.1, 0.1), 1.0, at(0.0, 1.0, 0.1));
    crate_body.material = "steel".into();
    w.add_body(crate_body).unwrap();
    w.set_friction("steel", "default", 0.5);

    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "t", "box z", "ball z", "crate x", "contacts");
    for tick in 1..=240 {
        if tick == 30 {
            w.body_mut("crate").unwrap().linear_velocity.x = 1.0;
        }
        let report = w.step().expect("world stays finite");
        if tick % 20 == 0 {
            let z = |id: &str| w.body(id).unwrap().pose.position.z;
            println!(
                "{:>6.3} {:>8.4} {:>8.4} {:>8.4} {:>8}",
                w.time(),
                z("box"),
                z("ball"),
                w.body("crate").unwrap().pose.position.x,
                report.contacts.len()
            );
        }
    }
}
