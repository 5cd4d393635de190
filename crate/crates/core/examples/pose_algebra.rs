//! Composing and inverting planar poses, and why member poses survive a
//! move of their anchor.

use relayout::geometry::{compose, invert, FootprintBox, Pose2D};

fn main() {
    let table = Pose2D::new(2.5, 2.0, 0.4);
    let chair_local = Pose2D::new(0.0, 0.825, -std::f64::consts::FRAC_PI_2);
    let chair = compose(&table, &chair_local);
    println!(
        "chair in the room: ({:.3}, {:.3}, {:.3})",
        chair.x, chair.y, chair.theta
    );

    let back = compose(&invert(&table), &chair);
    println!(
        "recovered local pose differs by {:.1e}",
        back.max_abs_diff(&chair_local)
    );

    // Moving the table moves the chair without touching its local pose.
    let moved = Pose2D::new(4.0, 1.0, -1.2);
    let a = compose(&moved, &chair_local);
    let b = compose(
        &moved,
        &Pose2D::new(0.0, -0.825, std::f64::consts::FRAC_PI_2),
    );
    println!("chair-to-chair relative pose: {:?}", a.relative_to_self(&b));

    let fp = FootprintBox::from_size(chair, 0.45, 0.45);
    for c in fp.corners() {
        println!("corner ({:.3}, {:.3})", c[0], c[1]);
    }
}
