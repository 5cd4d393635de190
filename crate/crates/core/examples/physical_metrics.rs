//! Collision and out-of-room rates of a hand-made layout.

use relayout::harness::{eval_physical, footprints, overlap_area};
use relayout::scene::{parse_scene, Layout, LayoutPose};

const SCENE: &str = r#"{
  "room": {"length": 4, "width": 3, "height": 2.5},
  "assets": [
    {"id": "sofa", "size": [2.0, 0.9, 0.8]},
    {"id": "table", "size": [1.0, 0.6, 0.45]},
    {"id": "lamp", "size": [0.4, 0.4, 1.6]},
    {"id": "plant", "size": [0.5, 0.5, 1.0]}
  ]
}"#;

fn main() {
    let spec = parse_scene(SCENE).expect("scene parses");
    let mut layout = Layout::default();
    for (id, x, y, theta) in [
        ("sofa", 2.0, 0.5, 0.0),
        ("table", 2.2, 1.2, 0.3),
        ("lamp", 3.9, 2.6, 0.0),
        ("plant", 0.4, 2.5, 0.0),
    ] {
        layout.poses.insert(
            id.to_string(),
            LayoutPose {
                x,
                y,
                z: 0.0,
                theta,
            },
        );
    }
    let report = eval_physical(&spec, &layout).expect("every asset is posed");
    print!("{}", report.to_text());

    let boxes = footprints(&spec, &layout).expect("every asset is posed");
    println!(
        "sofa/table overlap {:.4} m2",
        overlap_area(&boxes[0], &boxes[1])
    );
}
