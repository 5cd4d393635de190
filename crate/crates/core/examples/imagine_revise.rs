//! Imagines a quick layout of the conflict scene, lists the overlaps and
//! lets the deterministic reviser fix the relations.

use relayout::harness::fixtures;
use relayout::imagination::{imagine_and_revise, imagine_poses, BaselineReviser};
use relayout::scene::parse_scene;

fn main() {
    let spec = parse_scene(fixtures::CONFLICT).expect("bundled scene parses");
    for (id, p) in imagine_poses(&spec) {
        println!("{id:<10} ({:.2}, {:.2}, {:.2})", p.x, p.y, p.theta);
    }
    let (revised, report) =
        imagine_and_revise(&spec, &mut BaselineReviser, 10).expect("revision stays in scope");
    print!("{}", report.to_text());
    println!(
        "{} relations before, {} after",
        spec.relations.len(),
        revised.relations.len()
    );
}
