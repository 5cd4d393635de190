//! Counts frame shifts in the relation graph of each bundled scene, with
//! and without reasoning inside unit frames.

use relayout::graph::{build_graph, decomposition_savings, UnitNodes};
use relayout::harness::fixtures;
use relayout::scene::parse_scene;

fn main() {
    for (name, text) in fixtures::ALL {
        let spec = parse_scene(text).expect("bundled scene parses");
        let g = build_graph(&spec);
        let report = decomposition_savings(&g, &UnitNodes::from_spec(&spec));
        println!("== {name}");
        print!("{}", report.to_text());
        assert_eq!(report.delta, report.closed_form);
    }
}
