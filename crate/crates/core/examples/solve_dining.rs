//! Solves the bundled dining set and prints the layout.

use relayout::harness::{eval_physical, fixtures};
use relayout::optimizer::{solve, OptimizerConfig};
use relayout::scene::{parse_scene, serialize_layout};

fn main() {
    let spec = parse_scene(fixtures::DINING_SET).expect("bundled scene parses");
    let config = OptimizerConfig {
        seed: spec.seed,
        ..Default::default()
    };
    let sol = solve(&spec, &config).expect("dining set is feasible");

    print!("{}", serialize_layout(&sol.layout));
    let report = eval_physical(&spec, &sol.layout).expect("every asset is posed");
    print!("{}", report.to_text());
    for (r, p) in spec.relations.iter().zip(sol.relation_penalties(&spec)) {
        println!(
            "{:<14} {:<8} -> {:<6} {p:.2e}",
            r.kind.name(),
            r.source(),
            r.target.as_deref().unwrap_or("scene")
        );
    }
}
