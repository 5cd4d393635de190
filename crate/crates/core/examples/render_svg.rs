//! Solves the mixed ten-asset scene and writes a top-down SVG.
//!
//! `cargo run --example render_svg -- out.svg`; prints to stdout without an
//! argument.

use relayout::harness::{fixtures, render_svg};
use relayout::optimizer::{solve, OptimizerConfig};
use relayout::scene::parse_scene;

fn main() {
    let spec = parse_scene(fixtures::MIXED_10).expect("bundled scene parses");
    let sol = solve(
        &spec,
        &OptimizerConfig {
            seed: spec.seed,
            ..Default::default()
        },
    )
    .expect("scene is feasible");
    let svg = render_svg(&spec, &sol.layout);
    match std::env::args().nth(1) {
        Some(path) => std::fs::write(&path, svg).expect("output is writable"),
        None => print!("{svg}"),
    }
}
