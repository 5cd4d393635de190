//! Iterations to a tenth of the initial loss on the star-unit scene, with
//! unit-local members against an all-global parameterization.

use relayout::harness::{
    convergence_benchmark, curves_to_csv, fixtures, results_to_text, EMA_ALPHA,
};
use relayout::optimizer::OptimizerConfig;
use relayout::scene::parse_scene;

fn main() {
    let spec = parse_scene(fixtures::STAR_UNIT).expect("bundled scene parses");
    let results = convergence_benchmark(
        "star-unit",
        &spec,
        &[0, 1, 2, 3, 4],
        0.1,
        &OptimizerConfig::default(),
    );
    print!("{}", results_to_text(&results));

    let csv = curves_to_csv(&results, EMA_ALPHA);
    println!("first curve rows:");
    for line in csv.lines().take(6) {
        println!("{line}");
    }
}
