//! Physical metrics, rendering, benchmarks and the command-line front end.

mod bench;
pub mod cli;
pub mod fixtures;
mod metrics;
mod svg;

pub use bench::{
    convergence_benchmark, curves_to_csv, ema, iterations_to_threshold, normalized,
    results_to_text, summarize, BenchmarkResult, BenchmarkSummary, EMA_ALPHA,
};
pub use metrics::{
    eval_physical, eval_physical_with, footprints, outside_area, overlap_area, room_polygon,
    EvalError, PhysicalReport, TAU_COLLISION, TAU_OUT_OF_ROOM,
};
pub use svg::{render_svg, to_pixels, MARGIN, SCALE};
