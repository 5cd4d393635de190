//! `relayout` command line.
//!
//! Exit codes: 0 success, 1 usage error or unreadable input file,
//! 2 infeasible or diverged solve, 3 validation failure. Errors are written
//! to the error stream as one JSON object per line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::{
    convergence_benchmark, curves_to_csv, eval_physical, render_svg, results_to_text, summarize,
    EMA_ALPHA,
};
use crate::graph::{build_graph, decomposition_savings, UnitNodes};
use crate::imagination::{imagine_and_revise, BaselineReviser};
use crate::optimizer::{solve, OptimizerConfig, SolveError};
use crate::scene::{parse_layout, parse_scene, serialize_layout, SceneSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SOLVE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "RELAYOUT_SEED";

#[derive(Parser, Debug)]
#[command(name = "relayout", version, about = "Relational indoor layout solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a scene and write the layout.
    Solve {
        scene: PathBuf,
        /// Defaults to the scene's own seed.
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
        /// Layout file. Without it the layout goes to stdout and the summary to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Loss trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Steps per stage.
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Imagine a layout and revise relations until it is conflict free.
    Validate {
        scene: PathBuf,
        #[arg(long, default_value_t = 10)]
        budget: usize,
        /// Where to write the revised scene.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame-shift cost of the relation graph with and without units.
    Analyze {
        scene: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Collision and out-of-room rates of a layout.
    Eval { scene: PathBuf, layout: PathBuf },
    /// Iterations to a loss threshold, unit-local against all-global.
    Bench {
        scene: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2, 3, 4])]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        /// Normalized and smoothed loss curves as CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
    },
}

struct Failure {
    code: i32,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            kind,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn report(stderr: &mut dyn Write, f: &Failure) {
    let line = serde_json::json!({ "error": f.kind, "code": f.code, "message": f.message });
    let _ = writeln!(stderr, "{line}");
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, "io", format!("{}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<SceneSpec, Failure> {
    parse_scene(&read(path)?)
        .map_err(|e| Failure::new(EXIT_VALIDATION, "scene", format!("{}: {e}", path.display())))
}

/// Writes to a sibling temporary file, then renames it over `path`.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let fail =
        |e: std::io::Error| Failure::new(EXIT_USAGE, "io", format!("{}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| Failure::new(EXIT_USAGE, "io", "output path has no file name"))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_USAGE, "io", e.to_string()))
}

fn config(iterations: Option<usize>, seed: u64) -> OptimizerConfig {
    let mut c = OptimizerConfig {
        seed,
        ..Default::default()
    };
    if let Some(n) = iterations {
        c.iterations = n;
    }
    c
}

fn check_iterations(iterations: Option<usize>) -> Outcome {
    match iterations {
        Some(0) => Err(Failure::new(
            EXIT_USAGE,
            "usage",
            "--iterations must be at least 1",
        )),
        _ => Ok(()),
    }
}

fn solve_cmd(
    scene: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
    svg: Option<&Path>,
    trace: Option<&Path>,
    iterations: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    check_iterations(iterations)?;
    let spec = load_scene(scene)?;
    let cfg = config(iterations, seed.unwrap_or(spec.seed));
    let sol = solve(&spec, &cfg).map_err(|e| {
        let kind = match e {
            SolveError::InfeasibleRoom { .. } => "infeasible",
            SolveError::Diverged { .. } => "diverged",
        };
        Failure::new(EXIT_SOLVE, kind, e.to_string())
    })?;
    let physical = eval_physical(&spec, &sol.layout).expect("solver poses every asset");
    let max_penalty = sol
        .relation_penalties(&spec)
        .into_iter()
        .fold(0.0, f64::max);
    let mut summary = physical.to_text();
    summary.push_str(&format!("max_relation_penalty {max_penalty:.3e}\n"));
    summary.push_str(&format!("seed {}\n", cfg.seed));

    let layout = serialize_layout(&sol.layout);
    if let Some(p) = trace {
        write_atomic(p, &sol.trace.to_csv())?;
    }
    if let Some(p) = svg {
        write_atomic(p, &render_svg(&spec, &sol.layout))?;
    }
    match out {
        Some(p) => {
            write_atomic(p, &layout)?;
            emit(stdout, &summary)
        }
        None => {
            emit(stdout, &layout)?;
            emit(stderr, &summary)
        }
    }
}

fn validate_cmd(
    scene: &Path,
    budget: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Outcome {
    let spec = load_scene(scene)?;
    let (revised, report) =
        imagine_and_revise(&spec, &mut BaselineReviser, budget).map_err(|e| {
            let code = if budget == 0 {
                EXIT_USAGE
            } else {
                EXIT_VALIDATION
            };
            Failure::new(code, "revision", e.to_string())
        })?;
    emit(stdout, &report.to_text())?;
    if let Some(p) = out {
        write_atomic(p, &revised.to_json())?;
    }
    if report.converged() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_VALIDATION,
            "not_converged",
            format!(
                "{} conflicts remain after {budget} iterations",
                report.remaining.len()
            ),
        ))
    }
}

fn analyze_cmd(scene: &Path, csv: bool, stdout: &mut dyn Write) -> Outcome {
    let spec = load_scene(scene)?;
    let g = build_graph(&spec);
    let report = decomposition_savings(&g, &UnitNodes::from_spec(&spec));
    emit(
        stdout,
        &if csv {
            report.to_csv()
        } else {
            report.to_text()
        },
    )
}

fn eval_cmd(scene: &Path, layout: &Path, stdout: &mut dyn Write) -> Outcome {
    let spec = load_scene(scene)?;
    let layout = parse_layout(&read(layout)?).map_err(|e| {
        Failure::new(
            EXIT_VALIDATION,
            "layout",
            format!("{}: {e}", layout.display()),
        )
    })?;
    let report = eval_physical(&spec, &layout)
        .map_err(|e| Failure::new(EXIT_VALIDATION, "layout", e.to_string()))?;
    emit(stdout, &report.to_text())
}

fn bench_cmd(
    scene: &Path,
    seeds: &[u64],
    threshold: f64,
    curves: Option<&Path>,
    iterations: Option<usize>,
    stdout: &mut dyn Write,
) -> Outcome {
    check_iterations(iterations)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Failure::new(
            EXIT_USAGE,
            "usage",
            "--threshold must lie in (0, 1)",
        ));
    }
    if seeds.is_empty() {
        return Err(Failure::new(
            EXIT_USAGE,
            "usage",
            "--seeds must not be empty",
        ));
    }
    let spec = load_scene(scene)?;
    let name = scene
        .file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let name = name
        .strip_suffix(".scene.json")
        .unwrap_or(&name)
        .to_string();
    let results = convergence_benchmark(&name, &spec, seeds, threshold, &config(iterations, 0));
    emit(stdout, &results_to_text(&results))?;
    if let Some(p) = curves {
        write_atomic(p, &curves_to_csv(&results, EMA_ALPHA))?;
    }
    if let Some(r) = results.iter().find(|r| r.failure.is_some()) {
        let failed = results.iter().filter(|r| r.failure.is_some()).count();
        let message = format!(
            "{failed}/{} seeds failed, first: {}",
            summarize(&results).seeds,
            r.failure.as_deref().unwrap_or("")
        );
        return Err(Failure::new(EXIT_SOLVE, "diverged", message));
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let rendered = e.render().to_string();
            let message = rendered
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ")
                .to_string();
            report(stderr, &Failure::new(EXIT_USAGE, "usage", message));
            let _ = write!(stderr, "{rendered}");
            return EXIT_USAGE;
        }
    };
    let outcome = match &cli.command {
        Command::Solve {
            scene,
            seed,
            out,
            svg,
            trace,
            iterations,
        } => solve_cmd(
            scene,
            *seed,
            out.as_deref(),
            svg.as_deref(),
            trace.as_deref(),
            *iterations,
            stdout,
            stderr,
        ),
        Command::Validate { scene, budget, out } => {
            validate_cmd(scene, *budget, out.as_deref(), stdout)
        }
        Command::Analyze { scene, csv } => analyze_cmd(scene, *csv, stdout),
        Command::Eval { scene, layout } => eval_cmd(scene, layout, stdout),
        Command::Bench {
            scene,
            seeds,
            threshold,
            curves,
            iterations,
        } => bench_cmd(
            scene,
            seeds,
            *threshold,
            curves.as_deref(),
            *iterations,
            stdout,
        ),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            report(stderr, &f);
            f.code
        }
    }
}
