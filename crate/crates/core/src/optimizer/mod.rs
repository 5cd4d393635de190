//! Two-stage SGD with momentum over the mixed global/local
//! parameterization, plus the all-global baseline.

mod state;

pub use state::{DofLayout, ParamState, Parameterization};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constraints::{
    evaluate, relation_penalties, Evaluation, TermSelection, TermTotals, Weights,
};
use crate::geometry::Pose2D;
use crate::scene::{Layout, SceneSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("asset `{asset}` does not fit in the room")]
    InfeasibleRoom { asset: String },
    #[error("loss became non-finite in stage {stage} at iteration {iteration}")]
    Diverged { stage: u8, iteration: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    /// Steps per stage.
    pub iterations: usize,
    pub lr_position: f64,
    pub lr_rotation: f64,
    pub lr_shared: f64,
    pub momentum: f64,
    pub clip_position: f64,
    pub clip_rotation: f64,
    pub prior_weight: f64,
    pub weights: Weights,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            iterations: 600,
            lr_position: 0.5,
            lr_rotation: 0.3,
            lr_shared: 0.1,
            momentum: 0.9,
            clip_position: 1.0,
            clip_rotation: 0.3,
            prior_weight: 1.0,
            weights: Weights::default(),
            seed: 0,
        }
    }
}

/// Cosine annealing factor at step `t` of `total`.
pub fn cosine_factor(t: usize, total: usize) -> f64 {
    0.5 * (1.0 + (PI * t as f64 / total as f64).cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Relation losses only, shared parameters frozen.
    Relations,
    /// All losses, shared parameters learnable, prior on.
    Full,
}

impl Stage {
    pub fn number(self) -> u8 {
        match self {
            Stage::Relations => 1,
            Stage::Full => 2,
        }
    }

    pub fn selection(self, config: &OptimizerConfig) -> TermSelection {
        match self {
            Stage::Relations => TermSelection::relations_only(),
            Stage::Full => TermSelection::all().with_prior(config.prior_weight),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub stage: u8,
    pub iteration: usize,
    pub total: f64,
    pub terms: TermTotals,
    pub lr_factor: f64,
    pub elapsed: Duration,
}

/// Loss before every step of both stages.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn totals(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total).collect()
    }

    /// CSV export. Wall-clock time is left out so the file is reproducible.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("stage,iteration,total,relation,collision,boundary,prior,lr_factor\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.6}",
                r.stage,
                r.iteration,
                r.total,
                r.terms.relation,
                r.terms.collision,
                r.terms.boundary,
                r.terms.prior,
                r.lr_factor
            );
        }
        s
    }
}

fn clip_norm(v: [f64; 2], max: f64) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > max {
        [v[0] * max / n, v[1] * max / n]
    } else {
        v
    }
}

/// Clips every pose gradient in place: position by 2-norm, rotation by
/// absolute value.
pub fn clip_gradient(layout: &DofLayout, grad: &mut [f64], config: &OptimizerConfig) {
    for o in layout.pose_offsets() {
        let [gx, gy] = clip_norm([grad[o], grad[o + 1]], config.clip_position);
        grad[o] = gx;
        grad[o + 1] = gy;
        grad[o + 2] = grad[o + 2].clamp(-config.clip_rotation, config.clip_rotation);
    }
}

/// One momentum update with learning rates scaled by `lr_factor`. Returns
/// the evaluation taken before the update.
pub fn step(
    spec: &SceneSpec,
    state: &mut ParamState,
    config: &OptimizerConfig,
    stage: Stage,
    lr_factor: f64,
) -> Evaluation {
    let mut ev = evaluate(spec, state, &config.weights, &stage.selection(config));
    if !ev.total.is_finite() {
        return ev;
    }
    let mut grad = ev.grad.clone();
    clip_gradient(&state.layout, &mut grad, config);

    let mut lr = vec![config.lr_shared; state.layout.len];
    for o in state.layout.pose_offsets() {
        lr[o] = config.lr_position;
        lr[o + 1] = config.lr_position;
        lr[o + 2] = config.lr_rotation;
    }
    for i in 0..state.values.len() {
        state.velocity[i] = config.momentum * state.velocity[i] + grad[i];
        state.values[i] -= lr_factor * lr[i] * state.velocity[i];
    }
    ev.grad = grad;
    ev
}

/// Random initial state. Positions are uniform in the room with a margin of
/// the largest half size, headings uniform in `[-pi, pi)`, member local
/// positions uniform in `[-1, 1]` m. Shared parameters start at their prior.
pub fn init_state(spec: &SceneSpec, seed: u64) -> Result<ParamState, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = ParamState::zeros(DofLayout::mixed(spec));
    let room = spec.room;
    let place = |rng: &mut ChaCha8Rng, asset: usize| -> Result<Pose2D, SolveError> {
        let a = &spec.assets[asset];
        let m = a.half_l().max(a.half_w());
        if 2.0 * m > room.length || 2.0 * m > room.width {
            return Err(SolveError::InfeasibleRoom {
                asset: a.id.clone(),
            });
        }
        let x = if 2.0 * m < room.length {
            rng.gen_range(m..room.length - m)
        } else {
            m
        };
        let y = if 2.0 * m < room.width {
            rng.gen_range(m..room.width - m)
        } else {
            m
        };
        Ok(Pose2D::new(x, y, rng.gen_range(-PI..PI)))
    };
    for (n, &i) in spec.independents().iter().enumerate() {
        let p = place(&mut rng, i)?;
        state.set_pose(state.layout.independent[n], p);
    }
    for k in 0..spec.units.len() {
        let (anchor, members) = spec.unit_assets(k);
        let p = place(&mut rng, anchor)?;
        state.set_pose(state.layout.unit[k], p);
        for j in 0..members.len() {
            let local = Pose2D::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-PI..PI),
            );
            let o = state.layout.member[k][j];
            state.set_pose(o, local);
        }
    }
    for (g, group) in spec.shared_groups().iter().enumerate() {
        let o = state.layout.shared[g];
        state.values[o] = group.prior;
    }
    Ok(state)
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub state: ParamState,
    pub layout: Layout,
    pub trace: Trace,
}

impl Solution {
    /// Unweighted loss of every relation at the final state.
    pub fn relation_penalties(&self, spec: &SceneSpec) -> Vec<f64> {
        relation_penalties(spec, &self.state)
    }
}

/// Runs both stages from `state`.
pub fn run_stages(
    spec: &SceneSpec,
    mut state: ParamState,
    config: &OptimizerConfig,
) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let mut trace = Trace::default();
    for stage in [Stage::Relations, Stage::Full] {
        state.velocity.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..config.iterations {
            let factor = cosine_factor(t, config.iterations);
            let ev = step(spec, &mut state, config, stage, factor);
            if !ev.total.is_finite() || !state.is_finite() {
                return Err(SolveError::Diverged {
                    stage: stage.number(),
                    iteration: t,
                });
            }
            trace.rows.push(TraceRow {
                stage: stage.number(),
                iteration: t,
                total: ev.total,
                terms: ev.terms,
                lr_factor: factor,
                elapsed: start.elapsed(),
            });
        }
    }
    let layout = state.to_layout(spec);
    Ok(Solution {
        state,
        layout,
        trace,
    })
}

/// Solves with member poses expressed in their unit's frame.
pub fn solve(spec: &SceneSpec, config: &OptimizerConfig) -> Result<Solution, SolveError> {
    run_stages(spec, init_state(spec, config.seed)?, config)
}

/// Same objective and starting geometry, every asset posed globally.
pub fn solve_global_baseline(
    spec: &SceneSpec,
    config: &OptimizerConfig,
) -> Result<Solution, SolveError> {
    let init = init_state(spec, config.seed)?.to_global(spec);
    run_stages(spec, init, config)
}
