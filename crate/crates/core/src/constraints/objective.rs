//! Assembly of the full objective over a [`ParamState`].

use super::{boundary_loss, collision_loss, relation_loss_with, LossValue};
use crate::geometry::{axis_bounds, FootprintBox, Interval, Pose2D};
use crate::optimizer::{ParamState, Parameterization};
use crate::scene::{Endpoint, Role, SceneSpec, Scope};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weights {
    pub relation: f64,
    pub collision: f64,
    pub boundary: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            relation: 1.0,
            collision: 1.0,
            boundary: 1.0,
        }
    }
}

/// Which terms an evaluation includes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermSelection {
    pub relations: bool,
    pub collision: bool,
    pub boundary: bool,
    /// Terms living in unit-local frames.
    pub local: bool,
    /// Terms living in the scene frame.
    pub global: bool,
    /// Restrict local terms to this unit.
    pub only_unit: Option<usize>,
    /// Whether shared parameters receive gradient.
    pub learn_shared: bool,
    pub prior_weight: f64,
}

impl TermSelection {
    pub fn all() -> Self {
        TermSelection {
            relations: true,
            collision: true,
            boundary: true,
            local: true,
            global: true,
            only_unit: None,
            learn_shared: true,
            prior_weight: 0.0,
        }
    }

    /// Relation terms only, shared parameters frozen.
    pub fn relations_only() -> Self {
        TermSelection {
            collision: false,
            boundary: false,
            learn_shared: false,
            ..Self::all()
        }
    }

    pub fn with_prior(self, w: f64) -> Self {
        TermSelection {
            prior_weight: w,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TermTotals {
    pub relation: f64,
    pub collision: f64,
    pub boundary: f64,
    pub prior: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub total: f64,
    pub terms: TermTotals,
    /// Gradient in the layout of the evaluated state.
    pub grad: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Sink {
    None,
    Pose(usize),
    /// Box rigidly attached to the pose at `offset` with a fixed translation.
    Attached(usize, [f64; 2]),
}

struct Scene<'a> {
    spec: &'a SceneSpec,
    state: &'a ParamState,
    obb: Vec<(FootprintBox, [f64; 2])>,
}

impl<'a> Scene<'a> {
    fn new(spec: &'a SceneSpec, state: &'a ParamState) -> Self {
        let mut scene = Scene {
            spec,
            state,
            obb: Vec::new(),
        };
        scene.obb = (0..spec.units.len()).map(|k| scene.unit_box(k)).collect();
        scene
    }

    fn local(&self, k: usize, asset: usize) -> (FootprintBox, Sink) {
        let a = &self.spec.assets[asset];
        match self.spec.role(asset) {
            Role::Anchor(u) if u == k => (a.footprint(Pose2D::IDENTITY), Sink::None),
            Role::Member(u, j) if u == k => {
                let o = self.state.layout.member[k][j];
                (a.footprint(self.state.pose(o)), Sink::Pose(o))
            }
            _ => unreachable!("intra relation endpoint outside its unit"),
        }
    }

    /// Bounding box of unit `k`: the local axis-aligned hull of its members,
    /// carried by the unit pose. The hull itself is treated as constant.
    fn unit_box(&self, k: usize) -> (FootprintBox, [f64; 2]) {
        let (anchor, members) = self.spec.unit_assets(k);
        let (mut hx, mut hy) = axis_bounds(&self.local(k, anchor).0);
        for &m in members {
            let (bx, by) = axis_bounds(&self.local(k, m).0);
            hx = hx.hull(&bx);
            hy = hy.hull(&by);
        }
        let center = [mid(&hx), mid(&hy)];
        let frame = self.state.pose(self.state.layout.unit[k]);
        let pose = frame.compose(&Pose2D::new(center[0], center[1], 0.0));
        (
            FootprintBox::new(pose, 0.5 * hx.len(), 0.5 * hy.len()),
            center,
        )
    }

    fn global(&self, e: Endpoint) -> (FootprintBox, Sink) {
        match e {
            Endpoint::Asset(i) => {
                let a = &self.spec.assets[i];
                let o = match self.spec.role(i) {
                    Role::Independent(n) => self.state.layout.independent[n],
                    Role::Anchor(k) => self.state.layout.unit[k],
                    Role::Member(..) => unreachable!("member in an inter relation"),
                };
                (a.footprint(self.state.pose(o)), Sink::Pose(o))
            }
            Endpoint::Unit(k) => {
                let (b, c) = self.obb[k];
                (b, Sink::Attached(self.state.layout.unit[k], c))
            }
            Endpoint::Scene => unreachable!("scene has no footprint"),
        }
    }

    /// Independent assets and unit boxes.
    fn global_entities(&self) -> Vec<(FootprintBox, Sink)> {
        let mut v: Vec<_> = self
            .spec
            .independents()
            .iter()
            .map(|&i| self.global(Endpoint::Asset(i)))
            .collect();
        v.extend((0..self.spec.units.len()).map(|k| self.global(Endpoint::Unit(k))));
        v
    }

    fn push(&self, grad: &mut [f64], sink: Sink, g: [f64; 3]) {
        match sink {
            Sink::None => {}
            Sink::Pose(o) => {
                for c in 0..3 {
                    grad[o + c] += g[c];
                }
            }
            Sink::Attached(o, [lx, ly]) => {
                let (s, c) = self.state.values[o + 2].sin_cos();
                grad[o] += g[0];
                grad[o + 1] += g[1];
                grad[o + 2] += g[2] + g[0] * (-s * lx - c * ly) + g[1] * (c * lx - s * ly);
            }
        }
    }
}

fn mid(i: &Interval) -> f64 {
    0.5 * (i.lo + i.hi)
}

fn accumulate(scene: &Scene, grad: &mut [f64], lv: &LossValue, sinks: &[Sink]) {
    for (g, s) in lv.pose_grads.iter().zip(sinks) {
        scene.push(grad, *s, *g);
    }
}

/// Value and gradient of the selected objective terms.
pub fn evaluate(
    spec: &SceneSpec,
    state: &ParamState,
    weights: &Weights,
    sel: &TermSelection,
) -> Evaluation {
    match state.layout.kind {
        Parameterization::Mixed => evaluate_mixed(spec, state, weights, sel),
        Parameterization::Global => {
            let mixed = state.to_mixed(spec);
            let ev = evaluate_mixed(spec, &mixed, weights, sel);
            Evaluation {
                total: ev.total,
                terms: ev.terms,
                grad: pull_back(spec, state, &mixed, &ev.grad),
            }
        }
    }
}

/// Chain rule from mixed coordinates back to global asset poses.
fn pull_back(spec: &SceneSpec, global: &ParamState, mixed: &ParamState, g: &[f64]) -> Vec<f64> {
    let gl = &global.layout;
    let ml = &mixed.layout;
    let mut out = vec![0.0; gl.len];
    for (n, &i) in spec.independents().iter().enumerate() {
        out[gl.asset[i]..gl.asset[i] + 3]
            .copy_from_slice(&g[ml.independent[n]..ml.independent[n] + 3]);
    }
    for k in 0..spec.units.len() {
        let (anchor, members) = spec.unit_assets(k);
        let ao = gl.asset[anchor];
        let uo = ml.unit[k];
        for c in 0..3 {
            out[ao + c] += g[uo + c];
        }
        let (s, c) = mixed.values[uo + 2].sin_cos();
        for (j, &m) in members.iter().enumerate() {
            let mo = ml.member[k][j];
            let (gx, gy, gt) = (g[mo], g[mo + 1], g[mo + 2]);
            let (xl, yl) = (mixed.values[mo], mixed.values[mo + 1]);
            let po = gl.asset[m];
            out[po] += gx * c - gy * s;
            out[po + 1] += gx * s + gy * c;
            out[po + 2] += gt;
            out[ao] += -gx * c + gy * s;
            out[ao + 1] += -gx * s - gy * c;
            out[ao + 2] += gx * yl - gy * xl - gt;
        }
    }
    for (&go, &mo) in gl.shared.iter().zip(&ml.shared) {
        out[go] = g[mo];
    }
    out
}

fn relation_param(spec: &SceneSpec, state: &ParamState, r: usize) -> (f64, Option<usize>) {
    let rel = &spec.relations[r];
    match rel
        .shared_param
        .as_deref()
        .and_then(|n| spec.shared_group_index(n))
    {
        Some(g) => (state.shared_value(g), Some(state.layout.shared[g])),
        None => (rel.kind.metric().unwrap_or(0.0), None),
    }
}

fn relation_boxes(scene: &Scene, r: usize) -> (Vec<FootprintBox>, Vec<Sink>) {
    let spec = scene.spec;
    let (sources, target) = spec.endpoints(r);
    let ends = sources
        .iter()
        .copied()
        .chain((target != Endpoint::Scene).then_some(target));
    let resolved: Vec<(FootprintBox, Sink)> = match &spec.relations[r].scope {
        Scope::Intra(u) => {
            let k = spec.unit_index(u).expect("validated unit");
            ends.map(|e| match e {
                Endpoint::Asset(i) => scene.local(k, i),
                _ => unreachable!("intra endpoints are assets"),
            })
            .collect()
        }
        Scope::Inter => ends.map(|e| scene.global(e)).collect(),
    };
    resolved.into_iter().unzip()
}

fn evaluate_mixed(
    spec: &SceneSpec,
    state: &ParamState,
    w: &Weights,
    sel: &TermSelection,
) -> Evaluation {
    let scene = Scene::new(spec, state);
    let mut grad = vec![0.0; state.layout.len];
    let mut terms = TermTotals::default();
    let unit_selected = |k: usize| sel.only_unit.map_or(true, |u| u == k);

    if sel.relations {
        for (r, rel) in spec.relations.iter().enumerate() {
            let wanted = match &rel.scope {
                Scope::Intra(u) => {
                    sel.local && unit_selected(spec.unit_index(u).expect("validated unit"))
                }
                Scope::Inter => sel.global,
            };
            if !wanted {
                continue;
            }
            let (boxes, sinks) = relation_boxes(&scene, r);
            let (param, slot) = relation_param(spec, state, r);
            let lv = relation_loss_with(&rel.kind, param, &boxes, &spec.room).scaled(w.relation);
            terms.relation += lv.value;
            accumulate(&scene, &mut grad, &lv, &sinks);
            if let (true, Some(o)) = (sel.learn_shared, slot) {
                grad[o] += lv.param_grad;
            }
        }
    }

    if sel.collision && sel.local {
        for k in (0..spec.units.len()).filter(|&k| unit_selected(k)) {
            let (anchor, members) = spec.unit_assets(k);
            let items: Vec<_> = std::iter::once(anchor)
                .chain(members.iter().copied())
                .map(|i| scene.local(k, i))
                .collect();
            terms.collision += pairwise_collisions(&scene, &mut grad, &items, w.collision);
        }
    }
    if sel.global && (sel.collision || sel.boundary) {
        let items = scene.global_entities();
        if sel.collision {
            terms.collision += pairwise_collisions(&scene, &mut grad, &items, w.collision);
        }
        if sel.boundary {
            for (b, sink) in &items {
                let lv = boundary_loss(b, &spec.room).scaled(w.boundary);
                terms.boundary += lv.value;
                accumulate(&scene, &mut grad, &lv, &[*sink]);
            }
        }
    }

    if sel.prior_weight > 0.0 {
        for (g, group) in spec.shared_groups().iter().enumerate() {
            let o = state.layout.shared[g];
            let diff = state.values[o] - group.prior;
            terms.prior += sel.prior_weight * diff * diff;
            if sel.learn_shared {
                grad[o] += 2.0 * sel.prior_weight * diff;
            }
        }
    }

    Evaluation {
        total: terms.relation + terms.collision + terms.boundary + terms.prior,
        terms,
        grad,
    }
}

fn pairwise_collisions(
    scene: &Scene,
    grad: &mut [f64],
    items: &[(FootprintBox, Sink)],
    w: f64,
) -> f64 {
    let mut total = 0.0;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let lv = collision_loss(&items[i].0, &items[j].0);
            if lv.value == 0.0 && lv.pose_grads.iter().flatten().all(|&g| g == 0.0) {
                continue;
            }
            let lv = lv.scaled(w);
            total += lv.value;
            accumulate(scene, grad, &lv, &[items[i].1, items[j].1]);
        }
    }
    total
}

/// Local terms of unit `k`: its intra relations and member collisions.
pub fn aggregate_local(
    spec: &SceneSpec,
    state: &ParamState,
    weights: &Weights,
    k: usize,
) -> Evaluation {
    let sel = TermSelection {
        global: false,
        only_unit: Some(k),
        ..TermSelection::all()
    };
    evaluate(spec, state, weights, &sel)
}

/// Scene-frame terms: inter relations, collisions between independent
/// assets and unit boxes, and boundary containment.
pub fn aggregate_global(spec: &SceneSpec, state: &ParamState, weights: &Weights) -> Evaluation {
    let sel = TermSelection {
        local: false,
        ..TermSelection::all()
    };
    evaluate(spec, state, weights, &sel)
}

/// Unweighted loss of every relation, using learned shared values.
pub fn relation_penalties(spec: &SceneSpec, state: &ParamState) -> Vec<f64> {
    let mixed = state.to_mixed(spec);
    let scene = Scene::new(spec, &mixed);
    (0..spec.relations.len())
        .map(|r| {
            let (boxes, _) = relation_boxes(&scene, r);
            let (param, _) = relation_param(spec, &mixed, r);
            relation_loss_with(&spec.relations[r].kind, param, &boxes, &spec.room).value
        })
        .collect()
}
