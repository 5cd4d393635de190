//! Differentiable relation, collision and boundary losses.
//!
//! Every loss returns its value together with the exact gradient with
//! respect to each box pose `(x, y, theta)` it reads and with respect to its
//! metric parameter, so the optimizer never needs finite differences.

mod losses;
mod objective;

pub use losses::{corner_target, FACING_EPS};
pub use objective::{
    aggregate_global, aggregate_local, evaluate, relation_penalties, Evaluation, TermSelection,
    TermTotals, Weights,
};

use crate::ad::{Dual, Real};
use crate::geometry::{wrap_angle, BoxT, FootprintBox};
use crate::scene::{Corner, RelationKind, Room, Side, Wall};

type D = Dual<7>;
const PARAM: usize = 6;

/// A loss value and its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub value: f64,
    /// `d loss / d (x, y, theta)` for each box argument, in argument order.
    pub pose_grads: Vec<[f64; 3]>,
    /// `d loss / d metric`; zero for kinds without a metric.
    pub param_grad: f64,
}

impl LossValue {
    fn from_dual(v: D, boxes: usize) -> Self {
        let pose_grads = (0..boxes)
            .map(|b| [v.d[3 * b], v.d[3 * b + 1], v.d[3 * b + 2]])
            .collect();
        LossValue {
            value: v.v,
            pose_grads,
            param_grad: v.d[PARAM],
        }
    }

    pub fn scaled(mut self, w: f64) -> Self {
        self.value *= w;
        for g in &mut self.pose_grads {
            for c in g.iter_mut() {
                *c *= w;
            }
        }
        self.param_grad *= w;
        self
    }
}

fn seed(b: &FootprintBox, base: usize) -> BoxT<D> {
    BoxT {
        x: D::var(b.pose.x, base),
        y: D::var(b.pose.y, base + 1),
        theta: D::var(b.pose.theta, base + 2),
        half_l: b.half_l,
        half_w: b.half_w,
    }
}

fn single(b: &FootprintBox, param: f64, f: impl Fn(&BoxT<D>, D) -> D) -> LossValue {
    LossValue::from_dual(f(&seed(b, 0), D::var(param, PARAM)), 1)
}

fn pair(
    a: &FootprintBox,
    b: &FootprintBox,
    param: f64,
    f: impl Fn(&BoxT<D>, &BoxT<D>, D) -> D,
) -> LossValue {
    LossValue::from_dual(f(&seed(a, 0), &seed(b, 3), D::var(param, PARAM)), 2)
}

/// Axis-aligned proxy overlap penalty: IoU minus a center-distance term
/// scaled by the overlap ratio. Zero unless the proxies overlap strictly.
pub fn collision_loss(a: &FootprintBox, b: &FootprintBox) -> LossValue {
    pair(a, b, 0.0, |a, b, _| losses::collision(a, b))
}

/// Summed L1 distance of the corners outside the room rectangle.
pub fn boundary_loss(b: &FootprintBox, room: &Room) -> LossValue {
    single(b, 0.0, |b, _| losses::boundary(b, room))
}

pub fn distance_loss(a: &FootprintBox, b: &FootprintBox, target: f64) -> LossValue {
    pair(a, b, target, losses::distance)
}

pub fn gap_loss(a: &FootprintBox, b: &FootprintBox, clearance: f64) -> LossValue {
    pair(a, b, clearance, losses::gap)
}

pub fn against_wall_loss(b: &FootprintBox, wall: Wall, room: &Room) -> LossValue {
    single(b, 0.0, |b, _| losses::against_wall(b, wall, room))
}

pub fn corner_loss(b: &FootprintBox, corner: Corner, wall: Wall, room: &Room) -> LossValue {
    single(b, 0.0, |b, _| losses::corner(b, corner, wall, room))
}

/// Penalizes `a` not facing toward `b`.
pub fn facing_loss(a: &FootprintBox, b: &FootprintBox) -> LossValue {
    pair(a, b, 0.0, |a, b, _| losses::facing(a, b))
}

pub fn directional_loss(src: &FootprintBox, tgt: &FootprintBox, side: Side, p: f64) -> LossValue {
    pair(src, tgt, p, |s, t, p| losses::directional(s, t, side, p))
}

pub fn angle_loss(a: &FootprintBox, b: &FootprintBox, alpha: f64) -> LossValue {
    pair(a, b, alpha, losses::angle)
}

/// `margin` is a fraction of the room span along the placement axis.
pub fn placement_loss(
    b: &FootprintBox,
    horizontal: bool,
    target: f64,
    margin: f64,
    room: &Room,
) -> LossValue {
    let span = if horizontal { room.length } else { room.width };
    single(b, target, |b, t| {
        let coord = if horizontal { b.x } else { b.y };
        losses::placement(coord, t, margin * span)
    })
}

/// Sources spread over an arc of angular width `sweep` centred on `center`
/// around the focal box. Gradients are ordered sources first, focal last.
pub fn around_loss(
    sources: &[FootprintBox],
    focal: &FootprintBox,
    sweep: f64,
    center: f64,
) -> LossValue {
    let n = sources.len();
    assert!(n >= 2, "around needs at least two sources");
    let f = seed(focal, 3);
    let angles: Vec<D> = sources
        .iter()
        .map(|s| {
            let s = seed(s, 0);
            let [lx, ly] = f.to_local(s.x, s.y);
            ly.atan2(lx)
        })
        .collect();

    let gaps = (n - 1) as f64;
    let spacing = sweep / gaps;
    let mut order: Vec<usize> = (0..n).collect();
    let psi: Vec<f64> = angles.iter().map(|a| wrap_angle(a.v - center)).collect();
    order.sort_by(|&i, &j| psi[i].total_cmp(&psi[j]).then(i.cmp(&j)));

    let mut value = 0.0;
    let mut d_angle = vec![0.0; n];
    let mut d_sweep = 0.0;
    for w in order.windows(2) {
        let delta = psi[w[1]] - psi[w[0]];
        let r = delta - spacing;
        value += r * r / gaps;
        let g = 2.0 * r / gaps;
        d_angle[w[1]] += g;
        d_angle[w[0]] -= g;
        d_sweep -= g / gaps;
    }

    let m = losses::arc_resultant(n, Dual::<1>::var(sweep / (2.0 * gaps), 0));
    let (dm, m) = (m.d[0] / (2.0 * gaps), m.v);
    let nf = n as f64;
    let mean_s = angles.iter().map(|a| a.v.sin()).sum::<f64>() / nf;
    let mean_c = angles.iter().map(|a| a.v.cos()).sum::<f64>() / nf;
    let es = mean_s - m * center.sin();
    let ec = mean_c - m * center.cos();
    value += es * es + ec * ec;
    for (i, a) in angles.iter().enumerate() {
        d_angle[i] += 2.0 * (es * a.v.cos() - ec * a.v.sin()) / nf;
    }
    d_sweep -= 2.0 * (es * center.sin() + ec * center.cos()) * dm;

    let mut pose_grads = vec![[0.0; 3]; n + 1];
    for (i, a) in angles.iter().enumerate() {
        for c in 0..3 {
            pose_grads[i][c] += d_angle[i] * a.d[c];
            pose_grads[n][c] += d_angle[i] * a.d[3 + c];
        }
    }
    LossValue {
        value,
        pose_grads,
        param_grad: d_sweep,
    }
}

/// Loss of one relation. `boxes` holds the sources followed by the target
/// box for pairwise kinds; `param` replaces the kind's own metric value.
pub fn relation_loss_with(
    kind: &RelationKind,
    param: f64,
    boxes: &[FootprintBox],
    room: &Room,
) -> LossValue {
    match *kind {
        RelationKind::Distance { .. } => distance_loss(&boxes[0], &boxes[1], param),
        RelationKind::Gap { .. } => gap_loss(&boxes[0], &boxes[1], param),
        RelationKind::AgainstWall { wall } => against_wall_loss(&boxes[0], wall, room),
        RelationKind::Corner { corner, wall } => corner_loss(&boxes[0], corner, wall, room),
        RelationKind::Facing => facing_loss(&boxes[0], &boxes[1]),
        RelationKind::LeftOf { .. }
        | RelationKind::RightOf { .. }
        | RelationKind::InFrontOf { .. }
        | RelationKind::BehindOf { .. } => {
            let (side, _) = kind.side().expect("directional kind");
            directional_loss(&boxes[0], &boxes[1], side, param)
        }
        RelationKind::AngleOffset { .. } => angle_loss(&boxes[0], &boxes[1], param),
        RelationKind::HPlace { margin, .. } => placement_loss(&boxes[0], true, param, margin, room),
        RelationKind::VPlace { margin, .. } => {
            placement_loss(&boxes[0], false, param, margin, room)
        }
        RelationKind::Around { center, .. } => {
            let (focal, sources) = boxes.split_last().expect("around has a focal box");
            around_loss(sources, focal, param, center)
        }
    }
}

/// Loss of one relation with its declared metric.
pub fn relation_loss(kind: &RelationKind, boxes: &[FootprintBox], room: &Room) -> LossValue {
    relation_loss_with(kind, kind.metric().unwrap_or(0.0), boxes, room)
}

#[cfg(test)]
mod tests;
