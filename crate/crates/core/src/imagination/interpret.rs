//! Deterministic placement interpreter: a forward pass from relations to
//! candidate poses.
//!
//! Orientations come first (angle offsets, walls and corners, in file
//! order), then positions (file order), then headings of facing sources
//! that are still free. Walls, corners and placements pin coordinates;
//! distance, gap, directional and around relations place a source relative
//! to the current pose of its target and only move unpinned coordinates.
//! A relative placement goes opposite the source's heading when the source
//! also faces its target, and along the frame's +x axis otherwise.
//! Unresolved entities stay at the room center (scene frame) or at the
//! unit origin (unit frame).

use super::PoseAssignment;
use crate::constraints::corner_target;
use crate::geometry::{axis_bounds, FootprintBox, Interval, Pose2D};
use crate::scene::{Endpoint, RelationKind, Role, Room, SceneSpec, Scope, Side, Wall};

#[derive(Clone, Copy, Debug)]
struct Slot {
    /// Frame position and heading.
    pos: [f64; 2],
    theta: f64,
    placed: bool,
    oriented: bool,
    pinned: [bool; 2],
    /// Box center in the slot frame.
    offset: [f64; 2],
    half: [f64; 2],
}

impl Slot {
    fn new(pos: [f64; 2], half: [f64; 2]) -> Self {
        Slot {
            pos,
            theta: 0.0,
            placed: false,
            oriented: false,
            pinned: [false; 2],
            offset: [0.0; 2],
            half,
        }
    }

    fn center(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        let [ox, oy] = self.offset;
        [self.pos[0] + c * ox - s * oy, self.pos[1] + s * ox + c * oy]
    }

    fn footprint(&self) -> FootprintBox {
        let [x, y] = self.center();
        FootprintBox::new(Pose2D::new(x, y, self.theta), self.half[0], self.half[1])
    }

    /// Half width of the box along unit direction `u`.
    fn support(&self, u: [f64; 2]) -> f64 {
        let (s, c) = self.theta.sin_cos();
        self.half[0] * (u[0] * c + u[1] * s).abs() + self.half[1] * (-u[0] * s + u[1] * c).abs()
    }

    /// Moves the box center to `p`, leaving pinned coordinates alone.
    fn put_center(&mut self, p: [f64; 2]) {
        let c = self.center();
        for a in 0..2 {
            if !self.pinned[a] {
                self.pos[a] += p[a] - c[a];
            }
        }
        self.placed = true;
    }

    fn pin(&mut self, axis: usize, center_coord: f64) {
        let c = self.center();
        self.pos[axis] += center_coord - c[axis];
        self.pinned[axis] = true;
        self.placed = true;
    }

    fn orient(&mut self, theta: f64) {
        self.theta = theta;
        self.oriented = true;
    }
}

/// One frame's worth of slots plus a map from relation endpoints to slots.
struct Frame<'a> {
    spec: &'a SceneSpec,
    slots: Vec<Slot>,
    index: Box<dyn Fn(Endpoint) -> Option<usize> + 'a>,
    room: Option<Room>,
    /// `(unit box slot, anchor slot, unit index)` views sharing one frame.
    linked: Vec<(usize, usize, usize)>,
}

impl Frame<'_> {
    fn ends(&self, r: usize) -> (Vec<usize>, Option<usize>) {
        let (sources, target) = self.spec.endpoints(r);
        let s = sources.iter().filter_map(|&e| (self.index)(e)).collect();
        (s, (self.index)(target))
    }

    fn facing_pairs(&self, relations: &[usize]) -> Vec<(usize, usize, usize)> {
        relations
            .iter()
            .filter(|&&r| matches!(self.spec.relations[r].kind, RelationKind::Facing))
            .filter_map(|&r| match self.ends(r) {
                (s, Some(t)) if s.len() == 1 => Some((r, s[0], t)),
                _ => None,
            })
            .collect()
    }

    /// Copies the frame of whichever view relation `r` moved onto the other.
    fn sync(&mut self, r: usize) {
        let (sources, _) = self.spec.endpoints(r);
        for &(u, a, k) in &self.linked {
            let (su, sa) = (self.slots[u], self.slots[a]);
            let src = if sources.contains(&Endpoint::Unit(k)) {
                su
            } else {
                sa
            };
            for j in [u, a] {
                let s = &mut self.slots[j];
                s.pos = src.pos;
                s.theta = src.theta;
                s.placed = su.placed || sa.placed;
                s.oriented = su.oriented || sa.oriented;
                s.pinned = [su.pinned[0] || sa.pinned[0], su.pinned[1] || sa.pinned[1]];
            }
        }
    }

    fn orientations(&mut self, relations: &[usize]) {
        for &r in relations {
            let (sources, target) = self.ends(r);
            let Some(&s) = sources.first() else { continue };
            match self.spec.relations[r].kind {
                RelationKind::AngleOffset { alpha } => {
                    if let Some(t) = target {
                        let th = self.slots[t].theta + alpha;
                        self.slots[s].orient(th);
                    }
                }
                RelationKind::AgainstWall { wall } | RelationKind::Corner { wall, .. } => {
                    self.slots[s].orient(wall.inward_angle());
                }
                _ => {}
            }
            self.sync(r);
        }
    }

    fn direction(&self, s: usize, t: usize, facing: &[(usize, usize, usize)]) -> [f64; 2] {
        let src = &self.slots[s];
        if src.oriented && facing.iter().any(|&(_, a, b)| (a, b) == (s, t)) {
            let (sn, cs) = src.theta.sin_cos();
            [-cs, -sn]
        } else {
            [1.0, 0.0]
        }
    }

    fn positions(&mut self, relations: &[usize]) {
        let facing = self.facing_pairs(relations);
        for &r in relations {
            let (sources, target) = self.ends(r);
            let kind = self.spec.relations[r].kind.clone();
            let Some(&s) = sources.first() else { continue };
            match kind {
                RelationKind::HPlace { x, .. } => self.slots[s].pin(0, x),
                RelationKind::VPlace { y, .. } => self.slots[s].pin(1, y),
                RelationKind::AgainstWall { wall } => {
                    let room = self.room.expect("wall relations live in the scene frame");
                    let (ex, ey) = self.slots[s].footprint().extents();
                    match wall {
                        Wall::L => self.slots[s].pin(0, 0.5 * ex),
                        Wall::R => self.slots[s].pin(0, room.length - 0.5 * ex),
                        Wall::B => self.slots[s].pin(1, 0.5 * ey),
                        Wall::T => self.slots[s].pin(1, room.width - 0.5 * ey),
                    }
                }
                RelationKind::Corner { corner, wall } => {
                    let room = self.room.expect("corner relations live in the scene frame");
                    let [hl, hw] = self.slots[s].half;
                    let (x, y) = corner_target(corner, wall, hl, hw, &room);
                    self.slots[s].pin(0, x);
                    self.slots[s].pin(1, y);
                }
                RelationKind::Distance { distance } => {
                    let Some(t) = target else { continue };
                    let u = self.direction(s, t, &facing);
                    let c = self.slots[t].center();
                    self.slots[s].put_center([c[0] + distance * u[0], c[1] + distance * u[1]]);
                }
                RelationKind::Gap { gap } => {
                    let Some(t) = target else { continue };
                    let u = self.direction(s, t, &facing);
                    let d = self.slots[t].support(u) + self.slots[s].support(u) + gap;
                    let c = self.slots[t].center();
                    self.slots[s].put_center([c[0] + d * u[0], c[1] + d * u[1]]);
                }
                RelationKind::LeftOf { p }
                | RelationKind::RightOf { p }
                | RelationKind::InFrontOf { p }
                | RelationKind::BehindOf { p } => {
                    let Some(t) = target else { continue };
                    let side = kind.side().expect("directional relation").0;
                    self.directional(s, t, side, p);
                }
                RelationKind::Around { sweep, center } => {
                    let Some(f) = target else { continue };
                    self.around(&sources, f, sweep, center);
                }
                RelationKind::Facing | RelationKind::AngleOffset { .. } => {}
            }
            self.sync(r);
        }
    }

    fn directional(&mut self, s: usize, t: usize, side: Side, p: f64) {
        if !self.slots[s].oriented {
            let th = self.slots[t].theta;
            self.slots[s].orient(th);
        }
        let tgt = self.slots[t].footprint();
        let rel = self.slots[s].theta - tgt.pose.theta;
        let (sn, cs) = rel.sin_cos();
        let [hl, hw] = self.slots[s].half;
        let rx = (cs * hl).abs() + (sn * hw).abs();
        let ry = (sn * hl).abs() + (cs * hw).abs();
        let (ex, ey) = (tgt.half_l, tgt.half_w);
        let k = 2.0 * p - 1.0;
        let local = match side {
            Side::Left => [-(rx + ex), k * (ey - ry)],
            Side::Right => [rx + ex, k * (ey - ry)],
            Side::Front => [k * (ex - rx), ry + ey],
            Side::Behind => [k * (ex - rx), -(ry + ey)],
        };
        let world = tgt.pose.compose(&Pose2D::new(local[0], local[1], 0.0));
        self.slots[s].put_center([world.x, world.y]);
    }

    fn around(&mut self, sources: &[usize], f: usize, sweep: f64, center: f64) {
        let n = sources.len();
        let focal = self.slots[f].footprint();
        for (i, &s) in sources.iter().enumerate() {
            let phi = center - 0.5 * sweep + sweep * i as f64 / (n - 1) as f64;
            let heading = focal.pose.theta + phi;
            let u = [heading.cos(), heading.sin()];
            let c = self.slots[s].center();
            let current = (c[0] - focal.pose.x).hypot(c[1] - focal.pose.y);
            let radius = if self.slots[s].placed && current > 0.0 {
                current
            } else {
                self.slots[f].support(u) + self.slots[s].support(u) + super::SEPARATION_MARGIN
            };
            self.slots[s].put_center([focal.pose.x + radius * u[0], focal.pose.y + radius * u[1]]);
        }
    }

    fn facing_headings(&mut self, relations: &[usize]) {
        for (r, s, t) in self.facing_pairs(relations) {
            if self.slots[s].oriented {
                continue;
            }
            let (a, b) = (self.slots[s].center(), self.slots[t].center());
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            if dx != 0.0 || dy != 0.0 {
                self.slots[s].orient(dy.atan2(dx));
            }
            self.sync(r);
        }
    }

    fn run(&mut self, relations: &[usize]) {
        self.orientations(relations);
        self.positions(relations);
        self.facing_headings(relations);
    }
}

fn hull(boxes: impl IntoIterator<Item = FootprintBox>) -> (Interval, Interval) {
    let mut it = boxes.into_iter().map(|b| axis_bounds(&b));
    let first = it.next().expect("at least one box");
    it.fold(first, |(hx, hy), (bx, by)| (hx.hull(&bx), hy.hull(&by)))
}

/// Candidate poses for every asset, in the layout expected by
/// [`build_maps`](super::build_maps).
pub fn imagine_poses(spec: &SceneSpec) -> PoseAssignment {
    let mut out = PoseAssignment::new();
    let mut unit_hulls = Vec::with_capacity(spec.units.len());

    for (k, unit) in spec.units.iter().enumerate() {
        let (anchor, members) = spec.unit_assets(k);
        let assets: Vec<usize> = std::iter::once(anchor)
            .chain(members.iter().copied())
            .collect();
        let slots = assets
            .iter()
            .map(|&i| {
                Slot::new(
                    [0.0, 0.0],
                    [spec.assets[i].half_l(), spec.assets[i].half_w()],
                )
            })
            .collect();
        let local_index = {
            let assets = assets.clone();
            move |e: Endpoint| match e {
                Endpoint::Asset(i) => assets.iter().position(|&a| a == i),
                _ => None,
            }
        };
        let mut frame = Frame {
            spec,
            slots,
            index: Box::new(local_index),
            room: None,
            linked: Vec::new(),
        };
        frame.slots[0].placed = true;
        frame.slots[0].oriented = true;
        frame.slots[0].pinned = [true; 2];
        let relations: Vec<usize> = (0..spec.relations.len())
            .filter(|&r| matches!(&spec.relations[r].scope, Scope::Intra(u) if *u == unit.id))
            .collect();
        frame.run(&relations);
        // The anchor stays at the unit origin.
        frame.slots[0].pos = [0.0, 0.0];
        frame.slots[0].theta = 0.0;
        for (slot, &i) in frame.slots.iter().zip(&assets).skip(1) {
            out.insert(
                spec.assets[i].id.clone(),
                Pose2D::new(slot.pos[0], slot.pos[1], slot.theta),
            );
        }
        unit_hulls.push(hull(frame.slots.iter().map(Slot::footprint)));
    }

    // Scene frame: one slot per independent asset, then per unit for the
    // unit box, then per unit again for its anchor box.
    let room = spec.room;
    let mid = [0.5 * room.length, 0.5 * room.width];
    let ni = spec.independents().len();
    let nu = spec.units.len();
    let mut slots: Vec<Slot> = spec
        .independents()
        .iter()
        .map(|&i| Slot::new(mid, [spec.assets[i].half_l(), spec.assets[i].half_w()]))
        .collect();
    for (hx, hy) in &unit_hulls {
        let mut s = Slot::new(mid, [0.5 * hx.len(), 0.5 * hy.len()]);
        s.offset = [0.5 * (hx.lo + hx.hi), 0.5 * (hy.lo + hy.hi)];
        slots.push(s);
    }
    for k in 0..nu {
        let a = &spec.assets[spec.unit_assets(k).0];
        slots.push(Slot::new(mid, [a.half_l(), a.half_w()]));
    }
    let index = move |e: Endpoint| match e {
        Endpoint::Asset(i) => match spec.role(i) {
            Role::Independent(n) => Some(n),
            Role::Anchor(k) => Some(ni + nu + k),
            Role::Member(..) => None,
        },
        Endpoint::Unit(k) => Some(ni + k),
        Endpoint::Scene => None,
    };
    let linked = (0..nu).map(|k| (ni + k, ni + nu + k, k)).collect();
    let mut frame = Frame {
        spec,
        slots,
        index: Box::new(index),
        room: Some(room),
        linked,
    };
    let relations: Vec<usize> = (0..spec.relations.len())
        .filter(|&r| spec.relations[r].scope == Scope::Inter)
        .collect();
    frame.run(&relations);

    for (n, &i) in spec.independents().iter().enumerate() {
        let s = &frame.slots[n];
        out.insert(
            spec.assets[i].id.clone(),
            Pose2D::new(s.pos[0], s.pos[1], s.theta),
        );
    }
    for k in 0..nu {
        let s = &frame.slots[ni + nu + k];
        out.insert(
            spec.assets[spec.unit_assets(k).0].id.clone(),
            Pose2D::new(s.pos[0], s.pos[1], s.theta),
        );
    }
    out
}
