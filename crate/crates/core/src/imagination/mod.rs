//! Explicit spatial imagination: cognitive maps in the scene frame and in
//! every unit frame, proxy conflict detection and an imagine-and-revise
//! loop with pluggable revisers.

mod interpret;
mod revise;

pub use interpret::imagine_poses;
pub use revise::{
    baseline_reviser, imagine_and_revise, BaselineReviser, Edit, RecordedReviser, Reviser,
    RevisionError, RevisionReport, RevisionStep, SEPARATION_MARGIN,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{axis_bounds, collide_proxy, compose, FootprintBox, Interval, Pose2D};
use crate::scene::{Role, SceneSpec};

/// Candidate poses keyed by asset id. Independent assets and anchors carry
/// scene-frame poses (an anchor's pose is its unit's frame); members carry
/// poses in their unit's frame.
pub type PoseAssignment = BTreeMap<String, Pose2D>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("no candidate pose for `{0}`")]
    MissingPose(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MapScope {
    Global,
    Unit(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapEntry {
    /// Pose of the entity's box center.
    pub pose: Pose2D,
    pub half_l: f64,
    pub half_w: f64,
    /// Axis-aligned extents `(e_x, e_y)` at the current heading.
    pub extents: (f64, f64),
    pub bounds: (Interval, Interval),
}

impl MapEntry {
    fn new(pose: Pose2D, half_l: f64, half_w: f64) -> Self {
        let b = FootprintBox::new(pose, half_l, half_w);
        MapEntry {
            pose,
            half_l,
            half_w,
            extents: b.extents(),
            bounds: axis_bounds(&b),
        }
    }

    pub fn footprint(&self) -> FootprintBox {
        FootprintBox::new(self.pose, self.half_l, self.half_w)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CognitiveMap {
    pub scope: MapScope,
    /// Frame of the map in the scene: the unit pose, or the identity.
    pub frame: Pose2D,
    pub entries: BTreeMap<String, MapEntry>,
}

/// One local map per unit (in unit order) and the global map, whose unit
/// entries are keyed by unit id.
#[derive(Clone, Debug, PartialEq)]
pub struct Maps {
    pub local: Vec<CognitiveMap>,
    pub global: CognitiveMap,
}

pub fn build_maps(spec: &SceneSpec, poses: &PoseAssignment) -> Result<Maps, MapError> {
    let pose = |i: usize| -> Result<Pose2D, MapError> {
        let id = &spec.assets[i].id;
        poses
            .get(id)
            .copied()
            .ok_or_else(|| MapError::MissingPose(id.clone()))
    };
    let mut global = BTreeMap::new();
    for &i in spec.independents() {
        let a = &spec.assets[i];
        global.insert(
            a.id.clone(),
            MapEntry::new(pose(i)?, a.half_l(), a.half_w()),
        );
    }
    let mut local = Vec::with_capacity(spec.units.len());
    for (k, unit) in spec.units.iter().enumerate() {
        let (anchor, members) = spec.unit_assets(k);
        let frame = pose(anchor)?;
        let mut entries = BTreeMap::new();
        let a = &spec.assets[anchor];
        entries.insert(
            a.id.clone(),
            MapEntry::new(Pose2D::IDENTITY, a.half_l(), a.half_w()),
        );
        for &m in members {
            let a = &spec.assets[m];
            entries.insert(
                a.id.clone(),
                MapEntry::new(pose(m)?, a.half_l(), a.half_w()),
            );
        }
        let (mut hx, mut hy) = entries
            .values()
            .next()
            .map(|e| e.bounds)
            .expect("unit has an anchor");
        for e in entries.values() {
            hx = hx.hull(&e.bounds.0);
            hy = hy.hull(&e.bounds.1);
        }
        let center = Pose2D::new(0.5 * (hx.lo + hx.hi), 0.5 * (hy.lo + hy.hi), 0.0);
        global.insert(
            unit.id.clone(),
            MapEntry::new(compose(&frame, &center), 0.5 * hx.len(), 0.5 * hy.len()),
        );
        local.push(CognitiveMap {
            scope: MapScope::Unit(unit.id.clone()),
            frame,
            entries,
        });
    }
    Ok(Maps {
        local,
        global: CognitiveMap {
            scope: MapScope::Global,
            frame: Pose2D::IDENTITY,
            entries: global,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConflictLevel {
    Intra(String),
    Inter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conflict {
    pub level: ConflictLevel,
    /// Entity ids in lexicographic order.
    pub pair: (String, String),
    /// Proxy overlap along x and y, both positive.
    pub overlap: (f64, f64),
}

fn overlap(a: &MapEntry, b: &MapEntry) -> (f64, f64) {
    (
        a.bounds.0.overlap(&b.bounds.0),
        a.bounds.1.overlap(&b.bounds.1),
    )
}

/// Scene-frame boxes of a global-map entity at member resolution.
fn member_boxes(spec: &SceneSpec, maps: &Maps, id: &str) -> Vec<FootprintBox> {
    match spec.unit_index(id) {
        Some(k) => {
            let m = &maps.local[k];
            m.entries
                .values()
                .map(|e| FootprintBox::new(compose(&m.frame, &e.pose), e.half_l, e.half_w))
                .collect()
        }
        None => vec![maps.global.entries[id].footprint()],
    }
}

/// Proxy collisions between every pair within each local map and within
/// the global map. A global pair involving a unit is kept only when some
/// member-level box pair also collides.
pub fn detect_conflicts(spec: &SceneSpec, maps: &Maps) -> Vec<Conflict> {
    let mut out = Vec::new();
    let mut local: Vec<&CognitiveMap> = maps.local.iter().collect();
    local.sort_by(|a, b| a.scope.cmp(&b.scope));
    for m in local {
        let MapScope::Unit(u) = &m.scope else {
            continue;
        };
        let entries: Vec<_> = m.entries.iter().collect();
        for (i, (ia, a)) in entries.iter().enumerate() {
            for (ib, b) in &entries[i + 1..] {
                if collide_proxy(&a.footprint(), &b.footprint()) {
                    out.push(Conflict {
                        level: ConflictLevel::Intra(u.clone()),
                        pair: ((*ia).clone(), (*ib).clone()),
                        overlap: overlap(a, b),
                    });
                }
            }
        }
    }
    let entries: Vec<_> = maps.global.entries.iter().collect();
    for (i, (ia, a)) in entries.iter().enumerate() {
        for (ib, b) in &entries[i + 1..] {
            if !collide_proxy(&a.footprint(), &b.footprint()) {
                continue;
            }
            let refine = spec.unit_index(ia).is_some() || spec.unit_index(ib).is_some();
            if refine {
                let (ma, mb) = (member_boxes(spec, maps, ia), member_boxes(spec, maps, ib));
                if !ma.iter().any(|x| mb.iter().any(|y| collide_proxy(x, y))) {
                    continue;
                }
            }
            out.push(Conflict {
                level: ConflictLevel::Inter,
                pair: ((*ia).clone(), (*ib).clone()),
                overlap: overlap(a, b),
            });
        }
    }
    out
}

/// Global-map id of an asset: the unit id for anchors and members.
pub(crate) fn entity_of(spec: &SceneSpec, asset: usize) -> String {
    match spec.role(asset) {
        Role::Independent(_) => spec.assets[asset].id.clone(),
        Role::Anchor(k) | Role::Member(k, _) => spec.units[k].id.clone(),
    }
}
