use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{ConvexPolygon, FootprintBox};
use crate::scene::{Layout, Room, SceneSpec};

/// Intersection area above which two footprints collide, in m².
pub const TAU_COLLISION: f64 = 0.0003;
/// Area outside the room above which a footprint is out of bounds, in m².
pub const TAU_OUT_OF_ROOM: f64 = 0.0003;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("layout has no pose for asset `{0}`")]
    MissingPose(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalReport {
    pub cr_percent: f64,
    pub or_percent: f64,
    pub colliding_ids: Vec<String>,
    pub oob_ids: Vec<String>,
    pub tau_c: f64,
    pub tau_o: f64,
}

impl PhysicalReport {
    pub fn is_clean(&self) -> bool {
        self.colliding_ids.is_empty() && self.oob_ids.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "%CR {:.1}", self.cr_percent);
        let _ = writeln!(s, "%OR {:.1}", self.or_percent);
        for (label, ids) in [
            ("colliding", &self.colliding_ids),
            ("out_of_room", &self.oob_ids),
        ] {
            let _ = writeln!(s, "{label} {}", ids.len());
            for id in ids {
                let _ = writeln!(s, "  {id}");
            }
        }
        s
    }
}

pub fn room_polygon(room: &Room) -> ConvexPolygon {
    ConvexPolygon::rectangle(0.0, 0.0, room.length, room.width)
}

pub fn overlap_area(a: &FootprintBox, b: &FootprintBox) -> f64 {
    a.polygon().intersection_area(&b.polygon())
}

pub fn outside_area(b: &FootprintBox, room: &Room) -> f64 {
    let p = b.polygon();
    (p.area() - p.intersection_area(&room_polygon(room))).max(0.0)
}

/// Exact footprints of every asset, indexed like `spec.assets`.
pub fn footprints(spec: &SceneSpec, layout: &Layout) -> Result<Vec<FootprintBox>, EvalError> {
    spec.assets
        .iter()
        .map(|a| {
            layout
                .get(&a.id)
                .map(|p| a.footprint(p.planar()))
                .ok_or_else(|| EvalError::MissingPose(a.id.clone()))
        })
        .collect()
}

pub fn eval_physical(spec: &SceneSpec, layout: &Layout) -> Result<PhysicalReport, EvalError> {
    eval_physical_with(spec, layout, TAU_COLLISION, TAU_OUT_OF_ROOM)
}

/// Collision and out-of-room rates over exact rotated footprints.
pub fn eval_physical_with(
    spec: &SceneSpec,
    layout: &Layout,
    tau_c: f64,
    tau_o: f64,
) -> Result<PhysicalReport, EvalError> {
    let boxes = footprints(spec, layout)?;
    let n = boxes.len();
    let mut colliding = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if overlap_area(&boxes[i], &boxes[j]) > tau_c {
                colliding.insert(spec.assets[i].id.clone());
                colliding.insert(spec.assets[j].id.clone());
            }
        }
    }
    let oob: BTreeSet<String> = (0..n)
        .filter(|&i| outside_area(&boxes[i], &spec.room) > tau_o)
        .map(|i| spec.assets[i].id.clone())
        .collect();
    let pct = |k: usize| {
        if n == 0 {
            0.0
        } else {
            100.0 * k as f64 / n as f64
        }
    };
    Ok(PhysicalReport {
        cr_percent: pct(colliding.len()),
        or_percent: pct(oob.len()),
        colliding_ids: colliding.into_iter().collect(),
        oob_ids: oob.into_iter().collect(),
        tau_c,
        tau_o,
    })
}
