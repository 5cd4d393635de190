use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wall {
    L,
    R,
    T,
    B,
}

impl Wall {
    /// Orientation facing away from the wall into the room, measured with
    /// the facing vector `(cos theta, sin theta)`.
    pub fn inward_angle(self) -> f64 {
        match self {
            Wall::L => 0.0,
            Wall::R => PI,
            Wall::B => PI / 2.0,
            Wall::T => -PI / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    BL,
    BR,
    TR,
    TL,
}

impl Corner {
    pub fn walls(self) -> [Wall; 2] {
        match self {
            Corner::BL => [Wall::B, Wall::L],
            Corner::BR => [Wall::B, Wall::R],
            Corner::TR => [Wall::T, Wall::R],
            Corner::TL => [Wall::T, Wall::L],
        }
    }

    pub fn is_adjacent(self, wall: Wall) -> bool {
        self.walls().contains(&wall)
    }
}

/// Side of the target for directional relations. The target's local `+y`
/// is its front and local `-x` its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Front,
    Behind,
}

fn half() -> f64 {
    0.5
}

/// Relation vocabulary with kind-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelationKind {
    Distance {
        distance: f64,
    },
    Gap {
        gap: f64,
    },
    AgainstWall {
        wall: Wall,
    },
    Corner {
        corner: Corner,
        wall: Wall,
    },
    Facing,
    LeftOf {
        #[serde(default = "half")]
        p: f64,
    },
    RightOf {
        #[serde(default = "half")]
        p: f64,
    },
    InFrontOf {
        #[serde(default = "half")]
        p: f64,
    },
    BehindOf {
        #[serde(default = "half")]
        p: f64,
    },
    AngleOffset {
        alpha: f64,
    },
    HPlace {
        x: f64,
        #[serde(default)]
        margin: f64,
    },
    VPlace {
        y: f64,
        #[serde(default)]
        margin: f64,
    },
    Around {
        sweep: f64,
        #[serde(default)]
        center: f64,
    },
}

impl RelationKind {
    pub fn name(&self) -> &'static str {
        match self {
            RelationKind::Distance { .. } => "distance",
            RelationKind::Gap { .. } => "gap",
            RelationKind::AgainstWall { .. } => "against_wall",
            RelationKind::Corner { .. } => "corner",
            RelationKind::Facing => "facing",
            RelationKind::LeftOf { .. } => "left_of",
            RelationKind::RightOf { .. } => "right_of",
            RelationKind::InFrontOf { .. } => "in_front_of",
            RelationKind::BehindOf { .. } => "behind_of",
            RelationKind::AngleOffset { .. } => "angle_offset",
            RelationKind::HPlace { .. } => "h_place",
            RelationKind::VPlace { .. } => "v_place",
            RelationKind::Around { .. } => "around",
        }
    }

    /// Relations whose reference is the scene node.
    pub fn is_scene_level(&self) -> bool {
        matches!(
            self,
            RelationKind::AgainstWall { .. }
                | RelationKind::Corner { .. }
                | RelationKind::HPlace { .. }
                | RelationKind::VPlace { .. }
        )
    }

    pub fn side(&self) -> Option<(Side, f64)> {
        match *self {
            RelationKind::LeftOf { p } => Some((Side::Left, p)),
            RelationKind::RightOf { p } => Some((Side::Right, p)),
            RelationKind::InFrontOf { p } => Some((Side::Front, p)),
            RelationKind::BehindOf { p } => Some((Side::Behind, p)),
            _ => None,
        }
    }

    /// The metric parameter that parameter sharing binds.
    pub fn metric(&self) -> Option<f64> {
        match *self {
            RelationKind::Distance { distance } => Some(distance),
            RelationKind::Gap { gap } => Some(gap),
            RelationKind::LeftOf { p }
            | RelationKind::RightOf { p }
            | RelationKind::InFrontOf { p }
            | RelationKind::BehindOf { p } => Some(p),
            RelationKind::AngleOffset { alpha } => Some(alpha),
            RelationKind::HPlace { x, .. } => Some(x),
            RelationKind::VPlace { y, .. } => Some(y),
            RelationKind::Around { sweep, .. } => Some(sweep),
            RelationKind::AgainstWall { .. }
            | RelationKind::Corner { .. }
            | RelationKind::Facing => None,
        }
    }

    pub fn set_metric(&mut self, v: f64) {
        match self {
            RelationKind::Distance { distance } => *distance = v,
            RelationKind::Gap { gap } => *gap = v,
            RelationKind::LeftOf { p }
            | RelationKind::RightOf { p }
            | RelationKind::InFrontOf { p }
            | RelationKind::BehindOf { p } => *p = v,
            RelationKind::AngleOffset { alpha } => *alpha = v,
            RelationKind::HPlace { x, .. } => *x = v,
            RelationKind::VPlace { y, .. } => *y = v,
            RelationKind::Around { sweep, .. } => *sweep = v,
            RelationKind::AgainstWall { .. }
            | RelationKind::Corner { .. }
            | RelationKind::Facing => {}
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{what} must be finite"))
            }
        };
        match *self {
            RelationKind::Distance { distance } => {
                finite(distance, "distance")?;
                if distance < 0.0 {
                    return Err("distance must be >= 0".into());
                }
            }
            RelationKind::Gap { gap } => {
                finite(gap, "gap")?;
                if gap < 0.0 {
                    return Err("gap must be >= 0".into());
                }
            }
            RelationKind::Corner { corner, wall } => {
                if !corner.is_adjacent(wall) {
                    return Err(format!(
                        "wall {wall:?} is not adjacent to corner {corner:?}"
                    ));
                }
            }
            RelationKind::LeftOf { p }
            | RelationKind::RightOf { p }
            | RelationKind::InFrontOf { p }
            | RelationKind::BehindOf { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err("alignment p must lie in [0, 1]".into());
                }
            }
            RelationKind::AngleOffset { alpha } => finite(alpha, "alpha")?,
            RelationKind::HPlace { x: target, margin }
            | RelationKind::VPlace { y: target, margin } => {
                finite(target, "placement coordinate")?;
                finite(margin, "margin")?;
                if margin < 0.0 {
                    return Err("margin must be >= 0".into());
                }
            }
            RelationKind::Around { sweep, center } => {
                finite(center, "center")?;
                finite(sweep, "sweep")?;
                if !(0.0..2.0 * PI).contains(&sweep) {
                    return Err("sweep must lie in [0, 2*pi)".into());
                }
            }
            RelationKind::AgainstWall { .. } | RelationKind::Facing => {}
        }
        Ok(())
    }
}

/// Intra-unit relations live in one unit's local frame; inter-unit
/// relations place units and independent assets in the scene.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Inter,
    Intra(String),
}

/// One relation. `target == None` means the scene node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelationDoc", into = "RelationDoc")]
pub struct Relation {
    pub kind: RelationKind,
    pub sources: Vec<String>,
    pub target: Option<String>,
    pub scope: Scope,
    pub shared_param: Option<String>,
}

impl Relation {
    pub fn new(kind: RelationKind, source: &str, target: Option<&str>, scope: Scope) -> Self {
        Self {
            kind,
            sources: vec![source.to_string()],
            target: target.map(str::to_string),
            scope,
            shared_param: None,
        }
    }

    pub fn shared(mut self, name: &str) -> Self {
        self.shared_param = Some(name.to_string());
        self
    }

    pub fn source(&self) -> &str {
        &self.sources[0]
    }
}

#[derive(Serialize, Deserialize)]
struct RelationDoc {
    #[serde(flatten)]
    kind: RelationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sources: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
    scope: Scope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shared_param: Option<String>,
}

impl TryFrom<RelationDoc> for Relation {
    type Error = String;

    fn try_from(doc: RelationDoc) -> Result<Self, String> {
        let sources = match (doc.source, doc.sources) {
            (Some(s), None) => vec![s],
            (None, Some(v)) => v,
            (Some(_), Some(_)) => return Err("give either `source` or `sources`, not both".into()),
            (None, None) => return Err("relation has no `source`".into()),
        };
        let target = doc.target.filter(|t| t != super::SCENE_ID);
        Ok(Relation {
            kind: doc.kind,
            sources,
            target,
            scope: doc.scope,
            shared_param: doc.shared_param,
        })
    }
}

impl From<Relation> for RelationDoc {
    fn from(r: Relation) -> Self {
        let (source, sources) = if matches!(r.kind, RelationKind::Around { .. }) {
            (None, Some(r.sources))
        } else {
            (r.sources.into_iter().next(), None)
        };
        RelationDoc {
            kind: r.kind,
            source,
            sources,
            target: r.target,
            scope: r.scope,
            shared_param: r.shared_param,
        }
    }
}
