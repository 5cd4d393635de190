//! Scene description: room, assets, frame-invariant units and the two-level
//! relation set, plus the layout output format.
//!
//! Scene files are JSON documents with the top-level keys `room`, `assets`,
//! `units`, `relations` and `seed`. See `README.md` for the full schema.

mod layout;
mod relation;

pub use layout::{parse_layout, serialize_layout, Layout, LayoutPose};
pub use relation::{Corner, Relation, RelationKind, Scope, Side, Wall};

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FootprintBox, Pose2D};

/// Reserved identifier of the scene node.
pub const SCENE_ID: &str = "scene";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error at {location}: {message}")]
    Semantic { location: String, message: String },
    #[error("unknown asset id `{0}`")]
    UnknownId(String),
}

fn semantic(location: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Semantic {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl Room {
    pub fn new(length: f64, width: f64, height: f64) -> Self {
        Self {
            length,
            width,
            height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asset {
    pub id: String,
    #[serde(default)]
    pub description: String,
    /// `(l, w, h)` in meters, `l` along the local x axis.
    pub size: [f64; 3],
}

impl Asset {
    pub fn half_l(&self) -> f64 {
        0.5 * self.size[0]
    }

    pub fn half_w(&self) -> f64 {
        0.5 * self.size[1]
    }

    pub fn footprint(&self, pose: Pose2D) -> FootprintBox {
        FootprintBox::new(pose, self.half_l(), self.half_w())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub anchor: String,
    #[serde(default)]
    pub members: Vec<String>,
}

/// Where an asset lives in the mixed parameterization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Index into [`SceneSpec::independents`].
    Independent(usize),
    /// Anchor of unit `k` (0-based).
    Anchor(usize),
    /// Member `j` of unit `k`.
    Member(usize, usize),
}

/// A resolved relation endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Asset(usize),
    Unit(usize),
    Scene,
}

/// Relations bound to one learnable metric parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedGroup {
    pub name: String,
    pub kind: &'static str,
    /// Mean of the metric values declared by the bound relations.
    pub prior: f64,
    pub relations: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    room: Room,
    assets: Vec<Asset>,
    #[serde(default)]
    units: Vec<Unit>,
    #[serde(default)]
    relations: Vec<Relation>,
    #[serde(default)]
    seed: u64,
}

/// Validated, immutable scene.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub room: Room,
    pub assets: Vec<Asset>,
    pub units: Vec<Unit>,
    pub relations: Vec<Relation>,
    pub seed: u64,
    asset_index: HashMap<String, usize>,
    unit_index: HashMap<String, usize>,
    roles: Vec<Role>,
    independents: Vec<usize>,
    unit_assets: Vec<(usize, Vec<usize>)>,
    endpoints: Vec<(Vec<Endpoint>, Endpoint)>,
    shared: Vec<SharedGroup>,
}

impl PartialEq for SceneSpec {
    fn eq(&self, other: &Self) -> bool {
        self.room == other.room
            && self.assets == other.assets
            && self.units == other.units
            && self.relations == other.relations
            && self.seed == other.seed
    }
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<SceneSpec, SceneError> {
    let doc: SceneDoc = serde_json::from_str(text).map_err(|e| SceneError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    SceneSpec::new(doc.room, doc.assets, doc.units, doc.relations, doc.seed)
}

/// The unit index `pi(i)` of an asset: 0 for independent assets, `k >= 1`
/// for assets of the k-th unit.
pub fn assignment(spec: &SceneSpec, asset_id: &str) -> Result<usize, SceneError> {
    let i = spec
        .asset_index(asset_id)
        .ok_or_else(|| SceneError::UnknownId(asset_id.to_string()))?;
    Ok(match spec.role(i) {
        Role::Independent(_) => 0,
        Role::Anchor(k) | Role::Member(k, _) => k + 1,
    })
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl SceneSpec {
    pub fn new(
        room: Room,
        assets: Vec<Asset>,
        units: Vec<Unit>,
        relations: Vec<Relation>,
        seed: u64,
    ) -> Result<Self, SceneError> {
        if !(positive(room.length) && positive(room.width) && positive(room.height)) {
            return Err(semantic("room", "room dimensions must be positive"));
        }

        let mut asset_index = HashMap::new();
        for (i, a) in assets.iter().enumerate() {
            let loc = format!("assets[{i}]");
            if a.id.is_empty() || a.id == SCENE_ID {
                return Err(semantic(loc, format!("invalid asset id `{}`", a.id)));
            }
            if !a.size.iter().all(|&s| positive(s)) {
                return Err(semantic(
                    loc,
                    format!("asset `{}` has non-positive size", a.id),
                ));
            }
            if asset_index.insert(a.id.clone(), i).is_some() {
                return Err(semantic(loc, format!("duplicate asset id `{}`", a.id)));
            }
        }

        let mut unit_index = HashMap::new();
        let mut roles: Vec<Option<Role>> = vec![None; assets.len()];
        let mut unit_assets = Vec::with_capacity(units.len());
        for (k, u) in units.iter().enumerate() {
            let loc = format!("units[{k}]");
            if u.id.is_empty() || u.id == SCENE_ID || asset_index.contains_key(&u.id) {
                return Err(semantic(
                    loc,
                    format!("unit id `{}` collides with another id", u.id),
                ));
            }
            if unit_index.insert(u.id.clone(), k).is_some() {
                return Err(semantic(loc, format!("duplicate unit id `{}`", u.id)));
            }
            let anchor = *asset_index
                .get(&u.anchor)
                .ok_or_else(|| semantic(&loc, format!("anchor `{}` is not an asset", u.anchor)))?;
            if roles[anchor].is_some() {
                return Err(semantic(
                    &loc,
                    format!("anchor `{}` already belongs to another unit", u.anchor),
                ));
            }
            roles[anchor] = Some(Role::Anchor(k));
            let mut members = Vec::with_capacity(u.members.len());
            for (j, m) in u.members.iter().enumerate() {
                if *m == u.anchor {
                    return Err(semantic(&loc, format!("anchor `{m}` listed as a member")));
                }
                let i = *asset_index
                    .get(m)
                    .ok_or_else(|| semantic(&loc, format!("member `{m}` is not an asset")))?;
                if roles[i].is_some() {
                    return Err(semantic(
                        &loc,
                        format!("member `{m}` already belongs to a unit"),
                    ));
                }
                roles[i] = Some(Role::Member(k, j));
                members.push(i);
            }
            unit_assets.push((anchor, members));
        }

        let mut independents = Vec::new();
        let roles: Vec<Role> = roles
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.unwrap_or_else(|| {
                    independents.push(i);
                    Role::Independent(independents.len() - 1)
                })
            })
            .collect();

        let mut spec = SceneSpec {
            room,
            assets,
            units,
            relations: Vec::new(),
            seed,
            asset_index,
            unit_index,
            roles,
            independents,
            unit_assets,
            endpoints: Vec::new(),
            shared: Vec::new(),
        };

        let mut endpoints = Vec::with_capacity(relations.len());
        for (r, rel) in relations.iter().enumerate() {
            endpoints.push(spec.check_relation(r, rel)?);
        }
        spec.shared = shared_groups(&relations)?;
        spec.relations = relations;
        spec.endpoints = endpoints;
        Ok(spec)
    }

    /// Same scene with a different relation set, revalidated.
    pub fn with_relations(&self, relations: Vec<Relation>) -> Result<SceneSpec, SceneError> {
        SceneSpec::new(
            self.room,
            self.assets.clone(),
            self.units.clone(),
            relations,
            self.seed,
        )
    }

    fn resolve(&self, id: &str) -> Option<Endpoint> {
        if id == SCENE_ID {
            Some(Endpoint::Scene)
        } else if let Some(&i) = self.asset_index.get(id) {
            Some(Endpoint::Asset(i))
        } else {
            self.unit_index.get(id).map(|&k| Endpoint::Unit(k))
        }
    }

    fn check_relation(
        &self,
        r: usize,
        rel: &Relation,
    ) -> Result<(Vec<Endpoint>, Endpoint), SceneError> {
        let loc = format!("relations[{r}] ({})", rel.kind.name());
        rel.kind.validate().map_err(|m| semantic(&loc, m))?;

        let expected_sources = matches!(rel.kind, RelationKind::Around { .. });
        if expected_sources && rel.sources.len() < 2 {
            return Err(semantic(&loc, "around needs at least two sources"));
        }
        if !expected_sources && rel.sources.len() != 1 {
            return Err(semantic(&loc, "relation needs exactly one source"));
        }

        let mut sources = Vec::with_capacity(rel.sources.len());
        for s in &rel.sources {
            match self.resolve(s) {
                Some(Endpoint::Scene) | None => {
                    return Err(semantic(&loc, format!("source `{s}` does not resolve")))
                }
                Some(e) => sources.push(e),
            }
        }
        if sources.iter().collect::<HashSet<_>>().len() != sources.len() {
            return Err(semantic(&loc, "duplicate sources"));
        }
        let target = match &rel.target {
            None => Endpoint::Scene,
            Some(t) => self
                .resolve(t)
                .ok_or_else(|| semantic(&loc, format!("target `{t}` does not resolve")))?,
        };
        if rel.kind.is_scene_level() != (target == Endpoint::Scene) {
            return Err(semantic(
                &loc,
                if rel.kind.is_scene_level() {
                    "wall, corner and placement relations target the scene"
                } else {
                    "pairwise relation needs an asset or unit target"
                },
            ));
        }
        if sources.contains(&target) {
            return Err(semantic(&loc, "relation links an entity to itself"));
        }

        match &rel.scope {
            Scope::Intra(unit_id) => {
                let k = *self
                    .unit_index
                    .get(unit_id)
                    .ok_or_else(|| semantic(&loc, format!("unknown unit `{unit_id}`")))?;
                if target == Endpoint::Scene {
                    return Err(semantic(
                        &loc,
                        "intra-unit relations cannot reference the scene",
                    ));
                }
                for e in sources.iter().chain(std::iter::once(&target)) {
                    let ok = match e {
                        Endpoint::Asset(i) => {
                            matches!(self.roles[*i], Role::Anchor(u) | Role::Member(u, _) if u == k)
                        }
                        _ => false,
                    };
                    if !ok {
                        return Err(semantic(
                            &loc,
                            format!("intra relation of unit `{unit_id}` references an entity outside the unit"),
                        ));
                    }
                }
            }
            Scope::Inter => {
                for e in sources.iter().chain(std::iter::once(&target)) {
                    if let Endpoint::Asset(i) = e {
                        if let Role::Member(k, _) = self.roles[*i] {
                            return Err(semantic(
                                &loc,
                                format!(
                                    "member `{}` of unit `{}` cannot take part in an inter-unit relation",
                                    self.assets[*i].id, self.units[k].id
                                ),
                            ));
                        }
                    }
                }
                // A unit and its own anchor are the same entity in the global frame.
                let mut seen = HashSet::new();
                for e in sources.iter().chain(std::iter::once(&target)) {
                    let key = match e {
                        Endpoint::Asset(i) => match self.roles[*i] {
                            Role::Anchor(k) => Endpoint::Unit(k),
                            _ => *e,
                        },
                        _ => *e,
                    };
                    if key != Endpoint::Scene && !seen.insert(key) {
                        return Err(semantic(&loc, "relation links a unit to its own anchor"));
                    }
                }
            }
        }
        Ok((sources, target))
    }

    pub fn asset_index(&self, id: &str) -> Option<usize> {
        self.asset_index.get(id).copied()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.unit_index.get(id).copied()
    }

    pub fn role(&self, asset: usize) -> Role {
        self.roles[asset]
    }

    /// Asset indices with `pi(i) = 0`, in file order.
    pub fn independents(&self) -> &[usize] {
        &self.independents
    }

    /// `(anchor, members)` asset indices of unit `k`.
    pub fn unit_assets(&self, k: usize) -> (usize, &[usize]) {
        let (a, m) = &self.unit_assets[k];
        (*a, m)
    }

    /// Resolved `(sources, target)` of relation `r`.
    pub fn endpoints(&self, r: usize) -> (&[Endpoint], Endpoint) {
        let (s, t) = &self.endpoints[r];
        (s, *t)
    }

    pub fn shared_groups(&self) -> &[SharedGroup] {
        &self.shared
    }

    pub fn shared_group_index(&self, name: &str) -> Option<usize> {
        self.shared.iter().position(|g| g.name == name)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneDoc {
            room: self.room,
            assets: self.assets.clone(),
            units: self.units.clone(),
            relations: self.relations.clone(),
            seed: self.seed,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Assets the scene node cannot reach through the relation graph.
    pub fn unreachable_assets(&self) -> Vec<String> {
        let g = crate::graph::build_graph(self);
        let d = g.distances_from(g.scene_node());
        (0..self.assets.len())
            .filter(|&i| d[i].is_none())
            .map(|i| self.assets[i].id.clone())
            .collect()
    }
}

fn shared_groups(relations: &[Relation]) -> Result<Vec<SharedGroup>, SceneError> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, (Vec<usize>, &'static str, f64)> = BTreeMap::new();
    for (r, rel) in relations.iter().enumerate() {
        let Some(name) = &rel.shared_param else {
            continue;
        };
        let loc = format!("relations[{r}] ({})", rel.kind.name());
        let metric = rel
            .kind
            .metric()
            .ok_or_else(|| semantic(&loc, "relation kind has no metric parameter to share"))?;
        let entry = groups.entry(name.clone()).or_insert_with(|| {
            order.push(name.clone());
            (Vec::new(), rel.kind.name(), 0.0)
        });
        if entry.1 != rel.kind.name() {
            return Err(semantic(
                &loc,
                format!(
                    "shared parameter `{name}` binds `{}` and `{}` relations",
                    entry.1,
                    rel.kind.name()
                ),
            ));
        }
        entry.0.push(r);
        entry.2 += metric;
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let (relations, kind, sum) = groups.remove(&name).expect("group recorded");
            SharedGroup {
                prior: sum / relations.len() as f64,
                name,
                kind,
                relations,
            }
        })
        .collect())
}
