use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use super::{
    build_maps, detect_conflicts, entity_of, imagine_poses, Conflict, ConflictLevel, Maps,
};
use crate::scene::{Endpoint, Relation, RelationKind, SceneError, SceneSpec, Scope};

/// Clearance added on top of the separation a conflict requires, in meters.
pub const SEPARATION_MARGIN: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RevisionError {
    #[error("revision {iteration} produced an invalid scene: {source}")]
    Invalid {
        iteration: usize,
        source: SceneError,
    },
    #[error("revision {iteration} edited relations[{relation}] outside the conflicting scopes")]
    OutOfScope { iteration: usize, relation: usize },
    #[error("revision budget must be at least 1")]
    ZeroBudget,
}

/// Strategy that answers a conflict list with an edited relation list.
pub trait Reviser {
    fn revise(&mut self, spec: &SceneSpec, conflicts: &[Conflict]) -> Vec<Relation>;
}

/// Deterministic stand-in for a language-model reviser.
#[derive(Clone, Copy, Debug, Default)]
pub struct BaselineReviser;

impl Reviser for BaselineReviser {
    fn revise(&mut self, spec: &SceneSpec, conflicts: &[Conflict]) -> Vec<Relation> {
        baseline_reviser(spec, conflicts)
    }
}

/// Replays recorded answers in order, then leaves the relations unchanged.
#[derive(Clone, Debug, Default)]
pub struct RecordedReviser {
    responses: VecDeque<Vec<Relation>>,
}

impl RecordedReviser {
    pub fn new(responses: Vec<Vec<Relation>>) -> Self {
        RecordedReviser {
            responses: responses.into(),
        }
    }

    /// Reads a JSON array of relation arrays.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        Ok(Self::new(serde_json::from_str(text)?))
    }
}

impl Reviser for RecordedReviser {
    fn revise(&mut self, spec: &SceneSpec, _: &[Conflict]) -> Vec<Relation> {
        self.responses
            .pop_front()
            .unwrap_or_else(|| spec.relations.clone())
    }
}

fn scope_of(level: &ConflictLevel) -> Scope {
    match level {
        ConflictLevel::Intra(u) => Scope::Intra(u.clone()),
        ConflictLevel::Inter => Scope::Inter,
    }
}

/// Id a relation endpoint occupies in the map of `scope`.
fn endpoint_entity(spec: &SceneSpec, scope: &Scope, e: Endpoint) -> Option<String> {
    match (scope, e) {
        (Scope::Intra(_), Endpoint::Asset(i)) => Some(spec.assets[i].id.clone()),
        (Scope::Inter, Endpoint::Asset(i)) => Some(entity_of(spec, i)),
        (Scope::Inter, Endpoint::Unit(k)) => Some(spec.units[k].id.clone()),
        _ => None,
    }
}

fn linking_relation(spec: &SceneSpec, c: &Conflict) -> Option<usize> {
    let scope = scope_of(&c.level);
    (0..spec.relations.len()).find(|&r| {
        let rel = &spec.relations[r];
        if rel.scope != scope
            || !matches!(
                rel.kind,
                RelationKind::Distance { .. } | RelationKind::Gap { .. }
            )
        {
            return false;
        }
        let (sources, target) = spec.endpoints(r);
        let a = endpoint_entity(spec, &scope, sources[0]);
        let b = endpoint_entity(spec, &scope, target);
        let (x, y) = (Some(c.pair.0.clone()), Some(c.pair.1.clone()));
        (a == x && b == y) || (a == y && b == x)
    })
}

/// Center distance at which the two proxies stop overlapping along the line
/// joining their centers.
fn required_separation(maps: &Maps, c: &Conflict) -> f64 {
    let map = match &c.level {
        ConflictLevel::Inter => &maps.global,
        ConflictLevel::Intra(u) => maps
            .local
            .iter()
            .find(|m| m.scope == super::MapScope::Unit(u.clone()))
            .expect("conflict names a known unit"),
    };
    let (a, b) = (&map.entries[&c.pair.0], &map.entries[&c.pair.1]);
    let (dx, dy) = (b.pose.x - a.pose.x, b.pose.y - a.pose.y);
    let n = dx.hypot(dy);
    let u = if n > 0.0 {
        [dx / n, dy / n]
    } else {
        [1.0, 0.0]
    };
    let support = |e: &super::MapEntry| 0.5 * (e.extents.0 * u[0].abs() + e.extents.1 * u[1].abs());
    support(a) + support(b)
}

/// Raises the metric of a distance or gap relation linking each conflicting
/// pair, or appends a gap relation from the lexicographically later entity
/// to the earlier one.
pub fn baseline_reviser(spec: &SceneSpec, conflicts: &[Conflict]) -> Vec<Relation> {
    let mut relations = spec.relations.clone();
    if conflicts.is_empty() {
        return relations;
    }
    let maps = build_maps(spec, &imagine_poses(spec)).expect("interpreter poses every asset");
    let mut raised: BTreeMap<usize, f64> = BTreeMap::new();
    let mut appended = BTreeSet::new();
    for c in conflicts {
        match linking_relation(spec, c) {
            Some(r) => {
                let v = match spec.relations[r].kind {
                    RelationKind::Distance { distance } => {
                        distance.max(required_separation(&maps, c) + SEPARATION_MARGIN)
                    }
                    RelationKind::Gap { gap } => {
                        gap + c.overlap.0.min(c.overlap.1) + SEPARATION_MARGIN
                    }
                    _ => unreachable!("linking relations are distance or gap"),
                };
                let e = raised.entry(r).or_insert(v);
                *e = e.max(v);
            }
            None => {
                if appended.insert((c.level.clone(), c.pair.clone())) {
                    let rel = Relation::new(
                        RelationKind::Gap {
                            gap: SEPARATION_MARGIN,
                        },
                        &c.pair.1,
                        Some(&c.pair.0),
                        scope_of(&c.level),
                    );
                    relations.push(rel);
                }
            }
        }
    }
    for (r, v) in raised {
        relations[r].kind.set_metric(v);
    }
    relations
}

#[derive(Clone, Debug, PartialEq)]
pub enum Edit {
    Changed {
        index: usize,
        before: Relation,
        after: Relation,
    },
    Added {
        index: usize,
        relation: Relation,
    },
    Removed {
        index: usize,
        relation: Relation,
    },
}

impl Edit {
    fn scopes(&self) -> Vec<&Scope> {
        match self {
            Edit::Changed { before, after, .. } => vec![&before.scope, &after.scope],
            Edit::Added { relation, .. } | Edit::Removed { relation, .. } => vec![&relation.scope],
        }
    }

    fn index(&self) -> usize {
        match self {
            Edit::Changed { index, .. }
            | Edit::Added { index, .. }
            | Edit::Removed { index, .. } => *index,
        }
    }
}

fn diff(before: &[Relation], after: &[Relation]) -> Vec<Edit> {
    let mut edits = Vec::new();
    for (i, (a, b)) in before.iter().zip(after).enumerate() {
        if a != b {
            edits.push(Edit::Changed {
                index: i,
                before: a.clone(),
                after: b.clone(),
            });
        }
    }
    for (i, r) in after.iter().enumerate().skip(before.len()) {
        edits.push(Edit::Added {
            index: i,
            relation: r.clone(),
        });
    }
    for (i, r) in before.iter().enumerate().skip(after.len()) {
        edits.push(Edit::Removed {
            index: i,
            relation: r.clone(),
        });
    }
    edits
}

#[derive(Clone, Debug, PartialEq)]
pub struct RevisionStep {
    pub iteration: usize,
    pub conflicts: Vec<Conflict>,
    pub edits: Vec<Edit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RevisionReport {
    pub steps: Vec<RevisionStep>,
    /// Iteration at which no conflict remained.
    pub converged_at: Option<usize>,
    /// Conflicts in the layout imagined from the returned relations.
    pub remaining: Vec<Conflict>,
}

impl RevisionReport {
    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            let _ = writeln!(
                s,
                "iteration {}: {} conflicts",
                step.iteration,
                step.conflicts.len()
            );
            for c in &step.conflicts {
                let level = match &c.level {
                    ConflictLevel::Intra(u) => format!("intra {u}"),
                    ConflictLevel::Inter => "inter".to_string(),
                };
                let _ = writeln!(
                    s,
                    "  conflict {level} {} {} overlap {:.4} {:.4}",
                    c.pair.0, c.pair.1, c.overlap.0, c.overlap.1
                );
            }
            for e in &step.edits {
                let _ = match e {
                    Edit::Changed {
                        index,
                        before,
                        after,
                    } => writeln!(
                        s,
                        "  edit relations[{index}] {} {} -> {}",
                        after.kind.name(),
                        describe(before),
                        describe(after)
                    ),
                    Edit::Added { index, relation } => {
                        writeln!(
                            s,
                            "  add relations[{index}] {} {}",
                            relation.kind.name(),
                            describe(relation)
                        )
                    }
                    Edit::Removed { index, relation } => {
                        writeln!(
                            s,
                            "  remove relations[{index}] {} {}",
                            relation.kind.name(),
                            describe(relation)
                        )
                    }
                };
            }
        }
        let _ = match self.converged_at {
            Some(t) => writeln!(s, "converged at iteration {t}"),
            None => writeln!(
                s,
                "not converged, {} conflicts remain",
                self.remaining.len()
            ),
        };
        s
    }
}

fn describe(r: &Relation) -> String {
    let target = r.target.as_deref().unwrap_or(crate::scene::SCENE_ID);
    match r.kind.metric() {
        Some(m) => format!("{} -> {target} ({m:.4})", r.sources.join(",")),
        None => format!("{} -> {target}", r.sources.join(",")),
    }
}

/// Imagines a layout, checks it for conflicts and lets `reviser` edit the
/// relations, at most `budget` times.
pub fn imagine_and_revise(
    spec: &SceneSpec,
    reviser: &mut dyn Reviser,
    budget: usize,
) -> Result<(SceneSpec, RevisionReport), RevisionError> {
    if budget == 0 {
        return Err(RevisionError::ZeroBudget);
    }
    let mut current = spec.clone();
    let mut steps = Vec::new();
    for t in 1..=budget {
        let maps =
            build_maps(&current, &imagine_poses(&current)).expect("interpreter poses every asset");
        let conflicts = detect_conflicts(&current, &maps);
        if conflicts.is_empty() {
            steps.push(RevisionStep {
                iteration: t,
                conflicts,
                edits: Vec::new(),
            });
            let report = RevisionReport {
                steps,
                converged_at: Some(t),
                remaining: Vec::new(),
            };
            return Ok((current, report));
        }
        let relations = reviser.revise(&current, &conflicts);
        let edits = diff(&current.relations, &relations);
        let allowed: BTreeSet<Scope> = conflicts.iter().map(|c| scope_of(&c.level)).collect();
        for e in &edits {
            if e.scopes().iter().any(|s| !allowed.contains(s)) {
                return Err(RevisionError::OutOfScope {
                    iteration: t,
                    relation: e.index(),
                });
            }
        }
        let next = current
            .with_relations(relations)
            .map_err(|source| RevisionError::Invalid {
                iteration: t,
                source,
            })?;
        steps.push(RevisionStep {
            iteration: t,
            conflicts,
            edits,
        });
        current = next;
    }
    let maps =
        build_maps(&current, &imagine_poses(&current)).expect("interpreter poses every asset");
    let remaining = detect_conflicts(&current, &maps);
    Ok((
        current,
        RevisionReport {
            steps,
            converged_at: None,
            remaining,
        },
    ))
}
