use crate::geometry::{compose, invert, Pose2D};
use crate::scene::{Layout, LayoutPose, Role, SceneSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parameterization {
    /// Independent poses, unit poses and member poses local to their unit.
    Mixed,
    /// One global pose per asset.
    Global,
}

/// Offsets of every degree of freedom in the flat value vector. Each pose
/// occupies three consecutive slots `(x, y, theta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofLayout {
    pub kind: Parameterization,
    /// Mixed: per entry of [`SceneSpec::independents`].
    pub independent: Vec<usize>,
    /// Mixed: per unit.
    pub unit: Vec<usize>,
    /// Mixed: per unit, per member.
    pub member: Vec<Vec<usize>>,
    /// Global: per asset.
    pub asset: Vec<usize>,
    /// Per shared group.
    pub shared: Vec<usize>,
    pub len: usize,
}

impl DofLayout {
    pub fn mixed(spec: &SceneSpec) -> Self {
        let mut next = 0;
        let mut take = |n: usize| {
            let o = next;
            next += n;
            o
        };
        let independent = spec.independents().iter().map(|_| take(3)).collect();
        let unit = (0..spec.units.len()).map(|_| take(3)).collect();
        let member = (0..spec.units.len())
            .map(|k| spec.unit_assets(k).1.iter().map(|_| take(3)).collect())
            .collect();
        let shared = spec.shared_groups().iter().map(|_| take(1)).collect();
        DofLayout {
            kind: Parameterization::Mixed,
            independent,
            unit,
            member,
            asset: Vec::new(),
            shared,
            len: next,
        }
    }

    pub fn global(spec: &SceneSpec) -> Self {
        let n = spec.assets.len();
        let asset = (0..n).map(|i| 3 * i).collect();
        let shared = (0..spec.shared_groups().len()).map(|g| 3 * n + g).collect();
        DofLayout {
            kind: Parameterization::Global,
            independent: Vec::new(),
            unit: Vec::new(),
            member: Vec::new(),
            asset,
            shared,
            len: 3 * n + spec.shared_groups().len(),
        }
    }

    /// Offsets of every pose triple, in ascending order.
    pub fn pose_offsets(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .independent
            .iter()
            .chain(&self.unit)
            .chain(self.member.iter().flatten())
            .chain(&self.asset)
            .copied()
            .collect();
        v.sort_unstable();
        v
    }
}

/// Optimizer state: parameter values and momentum buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamState {
    pub layout: DofLayout,
    pub values: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl ParamState {
    pub fn zeros(layout: DofLayout) -> Self {
        let n = layout.len;
        ParamState {
            layout,
            values: vec![0.0; n],
            velocity: vec![0.0; n],
        }
    }

    pub fn pose(&self, offset: usize) -> Pose2D {
        let v = &self.values[offset..offset + 3];
        Pose2D::new(v[0], v[1], v[2])
    }

    pub fn set_pose(&mut self, offset: usize, p: Pose2D) {
        self.values[offset..offset + 3].copy_from_slice(&[p.x, p.y, p.theta]);
    }

    pub fn shared_value(&self, group: usize) -> f64 {
        self.values[self.layout.shared[group]]
    }

    pub fn shared_values(&self) -> Vec<f64> {
        self.layout.shared.iter().map(|&o| self.values[o]).collect()
    }

    /// Global pose of every asset, indexed like `spec.assets`.
    pub fn global_poses(&self, spec: &SceneSpec) -> Vec<Pose2D> {
        match self.layout.kind {
            Parameterization::Global => self.layout.asset.iter().map(|&o| self.pose(o)).collect(),
            Parameterization::Mixed => (0..spec.assets.len())
                .map(|i| match spec.role(i) {
                    Role::Independent(n) => self.pose(self.layout.independent[n]),
                    Role::Anchor(k) => self.pose(self.layout.unit[k]),
                    Role::Member(k, j) => compose(
                        &self.pose(self.layout.unit[k]),
                        &self.pose(self.layout.member[k][j]),
                    ),
                })
                .collect(),
        }
    }

    /// Mixed state with the same geometry. Unit poses take the anchor's
    /// global pose, so the anchor's local pose stays the identity.
    pub fn from_global_poses(spec: &SceneSpec, poses: &[Pose2D], shared: &[f64]) -> ParamState {
        let mut s = ParamState::zeros(DofLayout::mixed(spec));
        for (n, &i) in spec.independents().iter().enumerate() {
            s.set_pose(s.layout.independent[n], poses[i]);
        }
        for k in 0..spec.units.len() {
            let (anchor, members) = spec.unit_assets(k);
            let frame = poses[anchor];
            s.set_pose(s.layout.unit[k], frame);
            let inv = invert(&frame);
            for (j, &m) in members.iter().enumerate() {
                s.set_pose(s.layout.member[k][j], compose(&inv, &poses[m]));
            }
        }
        for (g, &v) in shared.iter().enumerate() {
            let o = s.layout.shared[g];
            s.values[o] = v;
        }
        s
    }

    pub fn to_mixed(&self, spec: &SceneSpec) -> ParamState {
        match self.layout.kind {
            Parameterization::Mixed => self.clone(),
            Parameterization::Global => {
                ParamState::from_global_poses(spec, &self.global_poses(spec), &self.shared_values())
            }
        }
    }

    pub fn to_global(&self, spec: &SceneSpec) -> ParamState {
        let mut s = ParamState::zeros(DofLayout::global(spec));
        for (i, p) in self.global_poses(spec).into_iter().enumerate() {
            s.set_pose(s.layout.asset[i], p);
        }
        for (g, v) in self.shared_values().into_iter().enumerate() {
            let o = s.layout.shared[g];
            s.values[o] = v;
        }
        s
    }

    pub fn to_layout(&self, spec: &SceneSpec) -> Layout {
        let mut layout = Layout::default();
        for (a, p) in spec.assets.iter().zip(self.global_poses(spec)) {
            layout.poses.insert(
                a.id.clone(),
                LayoutPose {
                    x: p.x,
                    y: p.y,
                    z: 0.5 * a.size[2],
                    theta: p.theta,
                },
            );
        }
        layout
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
