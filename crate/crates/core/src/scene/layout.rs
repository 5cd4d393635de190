use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::geometry::Pose2D;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub theta: f64,
}

impl LayoutPose {
    pub fn planar(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.theta)
    }
}

/// Solved layout: one pose per asset, keyed by id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub poses: BTreeMap<String, LayoutPose>,
}

impl Layout {
    pub fn get(&self, id: &str) -> Option<&LayoutPose> {
        self.poses.get(id)
    }
}

/// Canonical JSON rendering: sorted keys, two-space indent, trailing LF.
pub fn serialize_layout(layout: &Layout) -> String {
    let mut s = serde_json::to_string_pretty(layout).expect("layout serializes");
    s.push('\n');
    s
}

pub fn parse_layout(text: &str) -> Result<Layout, SceneError> {
    serde_json::from_str(text).map_err(|e| SceneError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_layout_document() {
        assert_eq!(
            serialize_layout(&Layout::default()),
            "{\n  \"poses\": {}\n}\n"
        );
    }

    #[test]
    fn output_is_stable() {
        let mut l = Layout::default();
        for (i, id) in ["zeta", "alpha", "mid"].iter().enumerate() {
            l.poses.insert(
                id.to_string(),
                LayoutPose {
                    x: i as f64 * 0.1,
                    y: 1.0 / 3.0,
                    z: 0.25,
                    theta: -0.5,
                },
            );
        }
        let a = serialize_layout(&l);
        assert_eq!(a, serialize_layout(&l.clone()));
        assert!(a.find("alpha").unwrap() < a.find("zeta").unwrap());
    }

    proptest! {
        #[test]
        fn round_trip(entries in prop::collection::btree_map(
            "[a-z_][a-z0-9_]{0,8}",
            (-1e3f64..1e3, -1e3f64..1e3, 0f64..5.0, -10f64..10.0),
            0..8,
        )) {
            let layout = Layout {
                poses: entries
                    .into_iter()
                    .map(|(k, (x, y, z, theta))| (k, LayoutPose { x, y, z, theta }))
                    .collect(),
            };
            let text = serialize_layout(&layout);
            prop_assert_eq!(parse_layout(&text).unwrap(), layout);
        }
    }
}
