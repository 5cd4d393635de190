//! Indoor layout from relational scene descriptions.
//!
//! Assets are grouped into frame-invariant units (an anchor plus members
//! posed in the anchor's frame). Relations are split into intra-unit and
//! inter-unit sets and solved with a two-stage gradient optimizer over a
//! mixed global/local parameterization.

pub mod ad;
pub mod constraints;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod imagination;
pub mod optimizer;
pub mod scene;
