//! Planar rigid-body geometry: pose algebra, rotated footprints, bounds and
//! convex polygon clipping.
//!
//! Angles are stored raw. They are only wrapped into `(-pi, pi]` when two
//! poses are compared, see [`wrap_angle`].

mod polygon;

pub use polygon::{ConvexPolygon, GeometryError};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ad::Real;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Planar pose `(x, y, theta)`, theta in radians about +z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub const IDENTITY: Pose2D = Pose2D {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    /// `self ⊕ inner`: express `inner` (given in the frame of `self`) in the
    /// parent frame.
    pub fn compose(&self, inner: &Pose2D) -> Pose2D {
        compose(self, inner)
    }

    pub fn inverse(&self) -> Pose2D {
        invert(self)
    }

    /// Pose of `other` seen from the frame of `self`.
    pub fn relative_to_self(&self, other: &Pose2D) -> Pose2D {
        compose(&invert(self), other)
    }

    /// Componentwise distance, angles compared modulo 2*pi.
    pub fn max_abs_diff(&self, other: &Pose2D) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max(wrap_angle(self.theta - other.theta).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Planar rigid transformation composition `outer ⊕ inner`.
pub fn compose(outer: &Pose2D, inner: &Pose2D) -> Pose2D {
    let (s, c) = outer.theta.sin_cos();
    Pose2D {
        x: outer.x + inner.x * c - inner.y * s,
        y: outer.y + inner.x * s + inner.y * c,
        theta: outer.theta + inner.theta,
    }
}

/// Group inverse, so that `compose(invert(p), p)` is the identity.
pub fn invert(p: &Pose2D) -> Pose2D {
    let (s, c) = p.theta.sin_cos();
    Pose2D {
        x: -(p.x * c + p.y * s),
        y: p.x * s - p.y * c,
        theta: -p.theta,
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order: {lo} > {hi}");
        Self { lo, hi }
    }

    pub fn centered(center: f64, extent: f64) -> Self {
        Self::new(center - 0.5 * extent, center + 0.5 * extent)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Length of the intersection, 0 when disjoint or touching.
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }
}

/// Planar footprint of an asset or unit: a pose and half sizes along the
/// local axes at theta = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FootprintBox {
    pub pose: Pose2D,
    pub half_l: f64,
    pub half_w: f64,
}

impl FootprintBox {
    pub fn new(pose: Pose2D, half_l: f64, half_w: f64) -> Self {
        assert!(
            half_l > 0.0 && half_w > 0.0,
            "footprint half sizes must be positive, got ({half_l}, {half_w})"
        );
        Self {
            pose,
            half_l,
            half_w,
        }
    }

    /// Box from full sizes `l x w`.
    pub fn from_size(pose: Pose2D, l: f64, w: f64) -> Self {
        Self::new(pose, 0.5 * l, 0.5 * w)
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_l * self.half_w
    }

    pub fn extents(&self) -> (f64, f64) {
        footprint_extents(self)
    }

    pub fn bounds(&self) -> (Interval, Interval) {
        axis_bounds(self)
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        corners(self)
    }

    pub fn polygon(&self) -> ConvexPolygon {
        ConvexPolygon::new(self.corners().to_vec()).expect("rectangle is a valid convex polygon")
    }

    pub(crate) fn generic(&self) -> BoxT<f64> {
        BoxT {
            x: self.pose.x,
            y: self.pose.y,
            theta: self.pose.theta,
            half_l: self.half_l,
            half_w: self.half_w,
        }
    }
}

/// Axis-aligned extents `(e_x, e_y)` of the yaw-rotated footprint.
pub fn footprint_extents(b: &FootprintBox) -> (f64, f64) {
    extents(b.half_l, b.half_w, b.pose.theta)
}

/// Axis bounds `(B^x, B^y)` centred on the box position.
pub fn axis_bounds(b: &FootprintBox) -> (Interval, Interval) {
    let (ex, ey) = footprint_extents(b);
    (
        Interval::centered(b.pose.x, ex),
        Interval::centered(b.pose.y, ey),
    )
}

/// Proxy collision: strictly positive overlap on both axes.
pub fn collide_proxy(a: &FootprintBox, b: &FootprintBox) -> bool {
    let (ax, ay) = axis_bounds(a);
    let (bx, by) = axis_bounds(b);
    ax.overlap(&bx) > 0.0 && ay.overlap(&by) > 0.0
}

/// The four rotated corners, counter-clockwise, starting at local `(-l/2, -w/2)`.
pub fn corners(b: &FootprintBox) -> [[f64; 2]; 4] {
    let c = b.generic().corners();
    c.map(|[x, y]| [x, y])
}

/// Exact intersection area of two convex polygons.
pub fn polygon_intersection_area(a: &ConvexPolygon, b: &ConvexPolygon) -> f64 {
    a.intersection_area(b)
}

/// Minimum boundary distance between two boxes, negative when they
/// penetrate. Sampled at the corners and four interior points per edge of
/// each box against the signed distance of the other box.
pub fn min_boundary_distance(a: &FootprintBox, b: &FootprintBox) -> f64 {
    a.generic().min_boundary_distance(&b.generic())
}

/// Signed distance from a point to the box, negative inside.
pub fn point_box_distance(b: &FootprintBox, p: [f64; 2]) -> f64 {
    b.generic().signed_distance(p[0], p[1])
}

// ---------------------------------------------------------------------------
// Generic forms used by the differentiable losses.

pub(crate) fn extents<T: Real>(half_l: f64, half_w: f64, theta: T) -> (T, T) {
    let (s, c) = (theta.sin(), theta.cos());
    let l = 2.0 * half_l;
    let w = 2.0 * half_w;
    ((c * l).abs() + (s * w).abs(), (s * l).abs() + (c * w).abs())
}

/// Box whose pose may carry derivatives.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BoxT<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
    pub half_l: f64,
    pub half_w: f64,
}

impl<T: Real> BoxT<T> {
    pub fn extents(&self) -> (T, T) {
        extents(self.half_l, self.half_w, self.theta)
    }

    /// Point given in box-local coordinates, mapped to the world.
    pub fn to_world(&self, lx: f64, ly: f64) -> [T; 2] {
        let (s, c) = (self.theta.sin(), self.theta.cos());
        [self.x + c * lx - s * ly, self.y + s * lx + c * ly]
    }

    /// World point mapped into box-local coordinates.
    pub fn to_local(&self, px: T, py: T) -> [T; 2] {
        let (s, c) = (self.theta.sin(), self.theta.cos());
        let dx = px - self.x;
        let dy = py - self.y;
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn corners(&self) -> [[T; 2]; 4] {
        let (l, w) = (self.half_l, self.half_w);
        [
            self.to_world(-l, -w),
            self.to_world(l, -w),
            self.to_world(l, w),
            self.to_world(-l, w),
        ]
    }

    /// Corners plus four interior samples per edge, in counter-clockwise order.
    pub fn boundary_samples(&self) -> Vec<[T; 2]> {
        let (l, w) = (self.half_l, self.half_w);
        let local = [[-l, -w], [l, -w], [l, w], [-l, w]];
        let mut out = Vec::with_capacity(20);
        for i in 0..4 {
            let p = local[i];
            let q = local[(i + 1) % 4];
            out.push(self.to_world(p[0], p[1]));
            for k in 1..=4 {
                let t = k as f64 / 5.0;
                out.push(self.to_world(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])));
            }
        }
        out
    }

    pub fn signed_distance(&self, px: T, py: T) -> T {
        let [lx, ly] = self.to_local(px, py);
        let dx = lx.abs() - self.half_l;
        let dy = ly.abs() - self.half_w;
        let zero = T::cst(0.0);
        let outside = (dx.max(zero).sq() + dy.max(zero).sq()).sqrt();
        let inside = dx.max(dy).min(zero);
        outside + inside
    }

    pub fn min_boundary_distance(&self, other: &BoxT<T>) -> T {
        let mut best: Option<T> = None;
        for (from, to) in [(self, other), (other, self)] {
            for [px, py] in from.boundary_samples() {
                let d = to.signed_distance(px, py);
                best = Some(match best {
                    Some(b) => b.min(d),
                    None => d,
                });
            }
        }
        best.expect("boxes always produce boundary samples")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0x5eed)
    }

    fn random_pose(r: &mut impl Rng) -> Pose2D {
        Pose2D::new(
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(-10.0..10.0),
        )
    }

    fn unit_box(x: f64, y: f64, theta: f64) -> FootprintBox {
        FootprintBox::new(Pose2D::new(x, y, theta), 0.5, 0.5)
    }

    /// Rotation-matrix oracle for a single point.
    fn rotate_point(theta: f64, p: [f64; 2]) -> [f64; 2] {
        let m = [[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]];
        [
            m[0][0] * p[0] + m[0][1] * p[1],
            m[1][0] * p[0] + m[1][1] * p[1],
        ]
    }

    /// Corner AABB oracle: rotate the four canonical corners and take max - min.
    fn corner_aabb(b: &FootprintBox) -> (f64, f64, f64, f64) {
        let mut xs = vec![];
        let mut ys = vec![];
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let r = rotate_point(b.pose.theta, [sx * b.half_l, sy * b.half_w]);
            xs.push(r[0] + b.pose.x);
            ys.push(r[1] + b.pose.y);
        }
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (min(&xs), max(&xs), min(&ys), max(&ys))
    }

    #[test]
    fn compose_identity_and_quarter_turn() {
        let p = Pose2D::new(1.0, 2.0, 0.3);
        assert_eq!(compose(&Pose2D::IDENTITY, &p), p);

        let outer = Pose2D::new(1.0, 0.0, PI / 2.0);
        let got = compose(&outer, &Pose2D::new(1.0, 0.0, 0.0));
        let r = rotate_point(PI / 2.0, [1.0, 0.0]);
        assert!((got.x - (1.0 + r[0])).abs() < 1e-12);
        assert!((got.y - r[1]).abs() < 1e-12);
        assert!((got.x - 1.0).abs() < 1e-12 && (got.y - 1.0).abs() < 1e-12);
        assert_eq!(got.theta, PI / 2.0);
    }

    #[test]
    fn compose_is_associative() {
        let mut r = rng();
        for _ in 0..100 {
            let (a, b, c) = (
                random_pose(&mut r),
                random_pose(&mut r),
                random_pose(&mut r),
            );
            let left = compose(&compose(&a, &b), &c);
            let right = compose(&a, &compose(&b, &c));
            assert!((left.x - right.x).abs() < 1e-12);
            assert!((left.y - right.y).abs() < 1e-12);
            assert!(wrap_angle(left.theta - right.theta).abs() < 1e-12);
        }
    }

    #[test]
    fn invert_examples() {
        assert_eq!(
            invert(&Pose2D::IDENTITY).max_abs_diff(&Pose2D::IDENTITY),
            0.0
        );
        let p = Pose2D::new(1.0, 0.0, PI);
        let inv = invert(&p);
        assert!((inv.x - 1.0).abs() < 1e-12 && inv.y.abs() < 1e-12);
        assert_eq!(inv.theta, -PI);
        assert!(compose(&inv, &p).max_abs_diff(&Pose2D::IDENTITY) < 1e-12);
    }

    #[test]
    fn invert_is_two_sided() {
        let mut r = rng();
        for _ in 0..100 {
            let p = random_pose(&mut r);
            assert!(compose(&invert(&p), &p).max_abs_diff(&Pose2D::IDENTITY) < 1e-12);
            assert!(compose(&p, &invert(&p)).max_abs_diff(&Pose2D::IDENTITY) < 1e-12);
        }
    }

    #[test]
    fn unit_pose_cancels_in_relative_pose() {
        let mut r = rng();
        for _ in 0..1000 {
            let unit = random_pose(&mut r);
            let pi = random_pose(&mut r);
            let pj = random_pose(&mut r);
            let global = compose(&invert(&compose(&unit, &pi)), &compose(&unit, &pj));
            let local = compose(&invert(&pi), &pj);
            assert!(global.max_abs_diff(&local) < 1e-9);
        }
    }

    #[test]
    fn extents_examples() {
        let b = FootprintBox::from_size(Pose2D::IDENTITY, 2.0, 1.0);
        let (ex, ey) = footprint_extents(&b);
        assert!((ex - 2.0).abs() < 1e-12 && (ey - 1.0).abs() < 1e-12);

        let b = FootprintBox::from_size(Pose2D::new(0.0, 0.0, PI / 2.0), 2.0, 1.0);
        let (ex, ey) = footprint_extents(&b);
        assert!((ex - 1.0).abs() < 1e-12 && (ey - 2.0).abs() < 1e-12);

        let b = FootprintBox::from_size(Pose2D::new(0.0, 0.0, PI / 4.0), 2.0, 1.0);
        let (x0, x1, y0, y1) = corner_aabb(&b);
        let (ex, ey) = footprint_extents(&b);
        assert!((ex - (x1 - x0)).abs() < 1e-12);
        assert!((ey - (y1 - y0)).abs() < 1e-12);
        assert!((ex - 2.1213).abs() < 1e-4 && (ey - 2.1213).abs() < 1e-4);
    }

    #[test]
    fn extents_match_corner_aabb_for_all_angles() {
        let mut r = rng();
        for _ in 0..1000 {
            let b = FootprintBox::new(
                random_pose(&mut r),
                r.gen_range(0.05..3.0),
                r.gen_range(0.05..3.0),
            );
            let (x0, x1, y0, y1) = corner_aabb(&b);
            let (ex, ey) = footprint_extents(&b);
            assert!((ex - (x1 - x0)).abs() < 1e-10);
            assert!((ey - (y1 - y0)).abs() < 1e-10);
        }
    }

    #[test]
    fn bounds_examples() {
        let (bx, by) = axis_bounds(&unit_box(0.0, 0.0, 0.0));
        assert_eq!((bx.lo, bx.hi, by.lo, by.hi), (-0.5, 0.5, -0.5, 0.5));

        let b = FootprintBox::from_size(Pose2D::new(3.0, 0.0, PI / 2.0), 2.0, 1.0);
        let (bx, _) = axis_bounds(&b);
        let (x0, x1, _, _) = corner_aabb(&b);
        assert!((bx.lo - x0).abs() < 1e-12 && (bx.hi - x1).abs() < 1e-12);
        assert!((bx.lo - 2.5).abs() < 1e-12 && (bx.hi - 3.5).abs() < 1e-12);
    }

    #[test]
    fn bounds_contain_corners() {
        let mut r = rng();
        for _ in 0..1000 {
            let b = FootprintBox::new(
                random_pose(&mut r),
                r.gen_range(0.05..3.0),
                r.gen_range(0.05..3.0),
            );
            let (bx, by) = axis_bounds(&b);
            for [x, y] in corners(&b) {
                assert!(x >= bx.lo - 1e-12 && x <= bx.hi + 1e-12);
                assert!(y >= by.lo - 1e-12 && y <= by.hi + 1e-12);
            }
        }
    }

    #[test]
    fn collide_proxy_examples() {
        assert!(!collide_proxy(
            &unit_box(0.0, 0.0, 0.0),
            &unit_box(3.0, 0.0, 0.0)
        ));
        assert!(collide_proxy(
            &unit_box(1.0, 1.0, 0.2),
            &unit_box(1.0, 1.0, 0.2)
        ));
        // Shared edge: overlap length is exactly zero.
        assert!(!collide_proxy(
            &unit_box(0.0, 0.0, 0.0),
            &unit_box(1.0, 0.0, 0.0)
        ));
        // Shared corner.
        assert!(!collide_proxy(
            &unit_box(0.0, 0.0, 0.0),
            &unit_box(1.0, 1.0, 0.0)
        ));
    }

    #[test]
    fn corners_examples() {
        let c = corners(&unit_box(0.0, 0.0, 0.0));
        assert_eq!(c, [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]);

        let rot = corners(&unit_box(0.0, 0.0, PI / 2.0));
        for p in rot {
            assert!(c
                .iter()
                .any(|q| (q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12));
        }
        // Rotated order: first corner is the old second one.
        assert!((rot[0][0] - 0.5).abs() < 1e-12 && (rot[0][1] + 0.5).abs() < 1e-12);

        let mut r = rng();
        for _ in 0..100 {
            let b = FootprintBox::new(random_pose(&mut r), 0.7, 0.3);
            let radius = (0.7f64.powi(2) + 0.3f64.powi(2)).sqrt();
            for [x, y] in corners(&b) {
                let d = ((x - b.pose.x).powi(2) + (y - b.pose.y).powi(2)).sqrt();
                assert!((d - radius).abs() < 1e-12);
            }
            assert!(
                b.polygon().signed_area() > 0.0,
                "corners must be counter-clockwise"
            );
        }
    }

    #[test]
    fn min_boundary_distance_examples() {
        let d = min_boundary_distance(&unit_box(0.0, 0.0, 0.0), &unit_box(3.0, 0.0, 0.0));
        assert!((d - 2.0).abs() < 1e-12);
        let d = min_boundary_distance(&unit_box(0.0, 0.0, 0.0), &unit_box(1.0, 0.0, 0.0));
        assert!(d.abs() < 1e-12);
        let d = min_boundary_distance(&unit_box(0.0, 0.0, 0.0), &unit_box(0.6, 0.0, 0.0));
        assert!(d < 0.0);
    }

    /// Dense boundary sampling oracle: exact point-to-segment distances from
    /// 10^4 samples on each boundary.
    fn dense_boundary_distance(a: &FootprintBox, b: &FootprintBox) -> f64 {
        fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ap = [p[0] - a[0], p[1] - a[1]];
            let t =
                ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
            let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        }
        fn samples(b: &FootprintBox, n: usize) -> Vec<[f64; 2]> {
            let c = corners(b);
            let per = n / 4;
            let mut out = vec![];
            for i in 0..4 {
                let (p, q) = (c[i], c[(i + 1) % 4]);
                for k in 0..per {
                    let t = k as f64 / per as f64;
                    out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
            out
        }
        let mut best = f64::INFINITY;
        for (from, to) in [(a, b), (b, a)] {
            let c = corners(to);
            for p in samples(from, 10_000) {
                for i in 0..4 {
                    best = best.min(seg_dist(p, c[i], c[(i + 1) % 4]));
                }
            }
        }
        best
    }

    #[test]
    fn min_boundary_distance_matches_dense_oracle_for_rotated_pairs() {
        let mut r = rng();
        let mut checked = 0;
        while checked < 20 {
            let a = FootprintBox::new(
                Pose2D::new(0.0, 0.0, r.gen_range(-PI..PI)),
                r.gen_range(0.2..1.0),
                r.gen_range(0.2..1.0),
            );
            let b = FootprintBox::new(
                Pose2D::new(
                    r.gen_range(1.0..4.0),
                    r.gen_range(-2.0..2.0),
                    r.gen_range(-PI..PI),
                ),
                r.gen_range(0.2..1.0),
                r.gen_range(0.2..1.0),
            );
            if a.polygon().intersection_area(&b.polygon()) > 0.0 {
                continue;
            }
            let oracle = dense_boundary_distance(&a, &b);
            let got = min_boundary_distance(&a, &b);
            assert!(
                (got - oracle).abs() <= 0.05 * oracle.max(1e-3),
                "got {got}, oracle {oracle}"
            );
            checked += 1;
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
