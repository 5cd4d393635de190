//! Loss formulas, generic over [`Real`] so one definition yields both the
//! value and its exact derivatives.

use crate::ad::Real;
use crate::geometry::BoxT;
use crate::scene::{Corner, Room, Side, Wall};

/// Offset added to the displacement norm in the facing loss.
pub const FACING_EPS: f64 = 1e-8;

pub(crate) fn collision<T: Real>(a: &BoxT<T>, b: &BoxT<T>) -> T {
    let zero = T::cst(0.0);
    let (aex, aey) = a.extents();
    let (bex, bey) = b.extents();
    let (a_lo_x, a_hi_x) = (a.x - aex * 0.5, a.x + aex * 0.5);
    let (a_lo_y, a_hi_y) = (a.y - aey * 0.5, a.y + aey * 0.5);
    let (b_lo_x, b_hi_x) = (b.x - bex * 0.5, b.x + bex * 0.5);
    let (b_lo_y, b_hi_y) = (b.y - bey * 0.5, b.y + bey * 0.5);

    let ox = a_hi_x.min(b_hi_x) - a_lo_x.max(b_lo_x);
    let oy = a_hi_y.min(b_hi_y) - a_lo_y.max(b_lo_y);
    if ox.value() <= 0.0 || oy.value() <= 0.0 {
        return zero;
    }
    let inter = ox * oy;
    let area_a = aex * aey;
    let area_b = bex * bey;
    let iou = inter / (area_a + area_b - inter);

    let d2 = (a.x - b.x).sq() + (a.y - b.y).sq();
    let cx = a_hi_x.max(b_hi_x) - a_lo_x.min(b_lo_x);
    let cy = a_hi_y.max(b_hi_y) - a_lo_y.min(b_lo_y);
    let c2 = cx.sq() + cy.sq();
    let rho = inter / area_a.min(area_b);
    iou - d2 / c2 * rho
}

pub(crate) fn boundary<T: Real>(b: &BoxT<T>, room: &Room) -> T {
    let zero = T::cst(0.0);
    let mut total = zero;
    for [x, y] in b.corners() {
        total = total
            + (-x).max(zero)
            + (x - room.length).max(zero)
            + (-y).max(zero)
            + (y - room.width).max(zero);
    }
    total
}

pub(crate) fn distance<T: Real>(a: &BoxT<T>, b: &BoxT<T>, target: T) -> T {
    let d = ((a.x - b.x).sq() + (a.y - b.y).sq()).sqrt();
    (d - target).sq()
}

pub(crate) fn gap<T: Real>(a: &BoxT<T>, b: &BoxT<T>, clearance: T) -> T {
    (a.min_boundary_distance(b) - clearance).sq()
}

fn orientation_term<T: Real>(theta: T, target: f64) -> T {
    T::cst(1.0) - (theta - target).cos()
}

pub(crate) fn against_wall<T: Real>(b: &BoxT<T>, wall: Wall, room: &Room) -> T {
    let (ex, ey) = b.extents();
    let offset = match wall {
        Wall::L => b.x - ex * 0.5,
        Wall::R => b.x - (T::cst(room.length) - ex * 0.5),
        Wall::B => b.y - ey * 0.5,
        Wall::T => b.y - (T::cst(room.width) - ey * 0.5),
    };
    offset.sq() + orientation_term(b.theta, wall.inward_angle())
}

/// Target center for a box seated in `corner` against `wall`. The half size
/// along the wall normal is the box's local-x half size, since the box
/// faces away from `wall`.
pub fn corner_target(
    corner: Corner,
    wall: Wall,
    half_l: f64,
    half_w: f64,
    room: &Room,
) -> (f64, f64) {
    let (off_x, off_y) = match wall {
        Wall::L | Wall::R => (half_l, half_w),
        Wall::B | Wall::T => (half_w, half_l),
    };
    match corner {
        Corner::BL => (off_x, off_y),
        Corner::BR => (room.length - off_x, off_y),
        Corner::TR => (room.length - off_x, room.width - off_y),
        Corner::TL => (off_x, room.width - off_y),
    }
}

pub(crate) fn corner<T: Real>(b: &BoxT<T>, corner: Corner, wall: Wall, room: &Room) -> T {
    let (tx, ty) = corner_target(corner, wall, b.half_l, b.half_w, room);
    (b.x - tx).sq() + (b.y - ty).sq() + orientation_term(b.theta, wall.inward_angle())
}

pub(crate) fn facing<T: Real>(a: &BoxT<T>, b: &BoxT<T>) -> T {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let norm = (dx.sq() + dy.sq()).sqrt() + FACING_EPS;
    T::cst(1.0) - (a.theta.cos() * dx + a.theta.sin() * dy) / norm
}

/// Source center in the target frame and the source half sizes projected
/// onto the target axes.
pub(crate) fn directional_frame<T: Real>(src: &BoxT<T>, tgt: &BoxT<T>) -> ([T; 2], [T; 2]) {
    let local = tgt.to_local(src.x, src.y);
    let rel = src.theta - tgt.theta;
    let (s, c) = (rel.sin(), rel.cos());
    let rx = (c * src.half_l).abs() + (s * src.half_w).abs();
    let ry = (s * src.half_l).abs() + (c * src.half_w).abs();
    (local, [rx, ry])
}

pub(crate) fn directional<T: Real>(src: &BoxT<T>, tgt: &BoxT<T>, side: Side, p: T) -> T {
    let ([x, y], [rx, ry]) = directional_frame(src, tgt);
    let (ex, ey) = (tgt.half_l, tgt.half_w);
    let y_bar = (p * 2.0 - 1.0) * (ry * -1.0 + ey);
    let x_bar = (p * 2.0 - 1.0) * (rx * -1.0 + ex);
    match side {
        Side::Left => (x + rx + ex).hinge_sq() + (y - y_bar).abs(),
        Side::Right => (rx - x + ex).hinge_sq() + (y - y_bar).abs(),
        Side::Front => (ry - y + ey).hinge_sq() + (x - x_bar).abs(),
        Side::Behind => (y + ry + ey).hinge_sq() + (x - x_bar).abs(),
    }
}

pub(crate) fn angle<T: Real>(a: &BoxT<T>, b: &BoxT<T>, alpha: T) -> T {
    T::cst(1.0) - (a.theta - b.theta - alpha).cos()
}

pub(crate) fn placement<T: Real>(coord: T, target: T, margin: f64) -> T {
    ((coord - target).abs() - margin).hinge_sq()
}

/// Mean resultant length of `n` unit vectors spaced `2 * delta` apart.
pub(crate) fn arc_resultant<T: Real>(n: usize, delta: T) -> T {
    if delta.value().abs() < 1e-8 {
        return T::cst(1.0);
    }
    (delta * n as f64).sin() / (delta.sin() * n as f64)
}
